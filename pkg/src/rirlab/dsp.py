"""Deterministic signal primitives: STFT, octave filterbank, FFT convolution, seeded noise.

Everything in this module is a pure function over immutable inputs, so all
operations are safe to call concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RirlabError

SQRT2 = float(np.sqrt(2.0))

#: Standard octave ladder covering speech bandwidth (Hz).
DEFAULT_OCTAVE_CENTERS = (125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0)


@dataclass(frozen=True)
class Signal:
    """A mono sample sequence with its sample rate.

    Samples are stored as float64 regardless of the input dtype.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise RirlabError("signal must be a non-empty 1-D sample sequence")
        if not np.all(np.isfinite(samples)):
            raise RirlabError("signal contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise RirlabError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate

    def energy(self) -> float:
        """Sum of squared samples."""
        return float(np.dot(self.samples, self.samples))


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters for one STFT resolution."""

    fft_size: int
    hop: int
    win_length: int
    window: str = "hann"

    def __post_init__(self):
        if self.fft_size <= 0 or (self.fft_size & (self.fft_size - 1)) != 0:
            raise RirlabError(f"fft_size must be a positive power of two, got {self.fft_size}")
        if not (0 < self.hop <= self.win_length <= self.fft_size):
            raise RirlabError(
                f"need 0 < hop <= win_length <= fft_size, got "
                f"hop={self.hop}, win_length={self.win_length}, fft_size={self.fft_size}"
            )
        if self.window != "hann":
            raise RirlabError(f"unsupported window {self.window!r}")

    @property
    def bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class Spectrogram:
    """Magnitude spectrogram, frames x bins."""

    mags: np.ndarray
    config: StftConfig

    def __post_init__(self):
        mags = np.asarray(self.mags, dtype=np.float64)
        if mags.ndim != 2 or mags.shape[1] != self.config.bins:
            raise RirlabError(
                f"spectrogram must be frames x {self.config.bins} bins, got shape {mags.shape}"
            )
        if not np.all(np.isfinite(mags)) or np.any(mags < 0):
            raise RirlabError("spectrogram entries must be finite and non-negative")
        object.__setattr__(self, "mags", mags)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mags.shape


@dataclass(frozen=True)
class OctaveBands:
    """Octave band centers; each band spans [center/sqrt(2), center*sqrt(2))."""

    centers: tuple = field(default=DEFAULT_OCTAVE_CENTERS)

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers)
        if len(centers) == 0:
            raise RirlabError("need at least one band center")
        if any(c <= 0 for c in centers):
            raise RirlabError("band centers must be positive")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise RirlabError("band centers must be strictly increasing")
        object.__setattr__(self, "centers", centers)

    def __len__(self) -> int:
        return len(self.centers)

    def edges(self) -> list[tuple[float, float]]:
        """Per-band (low, high) edges in Hz."""
        return [(c / SQRT2, c * SQRT2) for c in self.centers]

    def validate_rate(self, sample_rate: int) -> None:
        nyquist = sample_rate / 2.0
        for c in self.centers:
            if c * SQRT2 >= nyquist:
                raise RirlabError(
                    f"band centered at {c} Hz has an edge at or above Nyquist ({nyquist} Hz)"
                )


def _hann(length: int) -> np.ndarray:
    # Periodic Hann; identically zero-endpoint symmetric form is not used.
    n = np.arange(length)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / length))


def stft(signal: Signal, cfg: StftConfig) -> Spectrogram:
    """Magnitude STFT with a Hann window and no edge padding.

    Frame count is floor((len - win_length) / hop) + 1; each frame is
    windowed then zero-padded to fft_size before the DFT.
    """
    x = signal.samples
    if x.size < cfg.win_length:
        raise RirlabError(
            f"signal too short: {x.size} samples < win_length {cfg.win_length}"
        )
    n_frames = (x.size - cfg.win_length) // cfg.hop + 1
    idx = np.arange(cfg.win_length)[None, :] + cfg.hop * np.arange(n_frames)[:, None]
    frames = x[idx] * _hann(cfg.win_length)[None, :]
    mags = np.abs(np.fft.rfft(frames, n=cfg.fft_size, axis=1))
    return Spectrogram(mags=mags, config=cfg)


def fft_convolve(x: Signal, h: Signal) -> Signal:
    """Full linear convolution of two signals via the FFT."""
    if x.sample_rate != h.sample_rate:
        raise RirlabError(
            f"sample rate mismatch: {x.sample_rate} vs {h.sample_rate}"
        )
    n = x.samples.size + h.samples.size - 1
    nfft = 1 << (n - 1).bit_length()
    y = np.fft.irfft(np.fft.rfft(x.samples, nfft) * np.fft.rfft(h.samples, nfft), nfft)[:n]
    return Signal(samples=y, sample_rate=x.sample_rate)


def _band_masks(n_samples: int, sample_rate: int, bands: OctaveBands) -> np.ndarray:
    """Boolean rfft-bin masks, one row per band; bins keep [low, high)."""
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / sample_rate)
    masks = np.empty((len(bands), freqs.size), dtype=bool)
    for i, (lo, hi) in enumerate(bands.edges()):
        masks[i] = (freqs >= lo) & (freqs < hi)
    return masks


def band_filter(signal: Signal, bands: OctaveBands) -> list[Signal]:
    """Split a signal into octave bands by zero-phase FFT masking.

    Each output keeps only the rfft bins inside [center/sqrt(2),
    center*sqrt(2)) and has the same length as the input.
    """
    bands.validate_rate(signal.sample_rate)
    spectrum = np.fft.rfft(signal.samples)
    masks = _band_masks(signal.samples.size, signal.sample_rate, bands)
    out = []
    for mask in masks:
        banded = np.fft.irfft(np.where(mask, spectrum, 0.0), n=signal.samples.size)
        out.append(Signal(samples=banded, sample_rate=signal.sample_rate))
    return out


def white_noise(seed: int, length: int, sample_rate: int) -> Signal:
    """Unit-variance Gaussian noise from a counter-based PRNG (Philox).

    Bit-reproducible for a given seed across platforms and runs.
    """
    if length < 1:
        raise RirlabError(f"noise length must be >= 1, got {length}")
    rng = np.random.Generator(np.random.Philox(seed))
    return Signal(samples=rng.standard_normal(length), sample_rate=sample_rate)


def octave_noise(
    seed: int,
    length: int,
    bands: OctaveBands,
    gains,
    sample_rate: int = 44100,
) -> Signal:
    """Band-filtered seeded noise: one white-noise draw, split into octave
    bands, scaled per band and summed."""
    gains = np.asarray(gains, dtype=np.float64)
    if gains.shape != (len(bands),):
        raise RirlabError(
            f"expected {len(bands)} band gains, got shape {gains.shape}"
        )
    if not np.all(np.isfinite(gains)):
        raise RirlabError("band gains must be finite")
    noise = white_noise(seed, length, sample_rate)
    banded = band_filter(noise, bands)
    total = np.zeros(length)
    for g, b in zip(gains, banded):
        total += g * b.samples
    return Signal(samples=total, sample_rate=sample_rate)
