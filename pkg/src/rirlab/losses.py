"""Training-objective losses: multi-resolution STFT, time-domain squared
error, banded energy-decay loss, and their weighted combination."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import OctaveBands, Signal, Spectrogram, StftConfig, band_filter, stft
from .errors import RirlabError

SC_DENOM_FLOOR = 1e-8
MAG_LOG_FLOOR = 1e-7

#: Parallel-WaveGAN style resolutions: (fft_size, hop, win_length).
DEFAULT_RESOLUTIONS = ((512, 50, 240), (1024, 120, 600), (2048, 240, 1200))


@dataclass(frozen=True)
class LossWeights:
    """Weights for the squared-error and EDC terms of the total loss."""

    lambda_mse: float = 100.0
    lambda_edc: float = 0.1

    def __post_init__(self):
        if self.lambda_mse < 0 or self.lambda_edc < 0:
            raise RirlabError("loss weights must be non-negative")


@dataclass(frozen=True)
class MultiResConfig:
    """STFT resolutions the spectral loss is summed over."""

    resolutions: tuple[StftConfig, ...] = field(
        default=tuple(StftConfig(f, h, w) for f, h, w in DEFAULT_RESOLUTIONS)
    )

    def __post_init__(self):
        if len(self.resolutions) < 1:
            raise RirlabError("need at least one STFT resolution")
        object.__setattr__(self, "resolutions", tuple(self.resolutions))

    @property
    def max_win_length(self) -> int:
        return max(c.win_length for c in self.resolutions)


@dataclass(frozen=True)
class LossReport:
    """All loss components plus the weighted total."""

    stft: float
    sc_per_res: tuple[float, ...]
    mag_per_res: tuple[float, ...]
    mse: float
    edc: float
    total: float

    def as_dict(self) -> dict:
        return {
            "stft": self.stft,
            "sc_per_res": list(self.sc_per_res),
            "mag_per_res": list(self.mag_per_res),
            "mse": self.mse,
            "edc": self.edc,
            "total": self.total,
        }


def _check_shapes(mag_g: Spectrogram, mag_e: Spectrogram) -> None:
    if mag_g.shape != mag_e.shape:
        raise RirlabError(
            f"spectrogram shape mismatch: {mag_g.shape} vs {mag_e.shape}"
        )


def loss_sc(mag_g: Spectrogram, mag_e: Spectrogram) -> float:
    """Spectral convergence: ||G - E||_F / ||E||_F.

    The denominator is the estimate's magnitude, floored by 1e-8.
    """
    _check_shapes(mag_g, mag_e)
    num = np.linalg.norm(mag_g.mags - mag_e.mags)
    den = np.linalg.norm(mag_e.mags) + SC_DENOM_FLOOR
    return float(num / den)


def loss_mag(mag_g: Spectrogram, mag_e: Spectrogram) -> float:
    """Mean absolute log-magnitude difference, magnitudes floored at 1e-7."""
    _check_shapes(mag_g, mag_e)
    lg = np.log(np.maximum(mag_g.mags, MAG_LOG_FLOOR))
    le = np.log(np.maximum(mag_e.mags, MAG_LOG_FLOOR))
    return float(np.abs(lg - le).mean())


def loss_mrstft(
    r_g: Signal, r_e: Signal, cfg: MultiResConfig = MultiResConfig()
) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    """Multi-resolution STFT loss: sum over resolutions of SC + log-mag.

    Returns (total, per-resolution SC, per-resolution log-mag). The
    per-resolution terms are summed, not averaged.
    """
    if len(r_g) != len(r_e):
        raise RirlabError(f"length mismatch: {len(r_g)} vs {len(r_e)}")
    if r_g.sample_rate != r_e.sample_rate:
        raise RirlabError("sample rate mismatch")
    sc_terms = []
    mag_terms = []
    for res in cfg.resolutions:
        sg = stft(r_g, res)
        se = stft(r_e, res)
        sc_terms.append(loss_sc(sg, se))
        mag_terms.append(loss_mag(sg, se))
    total = float(np.sum(sc_terms) + np.sum(mag_terms))
    return total, tuple(sc_terms), tuple(mag_terms)


def loss_mse(r_g: Signal, r_e: Signal) -> float:
    """Sum of squared sample differences (a plain sum, not a mean)."""
    if len(r_g) != len(r_e):
        raise RirlabError(f"length mismatch: {len(r_g)} vs {len(r_e)}")
    d = r_g.samples - r_e.samples
    return float(np.dot(d, d))


def _band_edc_sums(signal: Signal, bands: OctaveBands) -> np.ndarray:
    """Unnormalized backward energy sums, one row per band."""
    banded = band_filter(signal, bands)
    out = np.empty((len(bands), len(signal)))
    for i, b in enumerate(banded):
        out[i] = np.cumsum((b.samples**2)[::-1])[::-1]
    return out


def loss_edc(r_g: Signal, r_e: Signal, bands: OctaveBands = OctaveBands()) -> float:
    """Banded energy-decay loss.

    Both signals are split into octave bands; the unnormalized backward
    energy sums are compared by squared difference over all bands and
    times, divided by the sample count T.
    """
    if len(r_g) != len(r_e):
        raise RirlabError(f"length mismatch: {len(r_g)} vs {len(r_e)}")
    if r_g.sample_rate != r_e.sample_rate:
        raise RirlabError("sample rate mismatch")
    eg = _band_edc_sums(r_g, bands)
    ee = _band_edc_sums(r_e, bands)
    return float(np.sum((eg - ee) ** 2) / len(r_g))


def loss_total(
    r_g: Signal,
    r_e: Signal,
    cfg: MultiResConfig = MultiResConfig(),
    bands: OctaveBands = OctaveBands(),
    w: LossWeights = LossWeights(),
) -> LossReport:
    """Weighted combination: stft + lambda_mse * mse + lambda_edc * edc."""
    stft_total, sc_terms, mag_terms = loss_mrstft(r_g, r_e, cfg)
    mse = loss_mse(r_g, r_e)
    edc = loss_edc(r_g, r_e, bands)
    total = stft_total + w.lambda_mse * mse + w.lambda_edc * edc
    return LossReport(
        stft=stft_total,
        sc_per_res=sc_terms,
        mag_per_res=mag_terms,
        mse=mse,
        edc=edc,
        total=total,
    )
