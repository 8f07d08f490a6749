"""Tests for the signal primitives."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rirlab.dsp import (
    OctaveBands,
    Signal,
    StftConfig,
    band_filter,
    fft_convolve,
    octave_noise,
    stft,
)
from rirlab.errors import RirlabError

RATE = 44100


def _direct_dft_frame(frame):
    n = frame.size
    k = np.arange(n)
    return np.array([
        np.sum(frame * np.exp(-2j * np.pi * m * k / n)) for m in range(n // 2 + 1)
    ])


class TestSignal:
    def test_rejects_empty(self):
        with pytest.raises(RirlabError):
            Signal(np.array([]), RATE)

    def test_rejects_nan(self):
        with pytest.raises(RirlabError):
            Signal(np.array([1.0, np.nan]), RATE)

    def test_rejects_bad_rate(self):
        with pytest.raises(RirlabError):
            Signal(np.array([1.0]), 0)


class TestStft:
    def test_zero_signal_all_zero_mags(self):
        cfg = StftConfig(512, 128, 512)
        spec = stft(Signal(np.zeros(1024), RATE), cfg)
        assert np.all(spec.mags == 0.0)

    def test_frame_count_and_bins(self):
        cfg = StftConfig(512, 100, 400)
        spec = stft(Signal(np.ones(2000), RATE), cfg)
        assert spec.mags.shape == ((2000 - 400) // 100 + 1, 512 // 2 + 1)

    def test_sine_at_bin_center_dominates_matching_bin(self):
        cfg = StftConfig(512, 128, 512)
        bin_idx = 32
        freq = bin_idx * RATE / cfg.fft_size
        t = np.arange(4096) / RATE
        spec = stft(Signal(np.sin(2 * np.pi * freq * t), RATE), cfg)
        assert np.all(np.argmax(spec.mags, axis=1) == bin_idx)

    def test_matches_direct_dft_oracle_on_one_frame(self):
        cfg = StftConfig(512, 128, 512)
        rng = np.random.default_rng(7)
        x = rng.standard_normal(1024)
        spec = stft(Signal(x, RATE), cfg)
        window = 0.5 * (1.0 - np.cos(2 * np.pi * np.arange(512) / 512))
        oracle = np.abs(_direct_dft_frame(x[:512] * window))
        np.testing.assert_allclose(spec.mags[0], oracle, rtol=1e-9, atol=1e-12)

    def test_too_short_signal_errors(self):
        cfg = StftConfig(512, 128, 512)
        with pytest.raises(RirlabError, match="signal too short"):
            stft(Signal(np.ones(511), RATE), cfg)

    def test_scaling_is_linear_in_magnitude(self):
        cfg = StftConfig(256, 64, 256)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(1000)
        base = stft(Signal(x, RATE), cfg).mags
        scaled = stft(Signal(-2.5 * x, RATE), cfg).mags
        np.testing.assert_allclose(scaled, 2.5 * base, rtol=1e-9, atol=1e-12)

    def test_config_invariants(self):
        with pytest.raises(RirlabError):
            StftConfig(500, 100, 400)  # not a power of two
        with pytest.raises(RirlabError):
            StftConfig(512, 600, 512)  # hop > win


class TestFftConvolve:
    def test_identity_kernel(self):
        x = Signal(np.array([1.0, 2.0, 3.0]), RATE)
        h = Signal(np.array([1.0]), RATE)
        np.testing.assert_allclose(fft_convolve(x, h).samples, [1, 2, 3], atol=1e-12)

    def test_hand_convolution(self):
        x = Signal(np.array([1.0, 1.0]), RATE)
        y = fft_convolve(x, x)
        np.testing.assert_allclose(y.samples, [1, 2, 1], atol=1e-12)

    def test_matches_direct_convolution_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(257)
        h = rng.standard_normal(63)
        direct = np.zeros(257 + 63 - 1)
        for i, xi in enumerate(x):
            for j, hj in enumerate(h):
                direct[i + j] += xi * hj
        got = fft_convolve(Signal(x, RATE), Signal(h, RATE)).samples
        np.testing.assert_allclose(got, direct, rtol=1e-9, atol=1e-12)

    def test_rate_mismatch_errors(self):
        with pytest.raises(RirlabError, match="sample rate"):
            fft_convolve(Signal(np.ones(4), 44100), Signal(np.ones(4), 48000))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_commutative_and_linear(self, seed):
        rng = np.random.default_rng(seed)
        x = Signal(rng.standard_normal(64), RATE)
        h = Signal(rng.standard_normal(32), RATE)
        xy = fft_convolve(x, h).samples
        yx = fft_convolve(h, x).samples
        np.testing.assert_allclose(xy, yx, rtol=1e-9, atol=1e-12)
        a = 1.7
        scaled = fft_convolve(Signal(a * x.samples, RATE), h).samples
        np.testing.assert_allclose(scaled, a * xy, rtol=1e-9, atol=1e-12)


class TestBandFilter:
    def test_sine_lands_in_its_band(self):
        bands = OctaveBands()
        n = 1 << 14
        freq = 1000.0 * round(n * 1000.0 / RATE) / (n * 1000.0 / RATE)  # snap to FFT bin
        k = round(n * 1000.0 / RATE)
        x = np.sin(2 * np.pi * k * np.arange(n) / n)
        outs = band_filter(Signal(x, RATE), bands)
        energies = np.array([s.energy() for s in outs])
        total = Signal(x, RATE).energy()
        band_idx = bands.centers.index(1000.0)
        assert energies[band_idx] / total >= 0.99
        others = np.delete(energies, band_idx)
        assert np.all(others / total < 0.01)

    def test_zero_signal_zero_bands(self):
        outs = band_filter(Signal(np.zeros(512), RATE), OctaveBands())
        for s in outs:
            assert np.all(s.samples == 0.0)

    def test_partition_reconstructs_bandlimited_input(self):
        # Contiguous octave ladder; input synthesized in the frequency
        # domain strictly inside the covered range, so the band sum must
        # reproduce it.
        centers = [60.0 * 2**k for k in range(8)]  # covers [42.4, 10861) Hz
        bands = OctaveBands(tuple(centers))
        n = 1 << 13
        freqs = np.fft.rfftfreq(n, 1.0 / RATE)
        lo = centers[0] / np.sqrt(2)
        hi = centers[-1] * np.sqrt(2)
        rng = np.random.default_rng(5)
        spectrum = (rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size))
        spectrum[(freqs < lo * 1.001) | (freqs > hi * 0.999)] = 0.0
        x = np.fft.irfft(spectrum, n)
        outs = band_filter(Signal(x, RATE), bands)
        recon = np.sum([s.samples for s in outs], axis=0)
        rel = np.linalg.norm(recon - x) / np.linalg.norm(x)
        assert rel < 1e-6

    def test_band_edge_at_nyquist_errors(self):
        with pytest.raises(RirlabError, match="16000"):
            band_filter(Signal(np.ones(256), RATE), OctaveBands((1000.0, 16000.0)))

    def test_refiltering_is_idempotent(self):
        bands = OctaveBands((500.0,))
        rng = np.random.default_rng(9)
        x = Signal(rng.standard_normal(4096), RATE)
        once = band_filter(x, bands)[0]
        twice = band_filter(once, bands)[0]
        num = np.linalg.norm(twice.samples - once.samples)
        assert num / np.linalg.norm(once.samples) < 1e-9


class TestOctaveNoise:
    def test_zero_gains_zero_signal(self):
        out = octave_noise(1, 500, OctaveBands(), np.zeros(7), RATE)
        assert np.all(out.samples == 0.0)

    def test_same_seed_bit_identical(self):
        a = octave_noise(42, 2048, OctaveBands(), np.ones(7), RATE)
        b = octave_noise(42, 2048, OctaveBands(), np.ones(7), RATE)
        assert np.array_equal(a.samples, b.samples)

    def test_one_hot_gain_concentrates_energy(self):
        bands = OctaveBands()
        gains = np.zeros(7)
        gains[3] = 2.0
        out = octave_noise(5, 1 << 13, bands, gains, RATE)
        banded = band_filter(out, bands)
        energies = np.array([s.energy() for s in banded])
        assert energies[3] / out.energy() >= 0.99

    def test_gain_count_mismatch_errors(self):
        with pytest.raises(RirlabError, match="gains"):
            octave_noise(1, 100, OctaveBands(), np.ones(6), RATE)

    def test_different_seeds_differ(self):
        a = octave_noise(1, 1024, OctaveBands(), np.ones(7), RATE)
        b = octave_noise(2, 1024, OctaveBands(), np.ones(7), RATE)
        assert not np.array_equal(a.samples, b.samples)
