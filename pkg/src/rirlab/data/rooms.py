"""Synthetic room generation: seeded ground-truth RIRs with target acoustic
parameters, plus deterministic pseudo-embeddings standing in for real image
and text encoder outputs."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..acoustics import analyze, estimate_drr
from ..concurrency import worker_count
from ..dsp import OctaveBands, Signal, fft_convolve
from ..errors import RirlabError
from ..fit import NoiseShapeParams, T60_DECAY_CONSTANT, synth_param_rir
from ..model.config import ROLE_DIMS

DRR_SOLVE_TOL_DB = 0.01
DEFAULT_REVERB_LEN = 120000


@dataclass(frozen=True)
class RoomSpec:
    """Acoustic targets for one synthetic room."""

    t60_per_band: tuple  # seconds, one per octave band
    drr_target: float  # dB
    early_tap_count: int = 6
    seed: int = 0

    def __post_init__(self):
        t60s = tuple(float(t) for t in self.t60_per_band)
        if len(t60s) == 0:
            raise RirlabError("t60_per_band must be non-empty")
        if any(not (0.1 <= t <= 3.0) for t in t60s):
            raise RirlabError("per-band T60 must lie in [0.1, 3.0] s")
        if self.early_tap_count < 0:
            raise RirlabError("early_tap_count must be >= 0")
        if not np.isfinite(self.drr_target):
            raise RirlabError("drr_target must be finite")
        object.__setattr__(self, "t60_per_band", t60s)

    def as_dict(self) -> dict:
        return {
            "t60_per_band": list(self.t60_per_band),
            "drr_target": self.drr_target,
            "early_tap_count": self.early_tap_count,
            "seed": self.seed,
        }


def pseudo_embedding(seed: int, role: str):
    """Deterministic stand-in embedding for a given seed and modality."""
    from ..model.config import Embedding

    if role not in ROLE_DIMS:
        raise RirlabError(f"unknown embedding role {role!r}")
    role_code = sorted(ROLE_DIMS).index(role)
    rng = np.random.Generator(np.random.Philox([seed, role_code]))
    return Embedding(values=rng.standard_normal(ROLE_DIMS[role]), role=role)


def _solve_direct_gain(
    template: NoiseShapeParams,
    target_drr: float,
    seed: int,
    length: int,
    rate: int,
    bands: OctaveBands,
    floor_gain: float,
) -> tuple[float, Signal]:
    """Bisect the direct-tap gain until the measured DRR hits the target."""

    def drr_of(gain: float) -> tuple[float, Signal]:
        params = NoiseShapeParams(
            band_gains=template.band_gains,
            band_decays=template.band_decays,
            direct_delay=template.direct_delay,
            direct_gain=gain,
            early_taps=template.early_taps,
        )
        rir = synth_param_rir(params, seed, length, rate, bands)
        return estimate_drr(rir), rir

    lo = floor_gain
    drr_lo, rir_lo = drr_of(lo)
    if target_drr <= drr_lo:
        if abs(target_drr - drr_lo) <= DRR_SOLVE_TOL_DB:
            return lo, rir_lo
        raise RirlabError(
            f"unreachable drr_target {target_drr:.2f} dB: floor is {drr_lo:.2f} dB "
            "for this decay profile"
        )
    hi = lo
    drr_hi = drr_lo
    for _ in range(60):
        hi *= 2.0
        drr_hi, rir_hi = drr_of(hi)
        if drr_hi >= target_drr:
            break
    else:
        raise RirlabError(f"unreachable drr_target {target_drr:.2f} dB: cap engaged")
    for _ in range(80):
        mid = np.sqrt(lo * hi)
        drr_mid, rir_mid = drr_of(mid)
        if abs(drr_mid - target_drr) <= DRR_SOLVE_TOL_DB:
            return mid, rir_mid
        if drr_mid < target_drr:
            lo = mid
        else:
            hi = mid
    return mid, rir_mid


def gen_room(
    spec: RoomSpec,
    rate: int = 44100,
    length: int = 44160,
    bands: OctaveBands = OctaveBands(),
):
    """Build one ground-truth room: RIR, pseudo visual/text embeddings, metadata.

    The RIR is a direct tap plus seeded early taps plus banded exponential
    noise with decays 3*ln(10)/t60 per band; the direct-tap gain is solved
    so the measured DRR lands within +/-1.5 dB of the target.
    """
    if len(spec.t60_per_band) != len(bands):
        raise RirlabError(
            f"spec has {len(spec.t60_per_band)} per-band T60s but there are "
            f"{len(bands)} bands"
        )
    decays = T60_DECAY_CONSTANT / np.asarray(spec.t60_per_band)
    rng = np.random.Generator(np.random.Philox([spec.seed, 7]))

    tail_probe = NoiseShapeParams(
        band_gains=np.ones(len(bands)),
        band_decays=decays,
        direct_delay=0.0,
        direct_gain=0.0,
    )
    tail = synth_param_rir(tail_probe, spec.seed, length, rate, bands)
    tail_peak = float(np.max(np.abs(tail.samples)))

    tap_delays = np.sort(rng.uniform(0.003, 0.045, size=spec.early_tap_count))
    tap_signs = rng.choice([-1.0, 1.0], size=spec.early_tap_count)
    tap_mags = rng.uniform(0.2, 0.6, size=spec.early_tap_count)
    taps = tuple(
        (float(d), float(s * m * tail_peak))
        for d, s, m in zip(tap_delays, tap_signs, tap_mags)
    )

    template = NoiseShapeParams(
        band_gains=np.ones(len(bands)),
        band_decays=decays,
        direct_delay=0.0,
        direct_gain=0.0,
        early_taps=taps,
    )
    direct_gain, rir = _solve_direct_gain(
        template, spec.drr_target, spec.seed, length, rate, bands,
        floor_gain=max(tail_peak, 1e-12) * 1.05,
    )
    params = NoiseShapeParams(
        band_gains=template.band_gains,
        band_decays=template.band_decays,
        direct_delay=0.0,
        direct_gain=direct_gain,
        early_taps=taps,
    )
    achieved = analyze(rir)
    v_emb = pseudo_embedding(spec.seed, "visual")
    t_emb = pseudo_embedding(spec.seed, "text")
    meta = {
        "schema": 1,
        "spec": spec.as_dict(),
        "params": params.as_dict(),
        "achieved": {"t60": achieved.t60, "drr": achieved.drr, "edt": achieved.edt},
        "sample_rate": rate,
        "length": length,
        "band_centers": list(bands.centers),
    }
    return rir, v_emb, t_emb, meta


def gen_rooms(specs, rate: int = 44100, length: int = 44160,
              bands: OctaveBands = OctaveBands(), workers: int | None = None):
    """Generate several rooms, possibly concurrently; output order follows
    the input order regardless of scheduling."""
    specs = list(specs)
    n = worker_count(workers if workers is not None else len(specs))
    if n <= 1 or len(specs) <= 1:
        return [gen_room(s, rate, length, bands) for s in specs]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda s: gen_room(s, rate, length, bands), specs))


def make_reverberant(dry: Signal, rir: Signal, crop: int = DEFAULT_REVERB_LEN) -> Signal:
    """Convolve dry audio with an RIR and crop or zero-pad to a fixed length."""
    if crop < 1:
        raise RirlabError("crop length must be positive")
    wet = fft_convolve(dry, rir)
    samples = wet.samples
    if samples.size >= crop:
        samples = samples[:crop]
    else:
        samples = np.pad(samples, (0, crop - samples.size))
    return Signal(samples=samples, sample_rate=wet.sample_rate)
