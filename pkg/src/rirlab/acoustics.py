"""Energy-decay analysis and room-acoustic metrics (T60, DRR, EDT)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import Signal
from .errors import RirlabError

#: Default decay-fit window for T60 (the T20 method, extrapolated x3).
T20_RANGE = (-5.0, -25.0)
#: Alternative T30 window, extrapolated x2.
T30_RANGE = (-5.0, -35.0)

DRR_CAP_DB = 60.0
DIRECT_WINDOW_BEFORE_S = 0.0005
DIRECT_WINDOW_AFTER_S = 0.0025


@dataclass(frozen=True)
class EnergyDecayCurve:
    """Normalized backward-integrated energy, values[0] == 1."""

    values: np.ndarray
    sample_rate: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)

    def in_db(self) -> np.ndarray:
        """10*log10 of the curve; zero entries map to -inf."""
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(self.values)


@dataclass(frozen=True)
class AcousticParams:
    """The three evaluation metrics for one RIR."""

    t60: float  # seconds
    drr: float  # dB
    edt: float  # seconds


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through an EDC region, in dB over seconds."""

    slope: float  # dB per second, negative
    intercept: float  # dB
    fit_range: tuple[float, float]  # (upper dB, lower dB)


def edc(rir: Signal) -> EnergyDecayCurve:
    """Schroeder backward integration, normalized to start at 1."""
    energy = rir.samples**2
    total = energy.sum()
    if total <= 0.0:
        raise RirlabError("degenerate RIR: zero energy")
    tail = np.cumsum(energy[::-1])[::-1]
    return EnergyDecayCurve(values=tail / total, sample_rate=rir.sample_rate)


def _fit_decay(curve: EnergyDecayCurve, upper_db: float, lower_db: float) -> DecayFit:
    """Fit a line to the dB curve where upper_db >= level >= lower_db."""
    db = curve.in_db()
    region = (db <= upper_db) & (db >= lower_db)
    if db.min() > lower_db or region.sum() < 2:
        raise RirlabError(
            f"insufficient decay: EDC does not cover [{upper_db}, {lower_db}] dB"
        )
    t = np.flatnonzero(region) / curve.sample_rate
    slope, intercept = np.polyfit(t, db[region], 1)
    if slope >= 0.0:
        raise RirlabError("insufficient decay: non-negative EDC slope in fit range")
    return DecayFit(slope=float(slope), intercept=float(intercept), fit_range=(upper_db, lower_db))


def estimate_t60(rir: Signal, decay_range: tuple[float, float] = T20_RANGE) -> float:
    """Reverberation time from the EDC slope over ``decay_range`` dB.

    The default window is [-5, -25] dB (T20); pass ``T30_RANGE`` for the
    [-5, -35] variant. Returns 60 / |slope| in seconds.
    """
    fit = _fit_decay(edc(rir), *decay_range)
    return 60.0 / abs(fit.slope)


def estimate_edt(rir: Signal) -> float:
    """Early decay time: six times the time to -10 dB along a [0, -10] dB fit."""
    fit = _fit_decay(edc(rir), 0.0, -10.0)
    t10 = (-10.0 - fit.intercept) / fit.slope
    return 6.0 * t10


def estimate_drr(rir: Signal) -> float:
    """Direct-to-reverberant ratio in dB, capped to +/-60.

    The direct window spans [peak - 0.5 ms, peak + 2.5 ms].
    """
    x = rir.samples
    total = float(np.dot(x, x))
    if total <= 0.0:
        raise RirlabError("degenerate RIR: zero energy")
    peak = int(np.argmax(np.abs(x)))
    lo = max(0, peak - round(DIRECT_WINDOW_BEFORE_S * rir.sample_rate))
    hi = min(x.size - 1, peak + round(DIRECT_WINDOW_AFTER_S * rir.sample_rate))
    direct = float(np.dot(x[lo : hi + 1], x[lo : hi + 1]))
    rest = total - direct
    if rest <= 0.0:
        return DRR_CAP_DB
    if direct <= 0.0:
        return -DRR_CAP_DB
    return float(np.clip(10.0 * np.log10(direct / rest), -DRR_CAP_DB, DRR_CAP_DB))


def analyze(rir: Signal, decay_range: tuple[float, float] = T20_RANGE) -> AcousticParams:
    """Compute T60, DRR and EDT for one RIR.

    The input is peak-normalized first; all three metrics are ratio or
    slope based, so this only guards the log steps against underflow.
    """
    peak = np.max(np.abs(rir.samples))
    if peak <= 0.0:
        raise RirlabError("degenerate RIR: zero energy")
    normed = Signal(samples=rir.samples / peak, sample_rate=rir.sample_rate)
    metrics = {}
    for name, fn in (
        ("t60", lambda s: estimate_t60(s, decay_range)),
        ("drr", estimate_drr),
        ("edt", estimate_edt),
    ):
        try:
            metrics[name] = fn(normed)
        except RirlabError as exc:
            raise RirlabError(f"{name}: {exc}") from exc
    return AcousticParams(**metrics)
