"""Batch MAE evaluation of estimated RIRs against ground truth, with
distribution histograms for plot export."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .acoustics import analyze
from .concurrency import worker_count
from .data.wavio import read_wav
from .errors import RirlabError

MS = 1000.0


@dataclass(frozen=True)
class HistogramConfig:
    """Fixed-width binning ranges; values outside a range land in the
    nearest edge bin so counts always sum to the pair count."""

    bins: int = 20
    t60_range: tuple = (0.0, 2.0)  # seconds
    drr_range: tuple = (-30.0, 30.0)  # dB
    edt_range: tuple = (0.0, 2.0)  # seconds

    def __post_init__(self):
        if self.bins < 1:
            raise RirlabError("histogram needs at least one bin")
        for lo, hi in (self.t60_range, self.drr_range, self.edt_range):
            if not hi > lo:
                raise RirlabError("histogram range must be increasing")


@dataclass(frozen=True)
class MaeReport:
    """Per-metric mean absolute errors plus value distributions."""

    t60_mae_ms: float
    drr_mae_db: float
    edt_mae_ms: float
    count: int
    histograms: dict
    skipped: tuple = field(default=())

    def as_dict(self) -> dict:
        return {
            "schema": 1,
            "t60_mae_ms": self.t60_mae_ms,
            "drr_mae_db": self.drr_mae_db,
            "edt_mae_ms": self.edt_mae_ms,
            "count": self.count,
            "skipped": [dict(s) for s in self.skipped],
            "histograms": self.histograms,
        }


def _bin_counts(values, lo: float, hi: float, bins: int) -> list[int]:
    values = np.asarray(values, dtype=np.float64)
    width = (hi - lo) / bins
    idx = np.clip(np.floor((values - lo) / width).astype(int), 0, bins - 1)
    return np.bincount(idx, minlength=bins).tolist()


def _histogram(est_values, truth_values, lo, hi, bins) -> dict:
    edges = np.linspace(lo, hi, bins + 1).tolist()
    return {
        "edges": edges,
        "estimate": _bin_counts(est_values, lo, hi, bins),
        "truth": _bin_counts(truth_values, lo, hi, bins),
    }


def read_manifest(path) -> list[tuple[str, str]]:
    """Read an eval manifest CSV with an estimate_path,truth_path header."""
    path = Path(path)
    if not path.is_file():
        raise RirlabError(f"no such manifest: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != [
            "estimate_path",
            "truth_path",
        ]:
            raise RirlabError(
                f"{path}: manifest must start with an estimate_path,truth_path header"
            )
        return [(row["estimate_path"].strip(), row["truth_path"].strip()) for row in reader]


def evaluate_pairs(
    pairs,
    hist_cfg: HistogramConfig = HistogramConfig(),
    workers: int | None = None,
) -> MaeReport:
    """Analyze (estimate, truth) RIR file pairs and aggregate MAEs.

    Pairs that cannot be read or analyzed are recorded as skipped with a
    reason and excluded from the averages rather than failing the batch.
    """
    pairs = [(str(e), str(t)) for e, t in pairs]
    if not pairs:
        raise RirlabError("no pairs to evaluate")

    def one(pair):
        est_path, truth_path = pair
        try:
            est = analyze(read_wav(est_path))
            truth = analyze(read_wav(truth_path))
            return (est, truth, None)
        except RirlabError as exc:
            return (None, None, {"estimate": est_path, "truth": truth_path, "reason": str(exc)})

    n = worker_count(workers if workers is not None else len(pairs))
    if n <= 1 or len(pairs) <= 1:
        results = [one(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, pairs))

    est_params = [e for e, _, skip in results if skip is None]
    truth_params = [t for _, t, skip in results if skip is None]
    skipped = tuple(skip for _, _, skip in results if skip is not None)
    count = len(est_params)
    if count == 0:
        return MaeReport(
            t60_mae_ms=0.0, drr_mae_db=0.0, edt_mae_ms=0.0,
            count=0, histograms={}, skipped=skipped,
        )

    t60_err = [abs(e.t60 - t.t60) for e, t in zip(est_params, truth_params)]
    drr_err = [abs(e.drr - t.drr) for e, t in zip(est_params, truth_params)]
    edt_err = [abs(e.edt - t.edt) for e, t in zip(est_params, truth_params)]
    histograms = {
        "t60_ms": _histogram(
            [e.t60 * MS for e in est_params], [t.t60 * MS for t in truth_params],
            hist_cfg.t60_range[0] * MS, hist_cfg.t60_range[1] * MS, hist_cfg.bins,
        ),
        "drr_db": _histogram(
            [e.drr for e in est_params], [t.drr for t in truth_params],
            hist_cfg.drr_range[0], hist_cfg.drr_range[1], hist_cfg.bins,
        ),
        "edt_ms": _histogram(
            [e.edt * MS for e in est_params], [t.edt * MS for t in truth_params],
            hist_cfg.edt_range[0] * MS, hist_cfg.edt_range[1] * MS, hist_cfg.bins,
        ),
    }
    return MaeReport(
        t60_mae_ms=float(np.mean(t60_err)) * MS,
        drr_mae_db=float(np.mean(drr_err)),
        edt_mae_ms=float(np.mean(edt_err)) * MS,
        count=count,
        histograms=histograms,
        skipped=skipped,
    )


def histograms_to_csv(report: MaeReport, path) -> None:
    """Write the report's histograms as metric,source,bin_lo,bin_hi,count rows."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "source", "bin_lo", "bin_hi", "count"])
        for metric, hist in report.histograms.items():
            edges = hist["edges"]
            for source in ("estimate", "truth"):
                for i, count in enumerate(hist[source]):
                    writer.writerow([metric, source, edges[i], edges[i + 1], count])
