"""Evaluation summaries over a resolved step log.

All series are trailing-window statistics aligned with the log; partial
windows at the start use whatever history exists, so every step has a
value.  Quality sets are the minimum-cardinality emitted sets within a
short trailing window, the procedure's best-case sharpness measure.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .engine import StepRecord
from .losses import LossMatrix

__all__ = [
    "ReportRow",
    "moving_miscoverage",
    "quality_sets",
    "loss_ranges",
    "build_report",
    "write_report",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = (
    "t",
    "miscoverage_w100",
    "mean_cardinality_w100",
    "min_cardinality_w20",
    "quality_set",
    "loss_min",
    "loss_max",
    "quality_mean_loss",
)


@dataclass
class ReportRow:
    t: int
    miscoverage_w100: float
    mean_cardinality_w100: float
    min_cardinality_w20: int
    quality_set: tuple[int, ...]
    loss_min: float
    loss_max: float
    quality_mean_loss: float


def _check_resolved(records: Sequence[StepRecord]) -> None:
    if not records:
        raise ValueError("empty step log")
    for r in records:
        if r.covered is None:
            raise ValueError(f"unresolved record at t={r.t}; drop the frontier first")


def _trailing_mean(x: np.ndarray, window: int) -> np.ndarray:
    cs = np.concatenate(([0.0], np.cumsum(x)))
    out = np.empty(len(x))
    for k in range(len(x)):
        lo = max(0, k + 1 - window)
        out[k] = (cs[k + 1] - cs[lo]) / (k + 1 - lo)
    return out


def moving_miscoverage(records: Sequence[StepRecord], window: int = 100) -> np.ndarray:
    """Trailing fraction of misses; window 1 gives the raw indicators."""
    _check_resolved(records)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    miss = np.array([0.0 if r.covered else 1.0 for r in records])
    return _trailing_mean(miss, window)


def _quality_origins(records: Sequence[StepRecord], window: int) -> list[int]:
    origins = []
    for k in range(len(records)):
        lo = max(0, k + 1 - window)
        best = lo
        for j in range(lo, k + 1):
            if records[j].cardinality < records[best].cardinality:
                best = j
        origins.append(best)
    return origins


def quality_sets(
    records: Sequence[StepRecord], window: int = 20
) -> list[tuple[int, tuple[int, ...]]]:
    """Trailing-window minimum cardinality and the achieving set
    (earliest step wins ties)."""
    if not records:
        raise ValueError("empty step log")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    return [
        (records[j].cardinality, tuple(records[j].emitted_set))
        for j in _quality_origins(records, window)
    ]


def loss_ranges(
    records: Sequence[StepRecord],
    lm: LossMatrix,
    window: int = 100,
    quality_window: int = 20,
) -> list[tuple[float, float, float]]:
    """Window-averaged (min, max, quality-set mean) losses of the
    emitted candidates at each step."""
    if not records:
        raise ValueError("empty step log")
    if records[-1].t > lm.time_len or records[0].t < 1:
        raise ValueError(
            f"step log spans t={records[0].t}..{records[-1].t} but the loss "
            f"matrix has {lm.time_len} rows"
        )
    rmin = np.empty(len(records))
    rmax = np.empty(len(records))
    for k, r in enumerate(records):
        row = lm.values[r.t - 1]
        sel = [i - 1 for i in r.emitted_set]
        rmin[k] = row[sel].min()
        rmax[k] = row[sel].max()
    qmean = np.empty(len(records))
    for k, j in enumerate(_quality_origins(records, quality_window)):
        origin = records[j]
        row = lm.values[origin.t - 1]
        qmean[k] = row[[i - 1 for i in origin.emitted_set]].mean()
    mins = _trailing_mean(rmin, window)
    maxs = _trailing_mean(rmax, window)
    qmeans = _trailing_mean(qmean, window)
    return [(float(a), float(b), float(c)) for a, b, c in zip(mins, maxs, qmeans)]


def build_report(
    records: Sequence[StepRecord],
    lm: LossMatrix,
    window: int = 100,
    quality_window: int = 20,
) -> list[ReportRow]:
    _check_resolved(records)
    misc = moving_miscoverage(records, window)
    card = _trailing_mean(np.array([float(r.cardinality) for r in records]), window)
    quality = quality_sets(records, quality_window)
    ranges = loss_ranges(records, lm, window, quality_window)
    return [
        ReportRow(
            t=r.t,
            miscoverage_w100=float(misc[k]),
            mean_cardinality_w100=float(card[k]),
            min_cardinality_w20=quality[k][0],
            quality_set=quality[k][1],
            loss_min=ranges[k][0],
            loss_max=ranges[k][1],
            quality_mean_loss=ranges[k][2],
        )
        for k, r in enumerate(records)
    ]


def write_report(rows: Sequence[ReportRow], path: str | Path, force: bool = False) -> None:
    """Write the report CSV; refuses to overwrite unless force is set."""
    path = Path(path)
    if path.exists() and not force:
        raise ValueError(f"{path} exists; pass force to overwrite")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.t,
                    repr(r.miscoverage_w100),
                    repr(r.mean_cardinality_w100),
                    r.min_cardinality_w20,
                    ";".join(str(i) for i in r.quality_set),
                    repr(r.loss_min),
                    repr(r.loss_max),
                    repr(r.quality_mean_loss),
                ]
            )
