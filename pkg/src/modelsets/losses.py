"""Loss-matrix container and its CSV interchange format.

Row t of the matrix holds the losses of all m candidate models at time
period t (lower is better).  The CSV format is one header line of model
labels followed by one numeric row per period; it is the only boundary
through which externally computed losses enter the engine.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["LossMatrix", "ingest_csv", "append_row", "best_model", "write_csv"]


@dataclass
class LossMatrix:
    """Time-by-model matrix of finite real losses plus column labels."""

    values: np.ndarray
    labels: list[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("loss matrix must be 2-D (time x models)")
        m = self.values.shape[1]
        if m < 1:
            raise ValueError("loss matrix needs at least one model column")
        self.labels = [str(x) for x in self.labels]
        if len(self.labels) != m:
            raise ValueError(f"got {len(self.labels)} labels for {m} columns")
        if any(not lbl for lbl in self.labels):
            raise ValueError("model labels must be nonempty")
        if len(set(self.labels)) != m:
            raise ValueError("model labels must be distinct")
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValueError("loss matrix contains non-finite entries")

    @property
    def time_len(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_models(self) -> int:
        return int(self.values.shape[1])

    def upto(self, t: int) -> "LossMatrix":
        """View restricted to rows 1..t (1-based, inclusive)."""
        if not 1 <= t <= self.time_len:
            raise ValueError(f"time index {t} out of range 1..{self.time_len}")
        return LossMatrix(self.values[:t], self.labels)


def ingest_csv(path: str | Path) -> LossMatrix:
    """Parse a loss CSV: header of model labels, one numeric row per period.

    Errors carry 1-based line and column numbers.  Non-finite fields
    (nan/inf) are rejected even though float() would accept them.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            labels = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty loss file") from None
        m = len(labels)
        rows: list[list[float]] = []
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != m:
                raise ValueError(
                    f"{path}: line {lineno} has {len(raw)} fields, expected {m}"
                )
            row = []
            for col, field in enumerate(raw, start=1):
                try:
                    x = float(field)
                except ValueError:
                    raise ValueError(
                        f"{path}: non-numeric value {field!r} at line {lineno}, "
                        f"column {col}"
                    ) from None
                if not math.isfinite(x):
                    raise ValueError(
                        f"{path}: non-finite value {field!r} at line {lineno}, "
                        f"column {col}"
                    )
                row.append(x)
            rows.append(row)
    values = np.array(rows, dtype=float) if rows else np.empty((0, m))
    return LossMatrix(values, labels)


def write_csv(lm: LossMatrix, path: str | Path) -> None:
    """Write a loss matrix in the interchange format (shortest round-trip floats)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(lm.labels)
        for row in lm.values:
            writer.writerow([repr(float(x)) for x in row])


def append_row(lm: LossMatrix, row) -> LossMatrix:
    """New matrix with one more period; prior rows are unchanged."""
    row = np.asarray(row, dtype=float)
    if row.ndim != 1 or row.shape[0] != lm.n_models:
        raise ValueError(
            f"row has {row.size} entries, expected {lm.n_models}"
        )
    if not np.all(np.isfinite(row)):
        raise ValueError("appended row contains non-finite entries")
    return LossMatrix(np.vstack([lm.values, row[None, :]]), lm.labels)


def best_model(lm: LossMatrix, t: int) -> int:
    """1-based index of the loss-minimizing model in row t (ties: lowest index)."""
    if not 1 <= t <= lm.time_len:
        raise ValueError(f"time index {t} out of range 1..{lm.time_len}")
    return int(np.argmin(lm.values[t - 1])) + 1
