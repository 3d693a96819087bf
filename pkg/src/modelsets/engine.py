"""Online observe-score-calibrate-emit loop over a loss stream.

Offline phase: on the training rows, realized difficulty scores are
backfilled by rebuilding the set family on each growing prefix, which
seeds the calibrator's rolling buffer.  Online phase, per new loss row t:

  1. score: the realized best model of row t is located in the family
     built on rows 1..t-1, yielding beta_{t-1} and resolving the
     previous record's coverage flag;
  2. rebuild: a fresh family on rows 1..t (new bootstrap plan keyed by
     (seed, t));
  3. calibrate: lambda integrates the miss signal, the rate is re-chosen
     over the grid against the updated buffer, then gated;
  4. emit: the set cut at the gated rate becomes this step's record.

Families are rebuilt from scratch each step; correctness over speed,
with replicate-level parallelism in the bootstrap as the lever.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .calibrate import (
    CalibratorState,
    MpsConfig,
    alpha_optimize,
    gate_alpha,
    lambda_update,
    push_beta,
)
from .losses import LossMatrix, append_row, best_model
from .mcs import ModelSetFamily, beta_realized, family_for_prefix, model_set

__all__ = [
    "StepRecord",
    "EngineState",
    "offline_init",
    "online_step",
    "run",
    "write_step_log",
    "read_step_log",
    "STEP_LOG_COLUMNS",
]

STEP_LOG_COLUMNS = (
    "t",
    "alpha",
    "lambda",
    "beta_prev",
    "cardinality",
    "set",
    "best_next",
    "covered",
)


@dataclass
class StepRecord:
    """One online step's output; best_next/covered stay None on the live frontier."""

    t: int
    alpha: float
    lam: float
    beta_prev: float
    emitted_set: tuple[int, ...]
    cardinality: int
    best_next: int | None = None
    covered: bool | None = None


@dataclass
class EngineState:
    lm: LossMatrix
    cal: CalibratorState
    family: ModelSetFamily
    config: MpsConfig
    records: list[StepRecord]


def _family(lm: LossMatrix, t: int, config: MpsConfig, workers: int) -> ModelSetFamily:
    return family_for_prefix(
        lm, t, config.B, config.seed,
        block_len=config.block_len_override, workers=workers,
    )


def offline_init(
    L_train: LossMatrix, config: MpsConfig, *, workers: int = 1
) -> EngineState:
    """Backfill the difficulty buffer on training rows and prime the state.

    For each t in the trailing tau-1 training steps, the family on rows
    1..t-1 scores the realized best of row t.  The buffer is padded to
    length tau with a leading duplicate of the earliest score (one fewer
    score than the buffer holds is computable from n training rows).
    lambda starts at lambda_max/2 and the rate at alpha_bar.
    """
    n = L_train.time_len
    tau = config.tau
    if n < 2:
        raise ValueError(f"need at least 2 training rows, got {n}")
    if n < tau:
        raise ValueError(f"training length {n} is below tau={tau}")

    ts = range(n - tau + 2, n + 1) if tau >= 2 else range(n, n + 1)
    betas: list[float] = []
    for t in ts:
        m_t = best_model(L_train, t)
        fam_prev = _family(L_train, t - 1, config, workers)
        betas.append(beta_realized(fam_prev, m_t, config.grid))
    buffer = tuple(betas) if len(betas) == tau else (betas[0],) + tuple(betas)

    cal = CalibratorState(
        lam=config.lambda_max / 2.0, alpha=config.alpha_bar, beta_buffer=buffer
    )
    fam_n = _family(L_train, n, config, workers)
    return EngineState(lm=L_train, cal=cal, family=fam_n, config=config, records=[])


def online_step(
    state: EngineState, new_row, *, workers: int = 1
) -> tuple[EngineState, StepRecord]:
    """Consume one new loss row and emit the next prediction set."""
    cfg = state.config
    lm = append_row(state.lm, new_row)
    t = lm.time_len

    m_t = best_model(lm, t)
    beta_prev = beta_realized(state.family, m_t, cfg.grid)
    alpha_prev = state.cal.alpha
    missed = alpha_prev > beta_prev

    if state.records:
        last = state.records[-1]
        last.best_next = m_t
        last.covered = not missed

    fam = _family(lm, t, cfg, workers)
    lam = lambda_update(state.cal.lam, missed, cfg.gamma, cfg.alpha_bar)
    cal = push_beta(state.cal, beta_prev)

    cards = {a: len(model_set(fam, a)) for a in cfg.grid}
    alpha_star = alpha_optimize(cards, cal.beta_buffer, lam, cfg.alpha_bar, cfg.grid)
    alpha = gate_alpha(alpha_star, lam, cfg.lambda_max)

    emitted = tuple(model_set(fam, alpha))
    record = StepRecord(
        t=t,
        alpha=float(alpha),
        lam=float(lam),
        beta_prev=float(beta_prev),
        emitted_set=emitted,
        cardinality=len(emitted),
    )
    state.records.append(record)
    new_state = EngineState(
        lm=lm,
        cal=CalibratorState(lam=float(lam), alpha=float(alpha), beta_buffer=cal.beta_buffer),
        family=fam,
        config=cfg,
        records=state.records,
    )
    return new_state, record


def run(
    L_full: LossMatrix,
    config: MpsConfig,
    *,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[StepRecord]:
    """Offline init on the first train_n rows, then one online step per
    remaining row.  The last record's coverage flag stays unresolved."""
    n = config.train_n
    if L_full.time_len <= n:
        raise ValueError(
            f"need more than train_n={n} rows, got {L_full.time_len}"
        )
    state = offline_init(L_full.upto(n), config, workers=workers)
    total = L_full.time_len - n
    for i, t in enumerate(range(n + 1, L_full.time_len + 1), start=1):
        state, _ = online_step(state, L_full.values[t - 1], workers=workers)
        if progress is not None:
            progress(i, total)
    return state.records


def write_step_log(records: Iterable[StepRecord], path: str | Path) -> None:
    """Serialize records as CSV in the fixed column order; NA marks
    unresolved frontier fields."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(STEP_LOG_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.t,
                    repr(float(r.alpha)),
                    repr(float(r.lam)),
                    repr(float(r.beta_prev)),
                    r.cardinality,
                    ";".join(str(i) for i in r.emitted_set),
                    "NA" if r.best_next is None else r.best_next,
                    "NA" if r.covered is None else int(r.covered),
                ]
            )


def read_step_log(path: str | Path) -> list[StepRecord]:
    path = Path(path)
    records: list[StepRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(STEP_LOG_COLUMNS):
            raise ValueError(f"{path}: unexpected step-log header {header}")
        for lineno, raw in enumerate(reader, start=2):
            if len(raw) != len(STEP_LOG_COLUMNS):
                raise ValueError(f"{path}: line {lineno} has {len(raw)} fields")
            t, alpha, lam, beta_prev, card, set_s, best_next, covered = raw
            emitted = tuple(int(i) for i in set_s.split(";")) if set_s else ()
            records.append(
                StepRecord(
                    t=int(t),
                    alpha=float(alpha),
                    lam=float(lam),
                    beta_prev=float(beta_prev),
                    emitted_set=emitted,
                    cardinality=int(card),
                    best_next=None if best_next == "NA" else int(best_next),
                    covered=None if covered == "NA" else bool(int(covered)),
                )
            )
    return records
