"""Bootstrap construction of a nested family of model confidence sets.

Given a loss matrix, models are removed one at a time: each round
computes every surviving model's average-loss deviation from the
surviving-set average, studentizes it with a moving-block bootstrap
variance, and eliminates the model with the largest statistic.  The
p-value recorded at each elimination (running-maxed so it is monotone in
elimination order) summarizes the whole family at once:

    set(beta) = { i : pvalue[i] >= beta }

which is nested in beta and always contains the final survivor
(pvalue exactly 1), so set(0) is the full candidate collection.
"""
from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .losses import LossMatrix
from .streams import derive_seed, substream

__all__ = [
    "BootstrapPlan",
    "ModelSetFamily",
    "block_bootstrap_indices",
    "default_block_len",
    "mcs_pvalues",
    "model_set",
    "beta_realized",
    "family_for_prefix",
]

# Floor on the bootstrap variance of a loss differential.  Zero-variance
# differentials (constant columns) then produce enormous t-statistics, so
# dominated constant-loss models are eliminated with step p-value 0.
VAR_FLOOR = 1e-12


@dataclass
class BootstrapPlan:
    """Pre-drawn moving-block bootstrap index sequences.

    Sequences are a pure function of (time_len, block_len, B, seed) --
    independent of the loss values and of the number of models, which is
    what makes column permutations act on p-values equivariantly.
    """

    B: int
    block_len: int
    seed: int
    time_len: int
    index_sequences: np.ndarray  # (B, time_len) of 1-based time indices


@dataclass
class ModelSetFamily:
    """Per-model elimination p-values at a given time, inducing all sets at once."""

    pvalues: np.ndarray
    m: int
    time_len: int


def default_block_len(time_len: int) -> int:
    """Cube-root rule, floored at 2 and capped at the sample length."""
    return min(time_len, max(2, int(round(time_len ** (1.0 / 3.0)))))


def block_bootstrap_indices(
    time_len: int, block_len: int, B: int, seed: int
) -> BootstrapPlan:
    """Draw B moving-block resample index sequences of length time_len.

    Each replicate concatenates blocks of block_len consecutive indices
    with uniformly drawn start points, truncating the final block.
    Replicate r is drawn from its own substream keyed by (seed, r), so
    replicates can be generated or consumed in any order.
    """
    if time_len < 1:
        raise ValueError(f"time_len must be >= 1, got {time_len}")
    if not 1 <= block_len <= time_len:
        raise ValueError(
            f"block_len must be in 1..time_len={time_len}, got {block_len}"
        )
    if B < 1:
        raise ValueError(f"B must be >= 1, got {B}")
    n_blocks = -(-time_len // block_len)
    hi = time_len - block_len + 1
    offsets = np.arange(block_len, dtype=np.int64)
    seqs = np.empty((B, time_len), dtype=np.int64)
    for r in range(B):
        starts = substream(seed, r).integers(1, hi + 1, size=n_blocks)
        seqs[r] = (starts[:, None] + offsets[None, :]).ravel()[:time_len]
    return BootstrapPlan(
        B=B, block_len=block_len, seed=seed, time_len=time_len, index_sequences=seqs
    )


def _replicate_means(
    values: np.ndarray, idx0: np.ndarray, workers: int
) -> np.ndarray:
    """Column means of values under each replicate's index sequence.

    Always computed one replicate at a time so the result is bit-identical
    whether replicates run sequentially or split across worker threads.
    """
    B = idx0.shape[0]
    out = np.empty((B, values.shape[1]))

    def fill(lo: int, hi: int) -> None:
        for r in range(lo, hi):
            out[r] = values[idx0[r]].mean(axis=0)

    if workers <= 1 or B == 1:
        fill(0, B)
    else:
        chunk = -(-B // workers)
        bounds = [(lo, min(lo + chunk, B)) for lo in range(0, B, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda ab: fill(*ab), bounds))
    return out


def mcs_pvalues(lm: LossMatrix, plan: BootstrapPlan, workers: int = 1) -> ModelSetFamily:
    """Sequential max-deviation elimination over all models.

    Per round, for each surviving model i: d[i] is its mean loss minus
    the surviving-set average of mean losses; the bootstrap variance of
    d[i] comes from the recentered replicate means; the largest
    studentized deviation is compared against the bootstrap null of the
    max statistic, the offender is eliminated (ties: lowest index), and
    its p-value is the running max of step p-values.  The last survivor
    gets p-value 1.
    """
    values = lm.values
    t, m = values.shape
    if plan.time_len != t:
        raise ValueError(
            f"plan covers {plan.time_len} periods but matrix has {t}"
        )
    if t < 1:
        raise ValueError("need at least one loss row")
    if m == 1:
        return ModelSetFamily(pvalues=np.ones(1), m=1, time_len=t)

    col_means = values.mean(axis=0)
    rep_means = _replicate_means(values, plan.index_sequences - 1, workers)

    pvals = np.empty(m)
    survivors = list(range(m))
    running = 0.0
    while len(survivors) > 1:
        sub = np.array(survivors)
        d = col_means[sub] - col_means[sub].mean()
        rsub = rep_means[:, sub]
        dev = (rsub - rsub.mean(axis=1, keepdims=True)) - d
        sd = np.sqrt(np.maximum((dev**2).mean(axis=0), VAR_FLOOR))
        tstat = d / sd
        worst = int(np.argmax(tstat))
        t_star = (dev / sd).max(axis=1)
        step_p = float(np.count_nonzero(t_star > tstat[worst])) / plan.B
        running = max(running, step_p)
        pvals[survivors[worst]] = running
        del survivors[worst]
    pvals[survivors[0]] = 1.0
    return ModelSetFamily(pvalues=pvals, m=m, time_len=t)


def model_set(fam: ModelSetFamily, beta: float) -> list[int]:
    """Sorted 1-based indices of models with p-value >= beta (nonempty for beta <= 1)."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    return [i + 1 for i in range(fam.m) if fam.pvalues[i] >= beta]


def beta_realized(fam: ModelSetFamily, model: int, grid) -> float:
    """Largest grid value beta with pvalue[model] >= beta.

    Equivalently the difficulty score of a realized best model: for any
    grid alpha, model in set(alpha) iff alpha <= beta_realized.
    """
    if not 1 <= model <= fam.m:
        raise ValueError(f"model index {model} out of range 1..{fam.m}")
    grid = list(grid)
    if not grid or grid[0] != 0.0:
        raise ValueError("grid must be nonempty and contain 0")
    p = float(fam.pvalues[model - 1])
    return grid[bisect_right(grid, p) - 1]


def family_for_prefix(
    lm: LossMatrix,
    t: int,
    B: int,
    seed: int,
    block_len: int | None = None,
    workers: int = 1,
) -> ModelSetFamily:
    """Family on rows 1..t with the plan substream keyed by (seed, t).

    This is the one canonical way a family is built from a prefix, shared
    by the online engine and the one-shot CLI so both see identical sets.
    """
    bl = min(t, block_len) if block_len is not None else default_block_len(t)
    plan = block_bootstrap_indices(t, bl, B, derive_seed(seed, t))
    return mcs_pvalues(lm.upto(t), plan, workers=workers)
