"""Feedback calibration of the nominal miscoverage rate.

The penalty weight lambda integrates the miss/cover error signal
(a miss raises it by gamma*(1 - target), a cover lowers it by
gamma*target), and the emitted rate is the grid value minimizing
empirical set cardinality plus lambda-weighted miss frequency over the
recent history of realized difficulty scores.  lambda is deliberately
never clipped below zero: a negative value turns the penalty into a
reward for aggressive rates, which is what pulls coverage back down
toward the target after an over-covered stretch.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

__all__ = [
    "MpsConfig",
    "CalibratorState",
    "grid_from_step",
    "lambda_update",
    "alpha_cost",
    "alpha_optimize",
    "gate_alpha",
    "push_beta",
]


def grid_from_step(step: float = 0.05) -> tuple[float, ...]:
    """Grid {k/n : k=0..n-1} with n = round(1/step); covers [0, 1).

    Points are formed by exact division so a p-value computed as
    count/B lands exactly on its grid double (15/100 == 3/20).
    """
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step must be in (0, 1], got {step}")
    n = round(1.0 / step)
    if n < 1:
        raise ValueError(f"grid step {step} yields no grid points")
    return tuple(k / n for k in range(n))


@dataclass
class MpsConfig:
    """All engine tunables; gamma is always derived as c * lambda_max."""

    train_n: int
    seed: int
    alpha_bar: float = 0.2
    lambda_max: float = 2000.0
    c: float = 0.2
    tau: int = 100
    B: int = 100
    grid: tuple[float, ...] = field(default_factory=grid_from_step)
    block_len_override: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha_bar < 1.0:
            raise ValueError(f"alpha_bar must be in (0, 1), got {self.alpha_bar}")
        if self.lambda_max <= 0:
            raise ValueError(f"lambda_max must be positive, got {self.lambda_max}")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"c must be in (0, 1), got {self.c}")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if self.train_n < self.tau:
            raise ValueError(
                f"train_n ({self.train_n}) must be >= tau ({self.tau})"
            )
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")
        grid = tuple(float(g) for g in self.grid)
        if not grid or grid[0] != 0.0:
            raise ValueError("grid must contain 0 as its first point")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly ascending")
        if grid[-1] >= 1.0:
            raise ValueError("grid values must lie in [0, 1)")
        if self.block_len_override is not None and self.block_len_override < 1:
            raise ValueError("block_len_override must be >= 1")
        self.grid = grid

    @property
    def gamma(self) -> float:
        return self.c * self.lambda_max


@dataclass
class CalibratorState:
    """Penalty weight, last emitted (gated) rate, and the rolling difficulty buffer."""

    lam: float
    alpha: float
    beta_buffer: tuple[float, ...]


def lambda_update(
    lambda_prev: float, missed: bool, gamma: float, alpha_bar: float
) -> float:
    """One integral-control step; unclipped, so negative values are allowed."""
    return lambda_prev + gamma * ((1.0 if missed else 0.0) - alpha_bar)


def alpha_cost(
    cardinality_by_alpha: Mapping[float, int],
    beta_history: Sequence[float],
    lam: float,
    alpha_bar: float,
    alpha: float,
) -> float:
    """Empirical cost of emitting at rate alpha.

    Set cardinality plus lam*(1-alpha_bar) times the fraction of recent
    difficulty scores strictly below alpha; the inner
    max[1(alpha > beta) - alpha_bar, 0] collapses to
    (1 - alpha_bar) * 1(alpha > beta) because alpha_bar < 1.
    """
    if alpha not in cardinality_by_alpha:
        raise ValueError(f"alpha {alpha} is not on the grid")
    misses = sum(1 for b in beta_history if b < alpha)
    frac = misses / len(beta_history)
    return cardinality_by_alpha[alpha] + lam * (1.0 - alpha_bar) * frac


def alpha_optimize(
    cardinality_by_alpha: Mapping[float, int],
    beta_history: Sequence[float],
    lam: float,
    alpha_bar: float,
    grid: Sequence[float],
) -> float:
    """Grid value minimizing alpha_cost; ties go to the LARGEST alpha
    (prefer the more informative, smaller set at equal cost)."""
    if not grid:
        raise ValueError("empty grid")
    best_alpha = None
    best_cost = None
    for alpha in grid:
        cost = alpha_cost(cardinality_by_alpha, beta_history, lam, alpha_bar, alpha)
        if best_cost is None or cost <= best_cost:
            best_alpha, best_cost = alpha, cost
    return best_alpha


def gate_alpha(alpha_star: float, lam: float, lambda_max: float) -> float:
    """Emit 0 (the safeguard: full candidate set) once lam reaches lambda_max."""
    return alpha_star if lam < lambda_max else 0.0


def push_beta(state: CalibratorState, beta: float) -> CalibratorState:
    """Evict the oldest difficulty score and append the newest."""
    if not state.beta_buffer:
        raise ValueError("beta buffer is uninitialized")
    return replace(state, beta_buffer=state.beta_buffer[1:] + (float(beta),))
