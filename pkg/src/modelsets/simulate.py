"""Synthetic loss streams: three designed matrices and an autoregressive
model-fitting experiment.

Designs (columns not listed are iid Uniform(0,2), the "similar
performance" baseline):

  a  every column Uniform(0,2);
  b  columns 1-2 alternate 25-step blocks of Uniform(0.5,1.5) and
     Uniform(1,2) within every 50 steps (blocks phased from t=1);
  c  column 1 is Uniform(mu_t, mu_t+1) with mu_t running 0 -> 1 -> 0 over
     the horizon (mean loss 0.5 -> 1.5 -> 0.5) and column 2 the mirror.

The fitting experiment generates Y_t = ar*Y_{t-1} + e_t + ma*e_{t-1}
with the moving-average term switched off after switch_point, then
scores AR(p) and MA(q) candidates by squared one-step-ahead forecast
error under expanding-window refits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import LossMatrix
from .streams import substream

__all__ = [
    "DesignSpec",
    "ArmaSpec",
    "gen_design",
    "gen_arma_series",
    "fit_ar",
    "fit_ma",
    "arma_experiment_losses",
    "ARMA_WARMUP",
]

ARMA_WARMUP = 50


@dataclass
class DesignSpec:
    design: str
    T: int
    m: int
    seed: int

    def __post_init__(self) -> None:
        if self.design not in ("a", "b", "c"):
            raise ValueError(f"unknown design {self.design!r}, expected a, b or c")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        least = 1 if self.design == "a" else 2
        if self.m < least:
            raise ValueError(
                f"design {self.design} needs at least {least} columns, got {self.m}"
            )
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass
class ArmaSpec:
    T: int
    seed: int
    switch_point: int = 1000
    ar_coef: float = 0.3
    ma_coef: float = 0.3
    ar_orders: tuple[int, ...] = (1, 2, 3, 4, 5)
    ma_orders: tuple[int, ...] = (1, 2, 3, 4, 5)

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not 1 <= self.switch_point <= self.T:
            raise ValueError(
                f"switch_point must be in 1..T={self.T}, got {self.switch_point}"
            )
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _tent_mu(t: np.ndarray, T: int) -> np.ndarray:
    # rises 0 -> 1 over the first half, falls back to 0 over the second
    return np.where(t <= T / 2, 2.0 * t / T, 2.0 * (T - t) / T)


def gen_design(spec: DesignSpec) -> LossMatrix:
    """Loss matrix for one design; column j draws from substream (seed, j)."""
    T, m = spec.T, spec.m
    t = np.arange(1, T + 1, dtype=float)
    values = np.empty((T, m))
    for j in range(1, m + 1):
        u = substream(spec.seed, j).uniform(size=T)
        if spec.design == "b" and j <= 2:
            phase = (np.arange(T) % 50) < 25
            lo = np.where(phase, 0.5, 1.0)
            values[:, j - 1] = lo + u
        elif spec.design == "c" and j == 1:
            values[:, j - 1] = _tent_mu(t, T) + u
        elif spec.design == "c" and j == 2:
            values[:, j - 1] = (1.0 - _tent_mu(t, T)) + u
        else:
            values[:, j - 1] = 2.0 * u
    return LossMatrix(values, [f"m{j}" for j in range(1, m + 1)])


def gen_arma_series(spec: ArmaSpec) -> np.ndarray:
    """Simulate the switching process from zero initial conditions."""
    eps = substream(spec.seed).standard_normal(spec.T)
    y = np.empty(spec.T)
    prev_y = 0.0
    prev_e = 0.0
    for i in range(spec.T):
        ma = spec.ma_coef * prev_e if (i + 1) <= spec.switch_point else 0.0
        y[i] = spec.ar_coef * prev_y + eps[i] + ma
        prev_y = y[i]
        prev_e = eps[i]
    return y


def _ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    coefs, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise ValueError("singular design matrix (degenerate series)")
    return coefs


def _lag_matrix(series: np.ndarray, order: int, upto: int) -> tuple[np.ndarray, np.ndarray]:
    # rows t = order+1..upto (1-based): regress Y_t on (1, Y_{t-1}..Y_{t-order})
    y = series[order:upto]
    X = np.ones((upto - order, order + 1))
    for k in range(1, order + 1):
        X[:, k] = series[order - k : upto - k]
    return X, y


def fit_ar(series: np.ndarray, p: int, upto: int) -> tuple[np.ndarray, float]:
    """OLS autoregression of order p on observations 1..upto.

    Returns (coefs, forecast): coefs[0] is the intercept, coefs[k] the
    lag-k weight, and forecast the implied one-step prediction of
    Y_{upto+1}.
    """
    series = np.asarray(series, dtype=float)
    if upto <= p + 10:
        raise ValueError(f"need upto > p+10 = {p + 10}, got {upto}")
    if upto > len(series):
        raise ValueError(f"upto={upto} exceeds series length {len(series)}")
    X, y = _lag_matrix(series, p, upto)
    coefs = _ols(X, y)
    frontier = np.concatenate(([1.0], series[upto - p : upto][::-1]))
    return coefs, float(frontier @ coefs)


def _long_ar_residuals(series: np.ndarray, h: int, upto: int) -> np.ndarray:
    """Residuals of an order-h autoregression; entries before t=h+1 are NaN."""
    X, y = _lag_matrix(series, h, upto)
    coefs = _ols(X, y)
    resid = np.full(upto, np.nan)
    resid[h:upto] = y - X @ coefs
    return resid


def _ma_from_residuals(
    series: np.ndarray, resid: np.ndarray, q: int, h: int, upto: int
) -> tuple[np.ndarray, float]:
    # regress Y_t on (1, e_{t-1}..e_{t-q}) over t = h+q+1..upto
    start = h + q
    y = series[start:upto]
    X = np.ones((upto - start, q + 1))
    for k in range(1, q + 1):
        X[:, k] = resid[start - k : upto - k]
    coefs = _ols(X, y)
    frontier = np.concatenate(([1.0], resid[upto - q : upto][::-1]))
    return coefs, float(frontier @ coefs)


def fit_ma(series: np.ndarray, q: int, upto: int) -> tuple[np.ndarray, float]:
    """Two-stage least-squares moving-average fit of order q.

    Stage 1 extracts innovations as residuals of a long autoregression
    (order max(10, 2q)); stage 2 regresses the series on its own lagged
    innovations.  Returns (coefs, forecast) like fit_ar.
    """
    series = np.asarray(series, dtype=float)
    if upto <= 4 * q + 20:
        raise ValueError(f"need upto > 4q+20 = {4 * q + 20}, got {upto}")
    if upto > len(series):
        raise ValueError(f"upto={upto} exceeds series length {len(series)}")
    h = max(10, 2 * q)
    resid = _long_ar_residuals(series, h, upto)
    return _ma_from_residuals(series, resid, q, h, upto)


def arma_experiment_losses(spec: ArmaSpec) -> LossMatrix:
    """Squared one-step forecast-error losses for all AR/MA candidates.

    Every candidate is refit on the expanding window 1..t-1 before
    forecasting Y_t; the first ARMA_WARMUP rows are filled with the
    losses of the first valid fit so the matrix has no gaps.
    """
    series = gen_arma_series(spec)
    T = spec.T
    labels = [f"ar{p}" for p in spec.ar_orders] + [f"ma{q}" for q in spec.ma_orders]
    n_models = len(labels)
    if T <= ARMA_WARMUP:
        raise ValueError(f"T must exceed the warm-up of {ARMA_WARMUP}, got {T}")
    values = np.empty((T, n_models))
    hs = sorted({max(10, 2 * q) for q in spec.ma_orders})
    for t in range(ARMA_WARMUP + 1, T + 1):
        upto = t - 1
        resid_by_h = {h: _long_ar_residuals(series, h, upto) for h in hs}
        col = 0
        for p in spec.ar_orders:
            _, yhat = fit_ar(series, p, upto)
            values[t - 1, col] = (series[t - 1] - yhat) ** 2
            col += 1
        for q in spec.ma_orders:
            h = max(10, 2 * q)
            _, yhat = _ma_from_residuals(series, resid_by_h[h], q, h, upto)
            values[t - 1, col] = (series[t - 1] - yhat) ** 2
            col += 1
    values[:ARMA_WARMUP] = values[ARMA_WARMUP]
    return LossMatrix(values, labels)


def write_series_csv(series: np.ndarray, path) -> None:
    """Single-column CSV ("y" header) for a simulated series."""
    with open(path, "w", newline="") as fh:
        fh.write("y\n")
        for x in series:
            fh.write(repr(float(x)) + "\n")
