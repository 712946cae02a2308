"""Autoregressive baseline and forecast error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ORDER = 5


@dataclass(frozen=True)
class ARModel:
    coefficients: tuple[float, ...]  # a_1 .. a_p, a_1 multiplies the most recent value
    intercept: float = 0.0

    @property
    def order(self) -> int:
        return len(self.coefficients)


def ar_fit(series, order: int = DEFAULT_ORDER) -> ARModel:
    """Least-squares fit of x_t = c + sum_j a_j x_{t-j}; minimum-norm when rank deficient."""
    x = np.asarray(series, dtype=float).ravel()
    if order < 1:
        raise ValueError("AR order must be >= 1")
    if x.size <= order + 1:
        raise ValueError(f"series of length {x.size} is too short for AR({order})")
    n = x.size - order
    design = np.ones((n, order + 1))
    for j in range(1, order + 1):
        design[:, j] = x[order - j: x.size - j]
    theta, *_ = np.linalg.lstsq(design, x[order:], rcond=None)
    return ARModel(tuple(float(a) for a in theta[1:]), float(theta[0]))


def ar_predict(model: ARModel, window) -> float:
    w = np.asarray(window, dtype=float).ravel()
    if w.size < model.order:
        raise ValueError(f"AR({model.order}) needs at least {model.order} recent values")
    recent = w[::-1][: model.order]
    return float(model.intercept + np.dot(model.coefficients, recent))


def ar_one_step(model: ARModel, series, start: int) -> np.ndarray:
    """One-step forecasts of series[start:] from true lagged values."""
    x = np.asarray(series, dtype=float).ravel()
    if start < model.order:
        raise ValueError("start leaves too few lagged values")
    a = np.asarray(model.coefficients)
    out = np.full(x.size - start, model.intercept)
    for j in range(1, model.order + 1):
        out += a[j - 1] * x[start - j: x.size - j]
    return out


def error_metrics(predictions, truths) -> dict:
    """MSE, RMSE and MAE per dimension, then averaged over dimensions."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.shape[0] == 0:
        raise ValueError("no samples")
    if p.ndim == 1:
        p, t = p[:, None], t[:, None]
    err = p - t
    mse = np.mean(err * err, axis=0)
    mae = np.mean(np.abs(err), axis=0)
    rmse = np.sqrt(mse)
    return {
        "mse": float(mse.mean()),
        "rmse": float(rmse.mean()),
        "mae": float(mae.mean()),
        "per_dim": {"mse": mse.tolist(), "rmse": rmse.tolist(), "mae": mae.tolist()},
    }


def relative_improvement(baseline_err: float, method_err: float) -> float:
    if not baseline_err > 0:
        raise ValueError("baseline error must be positive")
    return (baseline_err - method_err) / baseline_err
