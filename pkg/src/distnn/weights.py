"""Pairwise influence weights: distance kernels and row-normalized weight matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DNN1 = "dnn1"  # Gaussian kernel exp(-d^2 / (2 sigma^2))
DNN2 = "dnn2"  # ball indicator eps + (1 - eps) * I(d < sigma)
DNN3 = "dnn3"  # exponential kernel exp(-d * sigma)

MODEL_KINDS = (DNN1, DNN2, DNN3)


@dataclass(frozen=True)
class WeightModel:
    """Kernel family selector; ``epsilon`` is only used by dnn2."""

    kind: str
    epsilon: float = 1e-10

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown weight model {self.kind!r}, expected one of {MODEL_KINDS}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie strictly in (0, 1)")


def _check_sigma(model: WeightModel, sigma: float) -> None:
    if model.kind == DNN3:
        if sigma < 0:
            raise ValueError(f"{model.kind} requires sigma >= 0, got {sigma}")
    elif sigma <= 0:
        raise ValueError(f"{model.kind} requires sigma > 0, got {sigma}")


def log_kernel_value(model: WeightModel, distance, sigma: float):
    """Log of the unnormalized kernel (scalar or array).

    dnn1: -d^2 / (2 sigma^2), sigma > 0
    dnn2: log(eps + (1 - eps) * I(d < sigma)), sigma > 0
    dnn3: -d * sigma, sigma >= 0

    Exact (no exp/log round trip) for dnn1 and dnn3, which lets row
    normalization run in log space and stay finite at small sigma where the
    kernels themselves underflow double precision.
    """
    _check_sigma(model, sigma)
    d = np.asarray(distance, dtype=np.float64)
    if model.kind == DNN1:
        out = -(d * d) / (2.0 * sigma * sigma)
    elif model.kind == DNN2:
        # inside the ball the kernel is eps + (1 - eps) = 1 exactly
        out = np.where(d < sigma, 0.0, np.log(model.epsilon))
    else:
        out = -d * sigma
    if np.ndim(distance) == 0:
        return float(out)
    return out


def kernel_value(model: WeightModel, distance, sigma: float):
    """Unnormalized kernel value for a distance (scalar or array).

    dnn1: exp(-d^2 / (2 sigma^2)), sigma > 0
    dnn2: eps + (1 - eps) * I(d < sigma), sigma > 0
    dnn3: exp(-d * sigma), sigma >= 0
    """
    _check_sigma(model, sigma)
    d = np.asarray(distance, dtype=np.float64)
    if model.kind == DNN2:
        out = model.epsilon + (1.0 - model.epsilon) * (d < sigma)
    else:
        out = np.exp(log_kernel_value(model, d, sigma))
    if np.ndim(distance) == 0:
        return float(out)
    return out


def normalize_log_rows(log_kern: np.ndarray) -> np.ndarray:
    """exp-normalize each row to sum to 1, shifting by the row max first.

    Rows whose largest log value is -inf have no representable mass and
    raise; with finite entries the shifted max is exp(0) = 1 so row sums are
    always positive.
    """
    log_kern = np.asarray(log_kern, dtype=np.float64)
    row_max = log_kern.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(row_max)):
        bad = int(np.argmin(np.isfinite(row_max).ravel()))
        raise ValueError(f"all kernel values in row {bad} underflowed to zero")
    shifted = np.exp(log_kern - row_max)
    return shifted / shifted.sum(axis=1, keepdims=True)


def compute_weights(model: WeightModel, distances: np.ndarray, sigma: float) -> np.ndarray:
    """Row-normalized weight matrix from a symmetric distance matrix.

    w[i, j] = k(d[i, j]) / sum_{l != i} k(d[i, l]); the diagonal is zero and
    every row sums to 1.  The unnormalized kernel inherits the symmetry of
    the distance matrix; normalization per row then makes w itself
    asymmetric in general.  Normalization happens in log space so small
    sigma degrades gracefully toward nearest-neighbour-only weights instead
    of tripping exp underflow.
    """
    d = np.asarray(distances, dtype=np.float64)
    n = d.shape[0]
    if d.shape != (n, n) or n < 2:
        raise ValueError("distances must be a square matrix with n >= 2")
    if not np.array_equal(d, d.T):
        raise ValueError("distance matrix must be exactly symmetric")
    log_kern = log_kernel_value(model, d, sigma)
    np.fill_diagonal(log_kern, -np.inf)
    w = normalize_log_rows(log_kern)
    np.fill_diagonal(w, 0.0)
    return w
