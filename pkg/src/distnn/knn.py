"""k nearest neighbour baseline with leave-one-out choice of k.

Deterministic tie policy throughout: neighbour ties at equal distance go to
the lower row index (stable argsort), vote ties go to the lowest class index,
and ties in leave-one-out error go to the smallest k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset


@dataclass(frozen=True)
class KnnConfig:
    k_max: int | None = None

    def __post_init__(self):
        if self.k_max is not None and self.k_max < 1:
            raise ValueError("k_max must be >= 1")


def default_k_max(n_train: int) -> int:
    """Half the training-set size, at least 1."""
    return max(1, n_train // 2)


def knn_classify(
    x_test: np.ndarray, data_train: Dataset, k: int
) -> np.ndarray:
    """Majority label among the k nearest training points, per test row."""
    if not 1 <= k <= data_train.n_observations:
        raise ValueError("k must be in [1, n_train]")
    x = np.atleast_2d(np.asarray(x_test, dtype=np.float64))
    dist = cdist(x, data_train.features)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    neighbour_labels = data_train.labels[order]
    out = np.empty(len(x), dtype=np.int64)
    for i, row in enumerate(neighbour_labels):
        votes = np.bincount(row - 1, minlength=data_train.n_classes)
        out[i] = np.argmax(votes) + 1
    return out


def loocv_errors(data: Dataset, k_max: int) -> np.ndarray:
    """Leave-one-out misclassification rate for each k in 1..k_max.

    Each row's own distance is masked with +inf so a point never votes for
    itself.  Cumulative one-hot counts over the sorted neighbour lists give
    all k values in one pass.
    """
    n = data.n_observations
    if n < 3:
        raise ValueError("leave-one-out selection needs at least 3 points")
    if not 1 <= k_max <= n - 1:
        raise ValueError("k_max must be in [1, n - 1]")
    dist = cdist(data.features, data.features)
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k_max]
    neighbour_labels = data.labels[order]
    onehot = np.zeros((n, k_max, data.n_classes))
    rows = np.repeat(np.arange(n), k_max)
    cols = np.tile(np.arange(k_max), n)
    onehot[rows, cols, neighbour_labels.ravel() - 1] = 1.0
    counts = np.cumsum(onehot, axis=1)
    predicted = np.argmax(counts, axis=2) + 1
    return np.mean(predicted != data.labels[:, None], axis=0)


def loocv_select_k(data: Dataset, k_max: int | None = None) -> tuple[int, np.ndarray]:
    """(best k, per-k error curve); smallest k wins on tied error."""
    if k_max is None:
        k_max = min(default_k_max(data.n_observations), data.n_observations - 1)
    errors = loocv_errors(data, k_max)
    return int(np.argmin(errors)) + 1, errors


def knn_test_errors(
    data_train: Dataset, x_test: np.ndarray, y_test: np.ndarray, k_max: int
) -> np.ndarray:
    """Held-out misclassification rate for each k in 1..k_max."""
    if not 1 <= k_max <= data_train.n_observations:
        raise ValueError("k_max must be in [1, n_train]")
    x = np.atleast_2d(np.asarray(x_test, dtype=np.float64))
    y_test = np.asarray(y_test, dtype=np.int64)
    dist = cdist(x, data_train.features)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k_max]
    neighbour_labels = data_train.labels[order]
    m = len(x)
    onehot = np.zeros((m, k_max, data_train.n_classes))
    rows = np.repeat(np.arange(m), k_max)
    cols = np.tile(np.arange(k_max), m)
    onehot[rows, cols, neighbour_labels.ravel() - 1] = 1.0
    counts = np.cumsum(onehot, axis=1)
    predicted = np.argmax(counts, axis=2) + 1
    return np.mean(predicted != y_test[:, None], axis=0)
