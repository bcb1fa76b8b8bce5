"""Class probabilities for held-out points.

A test point never enters the training field: its label's conditional given
the training labels uses one row of normalized kernel weights from the test
point to every training point.  Averaging that conditional over thinned
posterior draws of (beta, sigma) gives the ergodic predictive probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset
from .inference import PosteriorTrace
from .mrf import MrfParams
from .weights import WeightModel, log_kernel_value, normalize_log_rows


@dataclass
class PredictiveResult:
    probabilities: np.ndarray
    predicted_labels: np.ndarray
    n_samples: int


def _conditional_probs(
    dist_rows: np.ndarray, y_train: np.ndarray, beta: float, sigma: float,
    model: WeightModel, n_classes: int,
) -> np.ndarray:
    """Label probabilities for each test row given training labels at one
    (beta, sigma).  dist_rows has shape (m, n_train); weight rows are
    normalized in log space so extreme sigma values stay evaluable."""
    w = normalize_log_rows(log_kernel_value(model, dist_rows, sigma))
    onehot = np.zeros((len(y_train), n_classes))
    onehot[np.arange(len(y_train)), y_train - 1] = 1.0
    scores = beta * (w @ onehot)
    scores -= scores.max(axis=1, keepdims=True)
    p = np.exp(scores)
    return p / p.sum(axis=1, keepdims=True)


def predict_point_conditional(
    x_test: np.ndarray,
    data_train: Dataset,
    model: WeightModel,
    params: MrfParams,
) -> np.ndarray:
    """Single-parameter predictive distribution for one test point (G,)."""
    x = np.atleast_2d(np.asarray(x_test, dtype=np.float64))
    dist = cdist(x, data_train.features)
    return _conditional_probs(
        dist, data_train.labels, params.beta, params.sigma, model,
        data_train.n_classes,
    )[0]


def predict_ergodic(
    x_test_set: np.ndarray,
    data: Dataset,
    model: WeightModel,
    trace: PosteriorTrace,
    thin: int = 10,
) -> PredictiveResult:
    """Average the test-point conditional over every ``thin``-th post-burn-in
    draw.  Ties in the argmax go to the lowest class index."""
    if thin < 1:
        raise ValueError("thin must be >= 1")
    samples = trace.samples[::thin]
    if len(samples) == 0:
        raise ValueError("no post-burn-in samples available for prediction")
    x = np.atleast_2d(np.asarray(x_test_set, dtype=np.float64))
    dist = cdist(x, data.features)
    probs = np.zeros((len(x), data.n_classes))
    for beta, sigma in samples:
        probs += _conditional_probs(
            dist, data.labels, beta, sigma, model, data.n_classes
        )
    probs /= len(samples)
    predicted = np.argmax(probs, axis=1).astype(np.int64) + 1
    return PredictiveResult(
        probabilities=probs, predicted_labels=predicted, n_samples=len(samples)
    )


def misclassification_rate(predicted: np.ndarray, actual: np.ndarray) -> float:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError("label arrays must have matching shapes")
    if predicted.size == 0:
        raise ValueError("cannot score an empty prediction set")
    return float(np.mean(predicted != actual))
