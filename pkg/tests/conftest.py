"""Shared fixtures: benchmark CSVs and small random instances."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.spatial.distance import pdist, squareform

from distnn.data import Dataset


def write_benchmark_csv(path, bunch) -> None:
    names = [
        name.replace(" (cm)", "").replace(" ", "_").replace("/", "_")
        for name in bunch.feature_names
    ]
    lines = [",".join(names + ["label"])]
    for row, target in zip(bunch.data, bunch.target):
        values = [format(v, ".17g") for v in row]
        lines.append(",".join(values + [str(bunch.target_names[target])]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory):
    from sklearn.datasets import load_iris

    path = tmp_path_factory.mktemp("bench") / "iris.csv"
    write_benchmark_csv(path, load_iris())
    return path


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    from sklearn.datasets import load_wine

    path = tmp_path_factory.mktemp("bench") / "wine.csv"
    write_benchmark_csv(path, load_wine())
    return path


def random_points_distances(rng: np.random.Generator, n: int, spread: float = 1.0):
    """Feature matrix and its exactly-symmetric Euclidean distance matrix."""
    points = spread * rng.normal(size=(n, 2))
    return points, squareform(pdist(points))


def random_instance(seed: int, n: int, n_classes: int):
    """Deterministic small instance: (labels, distances) from one seed."""
    rng = np.random.default_rng(seed)
    _, distances = random_points_distances(rng, n)
    labels = rng.integers(1, n_classes + 1, size=n).astype(np.int64)
    # every class present keeps class-count invariants simple
    labels[:n_classes] = np.arange(1, n_classes + 1)
    return labels, distances


def make_dataset(rng: np.random.Generator, n: int, n_classes: int, n_features: int = 2) -> Dataset:
    features = rng.normal(size=(n, n_features))
    labels = rng.integers(1, n_classes + 1, size=n).astype(np.int64)
    labels[:n_classes] = np.arange(1, n_classes + 1)
    return Dataset(features=features, labels=labels, n_classes=n_classes)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
