"""Dataset loading, standardization, train/test splitting, and pairwise distances."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import pdist, squareform

SPLIT_RETRY_LIMIT = 1000


@dataclass
class Dataset:
    """Feature matrix with integer class labels.

    features : (N, F) float array.
    labels   : (N,) int array with values in {1, ..., n_classes}.
    class_names : original label strings, index g-1 holds the name of class g.
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    class_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d array")
        n, f = self.features.shape
        if n < 2:
            raise ValueError(f"need at least 2 observations, got {n}")
        if f < 1:
            raise ValueError("need at least 1 feature column")
        if self.labels.shape != (n,):
            raise ValueError("labels length must match number of rows")
        if self.n_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.n_classes}")
        if self.labels.min() < 1 or self.labels.max() > self.n_classes:
            raise ValueError("labels must lie in {1, ..., n_classes}")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if self.class_names is not None and len(self.class_names) != self.n_classes:
            raise ValueError("class_names length must equal n_classes")

    @property
    def n_observations(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass
class Split:
    """Disjoint train/test row indices covering a dataset."""

    train_indices: np.ndarray
    test_indices: np.ndarray

    def __post_init__(self):
        self.train_indices = np.asarray(self.train_indices, dtype=np.int64)
        self.test_indices = np.asarray(self.test_indices, dtype=np.int64)


def validate_split(split: Split, data: Dataset) -> None:
    """Check that a split is disjoint, covers all rows, and its train part sees every class."""
    n = data.n_observations
    combined = np.concatenate([split.train_indices, split.test_indices])
    if len(np.unique(combined)) != len(combined):
        raise ValueError("train and test indices overlap")
    if not np.array_equal(np.sort(combined), np.arange(n)):
        raise ValueError("split does not cover all rows exactly once")
    if split.train_indices.size == 0:
        raise ValueError("train set is empty")
    present = np.unique(data.labels[split.train_indices])
    if len(present) != data.n_classes:
        raise ValueError("train set does not contain every class")


def load_csv(path: str | Path, label_column: str | int) -> Dataset:
    """Load a dataset from a headed CSV file.

    Expects one header row, one observation per row, comma separation, all
    non-label columns numeric.  The label column may be named (string) or
    given as a 0-based column index.  Label values are mapped to integer
    classes 1..G in order of first appearance; the original strings are kept
    in ``class_names``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: file is empty")
    header = [h.strip() for h in rows[0]]
    if isinstance(label_column, str):
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not 0 <= label_idx < len(header):
            raise ValueError(f"{path}: label column index {label_idx} out of range")

    feature_cols = [c for c in range(len(header)) if c != label_idx]
    features = []
    raw_labels = []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        vals = []
        for c in feature_cols:
            try:
                vals.append(float(row[c]))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric feature value {row[c]!r} at row {r}, "
                    f"column {header[c]!r}"
                ) from None
        features.append(vals)
        raw_labels.append(row[label_idx].strip())
    if not features:
        raise ValueError(f"{path}: no data rows")

    class_names: list[str] = []
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, name in enumerate(raw_labels):
        if name not in class_names:
            class_names.append(name)
        labels[i] = class_names.index(name) + 1

    return Dataset(
        features=np.asarray(features, dtype=np.float64),
        labels=labels,
        n_classes=len(class_names),
        class_names=class_names,
    )


def standardize(data: Dataset, reference: Split) -> Dataset:
    """Transform every column to zero mean and unit variance.

    Means and standard deviations (denominator n-1) are computed over the
    training rows of ``reference`` only and applied to all rows, so test rows
    never influence the statistics.  Columns that are constant over the
    training rows fall back to sd = 1 and become all zeros.
    """
    train = reference.train_indices
    ref = data.features[train]
    mean = ref.mean(axis=0)
    if train.size < 2:
        sd = np.ones(data.n_features)
    else:
        sd = ref.std(axis=0, ddof=1)
        sd = np.where(sd == 0.0, 1.0, sd)
    return Dataset(
        features=(data.features - mean) / sd,
        labels=data.labels.copy(),
        n_classes=data.n_classes,
        class_names=list(data.class_names) if data.class_names is not None else None,
    )


def pairwise_distances(data: Dataset) -> np.ndarray:
    """Euclidean distance matrix (N, N): exactly symmetric, zero diagonal.

    Each unordered pair is computed once and mirrored, so d[i, j] == d[j, i]
    holds bit-for-bit.
    """
    return squareform(pdist(data.features, metric="euclidean"))


def split_dataset(data: Dataset, train_fraction: float, seed: int) -> Split:
    """Random train/test split with roughly ``train_fraction`` of rows in train.

    Resamples (up to SPLIT_RETRY_LIMIT times) until the train part contains
    every class; deterministic for a fixed seed.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = data.n_observations
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    rng = np.random.default_rng(seed)
    for _ in range(SPLIT_RETRY_LIMIT):
        perm = rng.permutation(n)
        train = np.sort(perm[:n_train])
        if len(np.unique(data.labels[train])) == data.n_classes:
            return Split(train_indices=train, test_indices=np.sort(perm[n_train:]))
    raise ValueError(
        f"could not draw a train set covering all {data.n_classes} classes "
        f"in {SPLIT_RETRY_LIMIT} attempts (train size {n_train})"
    )


def subset(data: Dataset, indices: np.ndarray) -> Dataset:
    """Row subset as a new Dataset; class count and names are preserved."""
    return Dataset(
        features=data.features[indices],
        labels=data.labels[indices],
        n_classes=data.n_classes,
        class_names=list(data.class_names) if data.class_names is not None else None,
    )


def class_proportions(
    labels: np.ndarray, n_classes: int, exclude: int | None = None
) -> np.ndarray:
    """Per-class fraction of labels, optionally leaving out one index.

    Returns a length-G vector summing to 1; entry g-1 is the proportion of
    class g among the remaining labels.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if exclude is not None:
        labels = np.delete(labels, exclude)
    if labels.size == 0:
        raise ValueError("no labels remain after exclusion")
    counts = np.bincount(labels - 1, minlength=n_classes).astype(np.float64)
    return counts / labels.size
