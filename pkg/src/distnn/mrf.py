"""Markov random field over class labels: potential, full-conditionals, Gibbs
sampling, and an exact-enumeration oracle for tiny instances.

The joint distribution is
    pi(y) = exp(beta * S(y, w)) / z(beta),
    S(y, w) = sum_i sum_{j != i} w[i, j] * I(y_j == y_i),
with the double sum over ordered pairs.  The full-conditional of one label is
derived from this joint and therefore couples site i through the symmetrized
weights w[i, j] + w[j, i].
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.special import logsumexp

ENUMERATION_CAP = 2_000_000


@dataclass(frozen=True)
class MrfParams:
    """Field parameters: association strength beta and kernel bandwidth sigma."""

    beta: float
    sigma: float


def agreement_sum(y: np.ndarray, w: np.ndarray) -> float:
    """S(y, w) = sum over ordered pairs (i, j), i != j, of w[i, j] * I(y_i == y_j)."""
    y = np.asarray(y)
    same = y[:, None] == y[None, :]
    return float((w * same).sum() - np.trace(w))


def log_potential(y: np.ndarray, w: np.ndarray, beta: float) -> float:
    """log q(y | beta, w) = beta * S(y, w)."""
    return beta * agreement_sum(y, w)


def full_conditional(
    i: int, y: np.ndarray, w: np.ndarray, beta: float, n_classes: int
) -> np.ndarray:
    """Exact conditional distribution of label i given all other labels.

    Entry g-1 is proportional to exp(beta * sum_{j != i} (w[i,j] + w[j,i]) *
    I(y_j == g)).  Independent of the current value of y[i] because the
    weight-matrix diagonal is zero.
    """
    y = np.asarray(y, dtype=np.int64)
    coupling = w[i, :] + w[:, i]
    scores = np.bincount(y - 1, weights=coupling, minlength=n_classes)
    t = beta * scores
    t -= t.max()
    p = np.exp(t)
    return p / p.sum()


@numba.njit(cache=True)
def _run_sweeps(labels, wsym, beta, uniforms, n_classes):  # pragma: no cover
    """Sequential Gibbs sweeps over sites 0..n-1, one uniform per site update.

    ``labels`` is 0-based and updated in place; ``uniforms`` has shape
    (n_sweeps, n).
    """
    n = labels.shape[0]
    scores = np.empty(n_classes)
    probs = np.empty(n_classes)
    for s in range(uniforms.shape[0]):
        for i in range(n):
            for g in range(n_classes):
                scores[g] = 0.0
            for j in range(n):
                scores[labels[j]] += wsym[i, j]
            m = beta * scores[0]
            for g in range(1, n_classes):
                t = beta * scores[g]
                if t > m:
                    m = t
            total = 0.0
            for g in range(n_classes):
                probs[g] = np.exp(beta * scores[g] - m)
                total += probs[g]
            u = uniforms[s, i] * total
            acc = 0.0
            lab = n_classes - 1
            for g in range(n_classes):
                acc += probs[g]
                if u < acc:
                    lab = g
                    break
            labels[i] = lab


def gibbs_sweep(
    y: np.ndarray, w: np.ndarray, beta: float, n_classes: int, rng: np.random.Generator
) -> np.ndarray:
    """One Gibbs sweep: every site resampled once from its full-conditional,
    in fixed index order.  Returns a new label vector; the input is untouched."""
    return sample_field(w, beta, 1, y, n_classes, rng)


def sample_field(
    w: np.ndarray,
    beta: float,
    n_sweeps: int,
    init: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Run ``n_sweeps`` Gibbs sweeps from ``init`` and return the final state."""
    if n_sweeps < 1:
        raise ValueError("n_sweeps must be >= 1")
    n = w.shape[0]
    labels = np.asarray(init, dtype=np.int64) - 1
    if labels.shape != (n,):
        raise ValueError("init length must match weight matrix size")
    labels = labels.copy()
    wsym = w + w.T
    uniforms = rng.random((n_sweeps, n))
    _run_sweeps(labels, wsym, beta, uniforms, n_classes)
    return labels + 1


@numba.njit(cache=True)
def _run_sweeps_ensemble(labels2d, wsym, beta, uniforms3d, n_classes):  # pragma: no cover
    for c in range(labels2d.shape[0]):
        _run_sweeps(labels2d[c], wsym, beta, uniforms3d[c], n_classes)


def sample_field_ensemble(
    w: np.ndarray,
    beta: float,
    n_sweeps: int,
    inits: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    chunk_size: int = 2000,
) -> np.ndarray:
    """Independent Gibbs runs for many replicate chains at once.

    ``inits`` has shape (n_chains, n); each row is evolved for ``n_sweeps``
    sweeps with its own uniforms.  Used for Monte Carlo checks that need many
    approximately independent draws from the field.
    """
    inits = np.asarray(inits, dtype=np.int64)
    n_chains, n = inits.shape
    labels = inits - 1
    wsym = w + w.T
    for lo in range(0, n_chains, chunk_size):
        hi = min(lo + chunk_size, n_chains)
        uniforms = rng.random((hi - lo, n_sweeps, n))
        _run_sweeps_ensemble(labels[lo:hi], wsym, beta, uniforms, n_classes)
    return labels + 1


def _label_configs(n_sites: int, n_classes: int, start: int, stop: int) -> np.ndarray:
    """Configurations ``start..stop-1`` in mixed-radix order, labels 0-based."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n_sites), dtype=np.int64)
    for pos in range(n_sites - 1, -1, -1):
        out[:, pos] = idx % n_classes
        idx = idx // n_classes
    return out


def _chunk_agreement_sums(configs: np.ndarray, w: np.ndarray) -> np.ndarray:
    same = configs[:, :, None] == configs[:, None, :]
    return (same * w).sum(axis=(1, 2)) - np.trace(w)


def enumerate_log_z(
    w: np.ndarray, beta: float, n_classes: int, max_configs: int = ENUMERATION_CAP
) -> float:
    """log of the exact normalizing constant by summing over all G^n label
    configurations, accumulated in log space.  Refuses instances beyond
    ``max_configs`` configurations."""
    n = w.shape[0]
    total = n_classes**n
    if total > max_configs:
        raise ValueError(
            f"enumeration over {n_classes}^{n} = {total} configurations "
            f"exceeds the cap of {max_configs}"
        )
    chunk = max(1, (1 << 22) // (n * n))
    parts = []
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        s = _chunk_agreement_sums(_label_configs(n, n_classes, lo, hi), w)
        parts.append(logsumexp(beta * s))
    return float(logsumexp(parts))


def enumerate_potentials(
    w: np.ndarray, beta: float, n_classes: int, max_configs: int = ENUMERATION_CAP
) -> tuple[np.ndarray, np.ndarray]:
    """All G^n configurations (labels 1-based, one row each) with their
    log-potentials beta * S(y, w).  Normalize against enumerate_log_z to get
    exact configuration probabilities on tiny instances."""
    n = w.shape[0]
    total = n_classes**n
    if total > max_configs:
        raise ValueError(
            f"enumeration over {n_classes}^{n} = {total} configurations "
            f"exceeds the cap of {max_configs}"
        )
    configs = _label_configs(n, n_classes, 0, total)
    log_q = beta * _chunk_agreement_sums(configs, w)
    return configs + 1, log_q
