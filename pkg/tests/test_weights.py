"""Distance kernels and row-normalized weight matrices."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distnn.weights import (
    WeightModel,
    compute_weights,
    kernel_value,
    log_kernel_value,
    normalize_log_rows,
)

from conftest import random_points_distances

ALL_KINDS = ["dnn1", "dnn2", "dnn3"]


def random_symmetric_distances(seed, n=7):
    rng = np.random.default_rng(seed)
    _, d = random_points_distances(rng, n)
    return d


class TestKernelValue:
    def test_gaussian_at_zero_distance(self):
        assert kernel_value(WeightModel(kind="dnn1"), 0.0, 2.3) == 1.0

    def test_ball_indicator_inside(self):
        assert kernel_value(WeightModel(kind="dnn2"), 1.0, 2.0) == 1.0

    def test_ball_indicator_outside(self):
        assert kernel_value(WeightModel(kind="dnn2"), 5.0, 2.0) == pytest.approx(1e-10)

    def test_exponential_oracle(self):
        """exp(-2 * 1.5) = exp(-3) = 0.049787068..."""
        value = kernel_value(WeightModel(kind="dnn3"), 2.0, 1.5)
        assert value == pytest.approx(0.04978706836786394, rel=1e-12)

    def test_exponential_sigma_zero_is_flat(self):
        assert kernel_value(WeightModel(kind="dnn3"), 7.0, 0.0) == 1.0

    def test_gaussian_formula_on_array(self):
        d = np.array([0.5, 1.0, 2.0])
        out = kernel_value(WeightModel(kind="dnn1"), d, 0.8)
        np.testing.assert_allclose(out, np.exp(-d * d / (2 * 0.64)))

    @pytest.mark.parametrize("kind", ["dnn1", "dnn2"])
    def test_sigma_must_be_positive(self, kind):
        with pytest.raises(ValueError, match="sigma"):
            kernel_value(WeightModel(kind=kind), 1.0, 0.0)

    def test_exponential_rejects_negative_sigma(self):
        with pytest.raises(ValueError, match="sigma"):
            kernel_value(WeightModel(kind="dnn3"), 1.0, -0.1)

    def test_log_kernel_matches_log_of_kernel(self):
        d = np.array([0.3, 1.7, 4.0])
        for kind in ALL_KINDS:
            model = WeightModel(kind=kind)
            np.testing.assert_allclose(
                log_kernel_value(model, d, 1.3),
                np.log(kernel_value(model, d, 1.3)),
                rtol=1e-12, atol=1e-12,
            )


class TestWeightModelValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="dnn"):
            WeightModel(kind="dnn4")

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.5, 2.0])
    def test_epsilon_domain(self, eps):
        with pytest.raises(ValueError, match="epsilon"):
            WeightModel(kind="dnn2", epsilon=eps)


class TestComputeWeights:
    def test_equilateral_rows_are_half(self):
        """Three mutually equidistant points weight each neighbour 1/2."""
        d = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        for kind in ALL_KINDS:
            w = compute_weights(WeightModel(kind=kind), d, 0.7)
            np.testing.assert_allclose(w, (1 - np.eye(3)) / 2, atol=1e-15)

    def test_ball_row_one_inside_one_outside(self):
        d = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 4.0], [5.0, 4.0, 0.0]])
        eps = 1e-10
        w = compute_weights(WeightModel(kind="dnn2", epsilon=eps), d, 2.0)
        np.testing.assert_allclose(w[0], [0.0, 1 / (1 + eps), eps / (1 + eps)], rtol=1e-9)

    def test_gaussian_large_sigma_uniform(self):
        d = random_symmetric_distances(3, n=6)
        w = compute_weights(WeightModel(kind="dnn1"), d, 1e6)
        np.testing.assert_allclose(w + np.eye(6) / 5, 1 / 5, atol=1e-9)

    def test_ball_no_neighbour_fallback_uniform(self):
        """A row with no point inside sigma has all kernels at eps, hence
        exactly uniform weights."""
        d = np.array([[0.0, 3.0, 4.0], [3.0, 0.0, 5.0], [4.0, 5.0, 0.0]])
        w = compute_weights(WeightModel(kind="dnn2"), d, 1.0)
        np.testing.assert_array_equal(w, (1 - np.eye(3)) / 2)

    def test_asymmetric_input_rejected(self):
        d = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
        with pytest.raises(ValueError, match="symmetric"):
            compute_weights(WeightModel(kind="dnn1"), d, 1.0)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            compute_weights(WeightModel(kind="dnn1"), np.zeros((2, 3)), 1.0)

    def test_tiny_sigma_still_row_stochastic(self):
        """Log-space normalization survives sigma far below the distance
        scale, where the raw kernels all underflow."""
        d = random_symmetric_distances(9, n=6)
        w = compute_weights(WeightModel(kind="dnn1"), d, 1e-40)
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
        # each row concentrates on that row's nearest neighbour
        masked = d + np.diag(np.full(6, np.inf))
        np.testing.assert_array_equal(w.argmax(axis=1), masked.argmin(axis=1))

    def test_all_underflowed_row_raises(self):
        log_kern = np.full((2, 2), -np.inf)
        with pytest.raises(ValueError, match="underflow"):
            normalize_log_rows(log_kern)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    sigma=st.floats(0.05, 20.0),
    kind=st.sampled_from(ALL_KINDS),
)
def test_rows_sum_to_one(seed, sigma, kind):
    """Row-stochasticity across models, scales, and instances."""
    d = random_symmetric_distances(seed)
    w = compute_weights(WeightModel(kind=kind), d, sigma)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-12)
    assert (w >= 0).all()
    np.testing.assert_array_equal(np.diag(w), 0.0)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    sigma=st.floats(0.05, 20.0),
    kind=st.sampled_from(ALL_KINDS),
)
def test_kernel_symmetric_before_normalization(seed, sigma, kind):
    d = random_symmetric_distances(seed)
    log_kern = log_kernel_value(WeightModel(kind=kind), d, sigma)
    assert np.array_equal(log_kern, log_kern.T)


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    sigma=st.floats(0.1, 5.0),
    scale=st.floats(0.01, 100.0),
)
def test_gaussian_scale_equivariance(seed, sigma, scale):
    """Scaling all distances and sigma together changes nothing (dnn1)."""
    d = random_symmetric_distances(seed)
    model = WeightModel(kind="dnn1")
    np.testing.assert_allclose(
        compute_weights(model, scale * d, scale * sigma),
        compute_weights(model, d, sigma),
        atol=1e-12,
    )


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    sigma=st.floats(0.1, 5.0),
    scale=st.floats(0.01, 100.0),
)
def test_exponential_scale_equivariance(seed, sigma, scale):
    """Scaling distances by c and sigma by 1/c changes nothing (dnn3)."""
    d = random_symmetric_distances(seed)
    model = WeightModel(kind="dnn3")
    np.testing.assert_allclose(
        compute_weights(model, scale * d, sigma / scale),
        compute_weights(model, d, sigma),
        atol=1e-12,
    )


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    sigma=st.floats(0.05, 10.0),
    kind=st.sampled_from(["dnn1", "dnn3"]),
)
def test_closer_points_weigh_at_least_as_much(seed, sigma, kind):
    """Within a row, weight is non-increasing in distance for the two
    monotone kernels."""
    d = random_symmetric_distances(seed)
    w = compute_weights(WeightModel(kind=kind), d, sigma)
    n = d.shape[0]
    for i in range(n):
        others = [j for j in range(n) if j != i]
        order = sorted(others, key=lambda j: d[i, j])
        row = w[i, order]
        assert (np.diff(row) <= 1e-15).all()
