import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sentiment_lab.errors import ComputationError
from sentiment_lab.robustness import (
    MarketMatrixSet,
    elementwise_t,
    mean_matrix,
    pattern_percentage,
    quantile_distance,
    quantile_transform,
    robustness_report,
    std_matrix,
    zscore_set,
)

MARKETS = ("US_Tech", "US", "Japan", "Europe", "UK", "Emerging")
CELL = [0.1, 0.2, 0.3, 0.2, 0.1, 0.3]


def one_cell_set(values):
    return MarketMatrixSet(np.array(values, float).reshape(-1, 1, 1), MARKETS[: len(values)])


def welford(stack):
    mean = np.zeros(stack.shape[1:])
    m2 = np.zeros(stack.shape[1:])
    for k, x in enumerate(stack, start=1):
        delta = x - mean
        mean = mean + delta / k
        m2 = m2 + delta * (x - mean)
    return mean, np.sqrt(m2 / (len(stack) - 1))


def test_mean_and_std_examples():
    mset = one_cell_set(CELL)
    Z = mean_matrix(mset)
    assert Z[0, 0] == pytest.approx(0.2, abs=1e-15)
    assert std_matrix(mset, Z)[0, 0] == pytest.approx(math.sqrt(0.04 / 5), abs=1e-15)
    assert f"{std_matrix(mset)[0, 0]:.4f}" == "0.0894"
    a, b = 0.37, -0.12
    assert std_matrix(one_cell_set([a, b]))[0, 0] == pytest.approx(abs(a - b) / math.sqrt(2), abs=1e-15)


def test_identical_matrices():
    m = np.random.default_rng(0).uniform(-1, 1, (4, 5))
    mset = MarketMatrixSet(np.stack([m] * 6), MARKETS)
    np.testing.assert_array_equal(mean_matrix(mset), m)
    np.testing.assert_array_equal(std_matrix(mset), np.zeros_like(m))


def test_undefined_cell_propagates():
    stack = np.full((6, 2, 2), 0.1)
    stack[3, 1, 0] = np.nan
    Z = mean_matrix(MarketMatrixSet(stack, MARKETS))
    assert np.isnan(Z[1, 0]) and np.isfinite(Z[0, 0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, (6, 3, 4), elements=st.floats(-1, 1)))
def test_streaming_agreement(stack):
    mset = MarketMatrixSet(stack, MARKETS)
    mean, sd = welford(stack)
    np.testing.assert_allclose(mean_matrix(mset), mean, rtol=0, atol=1e-12)
    np.testing.assert_allclose(std_matrix(mset), sd, rtol=0, atol=1e-12)


def test_elementwise_t_example():
    mset = one_cell_set(CELL)
    T, p = elementwise_t(mset, np.full((1, 1), 0.2), np.full((1, 1), 0.0894))
    assert T[0, 0, 0] == pytest.approx(-1.118, abs=1e-3)
    assert T[1, 0, 0] == 0.0
    assert p[1, 0, 0] == 1.0
    assert 0 < p[0, 0, 0] < 1


def test_elementwise_t_zero_sigma_undefined():
    mset = one_cell_set([0.2] * 6)
    T, p = elementwise_t(mset, mean_matrix(mset), std_matrix(mset))
    assert np.all(np.isnan(T)) and np.all(np.isnan(p))


def test_market_equal_to_mean_gives_zero_t():
    rng = np.random.default_rng(5)
    stack = rng.uniform(-1, 1, (6, 3, 3))
    stack[0] = 0.0
    stack[1:] -= stack[1:].mean(axis=0)  # market 0 now equals the cross-market mean
    mset = MarketMatrixSet(stack, MARKETS)
    T, _ = elementwise_t(mset, mean_matrix(mset), std_matrix(mset))
    np.testing.assert_allclose(T[0], 0.0, atol=1e-12)


def test_paper_formula_layer():
    mset = one_cell_set(CELL)
    T, p, printed = elementwise_t(mset, mean_matrix(mset), std_matrix(mset), paper_formula=True)
    np.testing.assert_allclose(printed, 1.0 - p, atol=1e-15)


def test_pattern_percentage():
    assert pattern_percentage(np.zeros((3, 3))) == 100.0
    assert pattern_percentage(np.ones((3, 3))) == 0.0
    assert pattern_percentage(np.array([[0.001, np.nan], [0.5, 0.5]])) == pytest.approx(100 / 3)
    with pytest.raises(ComputationError):
        pattern_percentage(np.full((2, 2), np.nan))


def test_quantile_examples():
    np.testing.assert_array_equal(quantile_transform([[0.1, 0.4], [0.2, 0.3]]), [[0.25, 1.0], [0.5, 0.75]])
    np.testing.assert_array_equal(quantile_transform(np.full((2, 2), 0.7)), np.full((2, 2), 5 / 8))
    inc = quantile_transform(np.arange(12.0).reshape(3, 4)).ravel()
    assert np.all(np.diff(inc) > 0)
    np.testing.assert_array_equal(quantile_transform([[0.1, 0.4], [0.2, 0.3]], "midrank"),
                                  [[0.125, 0.875], [0.375, 0.625]])


def test_quantile_distance_examples():
    A = np.array([[0.1, 0.4], [0.2, 0.3]])
    B = np.array([[0.4, 0.1], [0.3, 0.2]])
    qd = quantile_distance(A, B)
    assert qd.mean == 0.5
    np.testing.assert_array_equal(qd.layer, [[0.75, 0.75], [0.25, 0.25]])
    self_qd = quantile_distance(A, A)
    assert self_qd.mean == 0.0 and self_qd.pct_within == 100.0 and self_qd.pct_above == 0.0
    with pytest.raises(ValueError):
        quantile_distance(A, np.zeros((3, 3)))


@settings(max_examples=80, deadline=None)
@given(arrays(float, (3, 4), elements=st.integers(-20, 20).map(lambda k: k / 20)),
       arrays(float, (3, 4), elements=st.integers(-20, 20).map(lambda k: k / 20)))
def test_quantile_properties(A, B):
    # values on a coarse grid (frequent ties) so the transform stays strictly increasing in floats
    np.testing.assert_array_equal(quantile_transform(np.exp(3 * A) + A ** 3), quantile_transform(A))
    ab = quantile_distance(A, B)
    assert ab.mean == quantile_distance(B, A).mean
    same_ranks = np.array_equal(quantile_transform(A), quantile_transform(B))
    assert (ab.mean == 0.0) == same_ranks


def test_zscore_set():
    rng = np.random.default_rng(2)
    mset = MarketMatrixSet(rng.normal(size=(6, 2, 3)), MARKETS)
    z = zscore_set(mset).matrices
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(z.std(axis=0, ddof=1), 1.0, atol=1e-12)


def test_report_shape_and_degenerate_flags():
    m = np.random.default_rng(0).uniform(-1, 1, (3, 3))
    rep = robustness_report(MarketMatrixSet(np.stack([m] * 6), MARKETS))
    d = rep.to_dict()
    assert d["zero_std_cells"] == 9 and d["undefined_t_cells"] == 9
    for mid in MARKETS:
        assert d["per_market"][mid]["pct_p_below_alpha"] is None
        assert d["per_market"][mid]["pct_quantile_within_tau"] == 100.0
        assert d["per_market"][mid]["quantile_distance"] == 0.0
    assert d["degrees_of_freedom"] == 5


def test_set_validation():
    with pytest.raises(ValueError):
        MarketMatrixSet(np.zeros((1, 2, 2)), ("US",))
    with pytest.raises(ValueError):
        MarketMatrixSet(np.zeros((2, 2, 2)), ("US",))
