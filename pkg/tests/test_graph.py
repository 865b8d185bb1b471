import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dyncasc.errors import DegenerateGraph, DimensionMismatch
from dyncasc.graph import (AlphaSchedule, alpha_tune, covariate_similarity, covariate_weights, degrees, laplacian,
                           raw_similarities, similarity)
from dyncasc.model import AdjacencySequence, CovariateMatrix, CovariateWeights

EDGE = AdjacencySequence.from_dense([np.array([[0, 1], [0, 0]])])


def test_degrees_single_edge():
    d = degrees(EDGE)
    assert d.tau_row == d.tau_col == 0.5
    np.testing.assert_array_equal(d.d_row, [1.5, 0.5])
    np.testing.assert_array_equal(d.d_col, [0.5, 1.5])


def test_degrees_complete_graph():
    d = degrees(AdjacencySequence.from_dense([1 - np.eye(3)]))
    assert d.tau_row == d.tau_col == 2
    np.testing.assert_array_equal(d.d_row, [4, 4, 4])
    np.testing.assert_array_equal(d.d_col, [4, 4, 4])


def test_empty_graph_is_degenerate():
    with pytest.raises(DegenerateGraph):
        degrees(AdjacencySequence.from_dense([np.zeros((2, 2))]))


def test_laplacian_single_edge():
    L = laplacian(EDGE)
    np.testing.assert_allclose(L, [[0, 2 / 3], [0, 0]], rtol=0, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(arrays(np.int8, (6, 6), elements=st.integers(0, 1)))
def test_laplacian_symmetry(M):
    A = np.triu(M, 1)
    A = A + A.T
    if not A.any():
        return
    L = laplacian(AdjacencySequence.from_dense([A]))
    np.testing.assert_allclose(L, L.T, atol=1e-15)
    assert np.all(L >= 0)


def test_weights_adoption_rates():
    X = np.array([[1, 1, 0], [1, 0, 0], [0, 0, 0], [0, 0, 0]])
    W = covariate_weights(CovariateMatrix(X)).at(0)
    assert W[0, 1] == 0.125
    np.testing.assert_array_equal(W[2], 0)
    np.testing.assert_array_equal(W[:, 2], 0)
    full = covariate_weights(CovariateMatrix(np.ones((3, 1)))).at(0)
    assert full[0, 0] == 1.0


def test_weights_with_presence_mask():
    X = np.array([[1.0], [0.0], [2.0]])
    W = covariate_weights(CovariateMatrix(X), present=[[True, True, False], [True, False, True]])
    assert W.at(0)[0, 0] == 0.25
    assert W.at(1)[0, 0] == 1.0


def test_covariate_similarity_cases():
    X = CovariateMatrix(np.array([[1.0], [1.0]]))
    np.testing.assert_array_equal(covariate_similarity(X, np.array([[0.25]])), np.full((2, 2), 0.25))
    B = CovariateMatrix(np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1]], dtype=float))
    np.testing.assert_array_equal(covariate_similarity(B, np.eye(3)), B.X @ B.X.T)
    np.testing.assert_array_equal(covariate_similarity(CovariateMatrix(np.zeros((3, 2))), np.ones((2, 2))), 0)
    with pytest.raises(DimensionMismatch):
        covariate_similarity(B, np.eye(2))


def test_alpha_rank_two_example(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    L = Q[:, :2] @ Q[:, 2:4].T  # singular values (1, 1, 0, ...)
    u = Q[:, 4]
    C = 2 * np.outer(u, u)
    assert alpha_tune(L, C, 2) == pytest.approx(0.5, abs=1e-12)
    assert alpha_tune(L, np.zeros((6, 6)), 2) == 0.0
    assert alpha_tune(np.zeros((6, 6)), C, 2) == 0.0


def test_similarity_single_edge():
    X = CovariateMatrix(np.array([[1.0], [1.0]]))
    S = similarity(EDGE, X, np.array([[1.0]]), 0.1, 0)
    np.testing.assert_allclose(S, [[0.1, 0.1 + 2 / 3], [0.1, 0.1]], atol=1e-15)
    np.testing.assert_array_equal(similarity(EDGE, X, np.array([[1.0]]), 0.0, 0), laplacian(EDGE))


def test_raw_similarities_schedule(rng):
    A = [(rng.random((8, 8)) < 0.4).astype(int) * (1 - np.eye(8, dtype=int)) for _ in range(3)]
    adj = AdjacencySequence.from_dense(A)
    X = CovariateMatrix(rng.uniform(0, 10, (8, 2)))
    seq, alphas = raw_similarities(adj, X, None, 2)
    assert len(seq) == 3 and alphas.values.shape == (3,)
    W = CovariateWeights.constant(np.ones((2, 2)), 3)
    for t in range(3):
        np.testing.assert_allclose(seq[t], similarity(adj, X, W, alphas, t))
    fixed, sched = raw_similarities(adj, X, W, 2, alpha=AlphaSchedule([0.0]))
    np.testing.assert_array_equal(fixed[1], laplacian(adj, 1))
    assert sched.at(2) == 0.0


def test_alpha_schedule_rejects_negative():
    with pytest.raises(ValueError):
        AlphaSchedule([-1.0])
