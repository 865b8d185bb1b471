from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyncasc.cluster import (DetectConfig, cluster_similarities, detect_casc_static, detect_communities,
                             detect_disim_dc, spherical_kmedians, spherical_normalize, truncated_svd)
from dyncasc.errors import DegenerateGraph, DimensionMismatch
from dyncasc.evaluation import miscluster_sequence
from dyncasc.model import AdjacencySequence, CovariateMatrix, MembershipSequence
from dyncasc.simulate import SimConfig, gen_memberships, gen_network, gen_population_similarity


def test_svd_identity():
    emb = truncated_svd(np.eye(3), 2)
    np.testing.assert_allclose(emb.sigma, [1, 1])
    assert set(np.abs(emb.U).max(axis=0)) == {1.0}
    assert np.all(emb.U.max(axis=0) > 0)


def test_svd_rank_one(rng):
    u = rng.normal(size=5)
    v = rng.normal(size=5)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    emb = truncated_svd(np.outer(u, v), 1)
    assert emb.sigma[0] == pytest.approx(1.0)
    s = np.sign(emb.U[0, 0] / u[0])
    np.testing.assert_allclose(emb.U[:, 0], s * u, atol=1e-12)
    np.testing.assert_allclose(emb.V[:, 0], s * v, atol=1e-12)


def test_svd_single_edge_similarity():
    S = np.array([[0.1, 0.1 + 2 / 3], [0.1, 0.1]])
    emb = truncated_svd(S, 1)
    assert emb.sigma[0] == pytest.approx(np.linalg.svd(S, compute_uv=False)[0], rel=1e-14)
    assert emb.sigma[0] > 2 / 3


def test_svd_sign_convention_keeps_product(rng):
    S = rng.normal(size=(7, 7))
    emb = truncated_svd(S, 7)
    np.testing.assert_allclose(emb.U * emb.sigma @ emb.V.T, S, atol=1e-12)
    with pytest.raises(DimensionMismatch):
        truncated_svd(S, 8)


def test_spherical_normalize():
    U = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
    pts, keep = spherical_normalize(U)
    np.testing.assert_allclose(pts[0], [0.6, 0.8])
    assert keep.tolist() == [0, 2]


def test_kmedians_one_point_per_cluster(rng):
    X = spherical_normalize(rng.normal(size=(4, 3)))[0]
    assert spherical_kmedians(X, 4, restarts=3).objective == pytest.approx(0.0, abs=1e-12)


def test_kmedians_identical_points():
    X = np.tile([[0.0, 1.0]], (5, 1))
    res = spherical_kmedians(X, 1)
    np.testing.assert_allclose(res.centers[0], [0, 1])
    assert res.objective == pytest.approx(0.0, abs=1e-12)


def test_kmedians_antipodal_groups(rng):
    ang = np.concatenate([rng.normal(0, 0.05, 5), np.pi + rng.normal(0, 0.05, 5)])
    X = np.c_[np.cos(ang), np.sin(ang)]
    res = spherical_kmedians(X, 2, seed=3)
    assert len(set(res.labels[:5])) == 1 and len(set(res.labels[5:])) == 1
    assert res.labels[0] != res.labels[5]
    # sum over groups of all within-group pairwise distances bounds the cost of any member as center
    spread = sum(np.linalg.norm(g[:, None] - g[None], axis=2).sum() / 2 for g in (X[:5], X[5:]))
    assert res.objective < spread
    # brute force over every 2-partition, cost with each group's own best point
    best = np.inf
    for mask in range(2 ** 9 - 1):
        lab = np.array([(mask >> i) & 1 for i in range(9)] + [1])
        cost = sum(min(np.linalg.norm(X[lab == g] - c, axis=1).sum() for c in X[lab == g]) for g in (0, 1))
        best = min(best, cost)
    assert res.objective <= best + 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 4))
def test_kmedians_monotone_trace(seed, k):
    X = spherical_normalize(np.random.default_rng(seed).normal(size=(30, 3)))[0]
    res = spherical_kmedians(X, k, restarts=2, seed=seed)
    tr = np.array(res.trace)
    assert np.all(np.diff(tr) <= 1e-12 * max(1.0, tr.max()))
    assert np.allclose(np.linalg.norm(res.centers, axis=1), 1.0)
    assert set(res.labels) <= set(range(k))


def test_kmedians_deterministic(rng):
    X = spherical_normalize(rng.normal(size=(40, 3)))[0]
    a = spherical_kmedians(X, 3, seed=[1, 2])
    b = spherical_kmedians(X, 3, seed=[1, 2])
    np.testing.assert_array_equal(a.labels, b.labels)


def test_population_recovery_two_blocks():
    B = np.array([[0.9, 0.05], [0.05, 0.9]])
    cfg = SimConfig(n=40, T=5, k_rows=2, k_cols=2, s=0, B_base=B / 1.5, tie_row_col=True, seed=11)
    truth = gen_memberships(cfg)
    est = cluster_similarities(gen_population_similarity(cfg, truth), DetectConfig(2, 2))
    rep = miscluster_sequence(est, truth)
    assert rep.row_mean == 0 and rep.col_mean == 0


def test_single_community_labels_zero(rng):
    adj = AdjacencySequence.from_dense([(rng.random((6, 6)) < 0.5) * (1 - np.eye(6)) for _ in range(3)])
    m = detect_disim_dc(adj, DetectConfig(1, 1))
    assert not m.row_labels.any() and not m.col_labels.any()


def test_identical_periods_give_identical_labels(rng):
    A = (rng.random((30, 30)) < 0.3) * (1 - np.eye(30))
    adj = AdjacencySequence.from_dense([A] * 4)
    cov = CovariateMatrix(rng.uniform(0, 10, (30, 2)))
    m = detect_communities(adj, cov, DetectConfig(3, 3, seed=4))
    for t in range(1, 4):
        np.testing.assert_array_equal(m.row_labels[t], m.row_labels[0])
        np.testing.assert_array_equal(m.col_labels[t], m.col_labels[0])


def test_disim_dc_is_unsmoothed_without_covariates():
    cfg = SimConfig(n=40, T=4, degree_scale="block_size", seed=2)
    adj, cov, _, _ = gen_network(cfg)
    dc = DetectConfig(4, 4, seed=5)
    assert detect_disim_dc(adj, dc) == detect_communities(adj, None, replace(dc, alpha=0.0, bandwidth=0))
    d = {}
    detect_casc_static(adj, cov, dc, diagnostics=d)
    assert d["bandwidths"] == [0, 0, 0, 0]


def test_planted_single_period_disim():
    lab = np.repeat([0, 1], 20)
    A = np.where(lab[:, None] == lab[None], 1, 0) - np.eye(40, dtype=int)
    A[0, 39] = A[25, 3] = 1
    m = detect_disim_dc(AdjacencySequence.from_dense([A]), DetectConfig(2, 2))
    truth = MembershipSequence([lab], [lab], 2, 2)
    rep = miscluster_sequence(m, truth)
    assert rep.row_mean == 0 and rep.col_mean == 0


def test_empty_period_is_degenerate():
    adj = AdjacencySequence.from_dense([np.zeros((4, 4))])
    with pytest.raises(DegenerateGraph):
        detect_disim_dc(adj, DetectConfig(2, 2))


def test_detection_determinism():
    adj, cov, _, _ = gen_network(SimConfig(n=40, T=5, degree_scale="block_size", seed=9))
    dc = DetectConfig(4, 4, seed=1)
    assert detect_communities(adj, cov, dc) == detect_communities(adj, cov, dc)
