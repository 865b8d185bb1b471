import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dyncasc.errors import DimensionMismatch, EmptyCommunity, InsufficientFuture
from dyncasc.evaluation import (community_correlations, community_degrees, confusion, miscluster_rate,
                                miscluster_rate_bruteforce, miscluster_sequence)
from dyncasc.model import AdjacencySequence, MembershipSequence, ReturnPanel


def test_rate_examples():
    truth = np.array([0, 0, 1, 1])
    assert miscluster_rate(truth, truth) == 0
    assert miscluster_rate(1 - truth, truth) == 0
    assert miscluster_rate(np.array([0, 1, 1, 1]), truth) == 0.25
    assert miscluster_rate_bruteforce(np.array([0, 1, 1, 1]), truth) == 0.25


def test_confusion_counts():
    M = confusion([0, 1, 1], [1, 1, 0], 2)
    np.testing.assert_array_equal(M, [[0, 1], [1, 1]])


def test_rate_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        miscluster_rate([0, 1], [0, 1, 1])


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_hungarian_equals_bruteforce(data):
    k = data.draw(st.integers(1, 5))
    n = data.draw(st.integers(1, 30))
    est = np.array(data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
    truth = np.array(data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
    assert miscluster_rate(est, truth, k) == miscluster_rate_bruteforce(est, truth, k)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 1000))
def test_rate_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(4, size=25)
    est = rng.integers(4, size=25)
    assert miscluster_rate(rng.permutation(4)[est], truth, 4) == miscluster_rate(est, truth, 4)
    assert 0 <= miscluster_rate(est, truth, 4) <= 0.75


def test_sequence_report():
    truth = MembershipSequence([[0, 0, 1, 1], [0, 1, 0, 1]], [[0, 0, 1, 1], [0, 0, 1, 1]], 2, 2)
    est = MembershipSequence([[1, 1, 0, 0], [0, 1, 1, 1]], [[0, 0, 1, 1], [0, 0, 1, 1]], 2, 2)
    rep = miscluster_sequence(est, truth)
    np.testing.assert_array_equal(rep.row_rates, [0, 0.25])
    assert rep.row_mean == 0.125 and rep.col_mean == 0


def test_community_degrees():
    lab = [[0, 0, 1, 1]]
    mem = MembershipSequence(lab, lab, 2, 2)
    empty = AdjacencySequence.from_dense([np.zeros((4, 4))])
    assert community_degrees(empty, mem, 0) == (0.0, 0.0)
    within_only = np.kron(np.eye(2), np.ones((2, 2))) - np.eye(4)
    assert community_degrees(AdjacencySequence.from_dense([within_only]), mem, 0) == (0.5, 0.0)
    full = AdjacencySequence.from_dense([1 - np.eye(4)])
    assert community_degrees(full, mem, 1) == (0.5, 1.0)
    with pytest.raises(EmptyCommunity):
        community_degrees(full, MembershipSequence([[0, 0, 0, 0]], [[0, 0, 0, 0]], 2, 2), 1)


def _factor_panel(seed, T=200, size=5):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(T, 2))
    lab = np.repeat([0, 1], size)
    R = f[:, lab] + 0.5 * rng.normal(size=(T, 2 * size))
    return ReturnPanel.from_array(R), MembershipSequence(np.tile(lab, (T, 1)), np.tile(lab, (T, 1)), 2, 2)


def test_correlations_within_exceed_cross():
    panel, mem = _factor_panel(1)
    rep = community_correlations(panel, mem, 30, days=range(0, 150, 10))
    assert (rep.within > rep.cross + 0.3).all()
    assert rep.excluded_pairs == 0


def test_identical_pair_correlation_one():
    rng = np.random.default_rng(0)
    x = rng.normal(size=20)
    panel = ReturnPanel.from_array(np.c_[x, x, rng.normal(size=20)])
    mem = MembershipSequence([[0, 0, 1]] * 20, [[0, 0, 1]] * 20, 2, 2)
    rep = community_correlations(panel, mem, 7, days=[0, 5])
    assert rep.within[0] == pytest.approx(1.0)


def test_constant_series_skipped(caplog):
    rng = np.random.default_rng(0)
    R = np.c_[np.ones(20), rng.normal(size=(20, 3))]
    mem = MembershipSequence([[0, 0, 1, 1]] * 20, [[0, 0, 1, 1]] * 20, 2, 2)
    with caplog.at_level("INFO"):
        rep = community_correlations(ReturnPanel.from_array(R), mem, 7, days=[0])
    assert rep.excluded_pairs == 3
    assert np.isnan(rep.within[0]) and np.isfinite(rep.within[1])
    assert "excluded 3" in caplog.text


def test_insufficient_future():
    panel, mem = _factor_panel(2, T=10)
    with pytest.raises(InsufficientFuture):
        community_correlations(panel, mem, 30)
    with pytest.raises(InsufficientFuture):
        community_correlations(panel, mem, 7, days=[5])
