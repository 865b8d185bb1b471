import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import lfilter

from dyncasc.backtest import form_portfolio, momentum_signal, newey_west_tstat, run_backtest, split_by_regime
from dyncasc.errors import DegenerateSeries, DimensionMismatch, TooFewAssets
from dyncasc.model import MembershipSequence, ReturnPanel


def _mem(lab, T=1, k=None):
    lab = np.asarray(lab)
    k = k or int(lab.max()) + 1
    return MembershipSequence(np.tile(lab, (T, 1)), np.tile(lab, (T, 1)), k, k)


def test_signal_pair():
    sig = momentum_signal(ReturnPanel.from_array([[0.02, 0.04]]), _mem([0, 0]), 0)
    np.testing.assert_allclose(sig, [0.04, 0.02])


def test_signal_triple_and_singleton():
    panel = ReturnPanel.from_array([[0.01, 0.02, 0.03, 0.5]])
    sig = momentum_signal(panel, _mem([0, 0, 0, 1]), 0)
    assert sig[0] == pytest.approx(0.025)
    assert sig.mask.tolist() == [False, False, False, True]


def test_signal_skips_missing_peer():
    panel = ReturnPanel.from_array([[0.01, np.nan, 0.03]])
    sig = momentum_signal(panel, _mem([0, 0, 0]), 0)
    assert sig[0] == pytest.approx(0.03) and sig[1] == pytest.approx(0.02)


def test_quartiles_even_and_odd():
    assert np.bincount(form_portfolio(np.arange(8.0))).tolist() == [2, 2, 2, 2]
    q9 = form_portfolio(np.arange(9.0))
    assert np.bincount(q9).tolist() == [3, 2, 2, 2]
    assert q9.tolist() == [0, 0, 0, 1, 1, 2, 2, 3, 3]


def test_quartile_ties_deterministic():
    q = form_portfolio(np.zeros(6))
    assert q.tolist() == [0, 0, 1, 2, 2, 3]


def test_too_few_assets():
    with pytest.raises(TooFewAssets):
        form_portfolio(np.ma.masked_array([1.0, 2.0, 3.0, 4.0], mask=[0, 0, 0, 1]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=4, max_size=40))
def test_quartile_counts_sum(values):
    q = form_portfolio(np.array(values))
    assert np.bincount(q, minlength=4).sum() == len(values)
    order = np.argsort(values, kind="stable")
    assert np.all(np.diff(q[order]) >= 0)


def test_newey_west_cases():
    assert newey_west_tstat(np.tile([1.0, -1.0], 50)) == 0.0
    with pytest.raises(DegenerateSeries):
        newey_west_tstat(np.full(20, 0.3))
    with pytest.raises(DegenerateSeries):
        newey_west_tstat([1.0, 2.0, 3.0])


def test_newey_west_matches_batch_means():
    rng = np.random.default_rng(7)
    phi, n = 0.15, 1_000_000
    x = lfilter([1.0], [1.0, -phi], rng.normal(size=n)) + 0.002  # AR(1) plus a small drift
    batch = x.reshape(1000, 1000).mean(axis=1)
    lrv = 1000 * batch.var(ddof=1)
    t_oracle = x.mean() / np.sqrt(lrv / n)
    assert newey_west_tstat(x, 4) == pytest.approx(t_oracle, rel=0.10)


def test_winner_minus_loser_construction():
    # signal on day 0 ranks communities; on day 1 winners earn +1%, losers -1%
    lab = np.repeat([0, 1, 2, 3], 2)
    day0 = np.repeat([0.1, 0.2, 0.3, 0.4], 2)
    day1 = np.repeat([-0.01, 0.0, 0.0, 0.01], 2)
    panel = ReturnPanel.from_array(np.vstack([day0, day1]))
    res = run_backtest(panel, _mem(lab, 2), horizons=[1], days=[0])
    assert res.long_short[0, 0] == pytest.approx(0.02)
    np.testing.assert_allclose(res.long_short, res.quartile_returns[:, 3] - res.quartile_returns[:, 0])
    assert res.counts.sum() == 8


def _spill_panel(seed, spill_days, T=400, k=4, size=8, load=0.5, sigma=0.02):
    rng = np.random.default_rng(seed)
    N = k * size
    lab = np.repeat(np.arange(k), size)
    R = np.zeros((T, N))
    for t in range(1, T):
        tot = np.bincount(lab, weights=R[t - 1], minlength=k)[lab]
        peer = (tot - R[t - 1]) / (size - 1)
        R[t] = (load if spill_days[t - 1] else 0.0) * peer + sigma * rng.normal(size=N)
    return ReturnPanel.from_array(R), _mem(lab, T)


def test_regime_split():
    rng = np.random.default_rng(2)
    ind = rng.random(400)
    panel, mem = _spill_panel(3, ind > np.median(ind[:393]))
    days = np.arange(393)
    low, high = split_by_regime(panel, mem, ind[:393], days=days)
    assert high.mean_long_short[0] > low.mean_long_short[0]
    assert low.days.size + high.days.size == days.size


def test_regime_split_monotone_and_constant():
    panel, mem = _spill_panel(4, np.zeros(400, bool), T=60)
    days = np.arange(50)
    low, high = split_by_regime(panel, mem, days.astype(float), days=days)
    assert low.days.tolist() == list(range(25)) and high.days.tolist() == list(range(25, 50))
    with pytest.raises(TooFewAssets):
        split_by_regime(panel, mem, np.ones(50), days=days)
    with pytest.raises(DimensionMismatch):
        split_by_regime(panel, mem, np.ones(3), days=days)


def test_table_layout():
    panel, mem = _spill_panel(5, np.ones(400, bool), T=80)
    rows = run_backtest(panel, mem).table()
    assert len(rows) == 5 * 7
    assert {r["portfolio"] for r in rows} == {"Q1", "Q2", "Q3", "Q4", "WML"}


def test_membership_size_mismatch():
    panel = ReturnPanel.from_array(np.zeros((10, 4)))
    with pytest.raises(DimensionMismatch):
        run_backtest(panel, _mem([0, 1, 0], 10))
