"""Inter-asset momentum portfolios built on community membership."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, DimensionMismatch, TooFewAssets
from .model import MembershipSequence, ReturnPanel

N_QUANTILES = 4


def newey_west_tstat(series, lags: int = 4) -> float:
    """t-statistic of the mean with a Bartlett-weighted long-run variance."""
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < lags + 2:
        raise DegenerateSeries(f"series of length {n} too short for {lags} lags")
    if np.all(x == x[0]):
        raise DegenerateSeries("series is constant")
    e = x - x.mean()
    gamma0 = e @ e / n
    if gamma0 <= 0:
        raise DegenerateSeries("series has zero variance")
    lrv = gamma0
    for lag in range(1, lags + 1):
        lrv += 2.0 * (1.0 - lag / (lags + 1.0)) * (e[lag:] @ e[:-lag]) / n
    if lrv <= 0:
        raise DegenerateSeries("non-positive long-run variance")
    return float(x.mean() / np.sqrt(lrv / n))


def momentum_signal(panel: ReturnPanel, membership: MembershipSequence, t: int,
                    side: str = "col") -> np.ma.MaskedArray:
    """Mean same-day return of each asset's community peers (the asset itself excluded).

    Assets without a valid peer return are masked.
    """
    r = panel.returns[t]
    ok = panel.mask[t]
    lab = membership.labels(t, side)
    k = lab.max() + 1
    tot = np.bincount(lab, weights=np.where(ok, r, 0.0), minlength=k)
    cnt = np.bincount(lab, weights=ok.astype(float), minlength=k)
    peer_tot = tot[lab] - np.where(ok, r, 0.0)
    peer_cnt = cnt[lab] - ok
    with np.errstate(invalid="ignore", divide="ignore"):
        sig = peer_tot / peer_cnt
    return np.ma.masked_array(np.where(peer_cnt > 0, sig, 0.0), mask=peer_cnt <= 0)


def form_portfolio(signals) -> np.ndarray:
    """Quartile of every asset (0 = lowest signal, 3 = highest); -1 for masked assets.

    Bucket = floor(4 * rank / n_eligible) with 0-based ascending ranks and
    ties broken by asset index.
    """
    sig = np.ma.asarray(signals)
    mask = np.ma.getmaskarray(sig)
    eligible = np.flatnonzero(~mask)
    m = eligible.size
    if m < N_QUANTILES:
        raise TooFewAssets(f"{m} eligible assets, need at least {N_QUANTILES}")
    order = eligible[np.argsort(sig.data[eligible], kind="stable")]
    q = np.full(sig.shape, -1, dtype=np.int64)
    q[order] = np.minimum(N_QUANTILES * np.arange(m) // m, N_QUANTILES - 1)
    return q


@dataclass(eq=False)
class PortfolioResult:
    """Quartile and long-short returns per formation day and horizon.

    ``quartile_returns`` is days x 4 x H; ``long_short`` is days x H.
    """

    days: np.ndarray
    horizons: np.ndarray
    quartile_returns: np.ndarray
    long_short: np.ndarray
    tstat_quartiles: np.ndarray
    tstat_long_short: np.ndarray
    counts: np.ndarray

    @property
    def mean_quartiles(self) -> np.ndarray:
        return np.nanmean(self.quartile_returns, axis=0)

    @property
    def mean_long_short(self) -> np.ndarray:
        return np.nanmean(self.long_short, axis=0)

    def table(self) -> list[dict]:
        """Rows of (portfolio, horizon, mean, t) in the layout of a momentum table."""
        rows = []
        names = [f"Q{q + 1}" for q in range(N_QUANTILES)] + ["WML"]
        means = np.vstack([self.mean_quartiles, self.mean_long_short[None]])
        tstats = np.vstack([self.tstat_quartiles, self.tstat_long_short[None]])
        for p, name in enumerate(names):
            for h_i, h in enumerate(self.horizons):
                rows.append({"portfolio": name, "horizon": int(h),
                             "mean": float(means[p, h_i]), "tstat": float(tstats[p, h_i])})
        return rows


def _safe_t(series, lags):
    s = np.asarray(series)
    s = s[np.isfinite(s)]
    try:
        return newey_west_tstat(s, lags)
    except DegenerateSeries:
        return float("nan")


def _leg_mean(panel, rows, members):
    ok = panel.mask[rows][members]
    if not ok.any():
        return np.nan
    return float(np.mean(panel.returns[rows][members][ok]))


def run_backtest(panel: ReturnPanel, membership: MembershipSequence, horizons=range(1, 8),
                 days=None, side: str = "col", lags: int = 4) -> PortfolioResult:
    """Sort on peer momentum at each formation day and hold each leg ``h`` days later.

    Membership period ``t`` is aligned with panel row ``t``. By default every
    day with all horizons inside the panel is a formation day.
    """
    if membership.n_nodes != panel.n_assets:
        raise DimensionMismatch("membership and panel disagree on the asset count")
    horizons = np.asarray(list(horizons), dtype=np.int64)
    T = min(panel.n_periods, membership.n_periods)
    if days is None:
        days = np.arange(0, T - horizons.max()) if panel.n_periods > horizons.max() else np.array([], int)
    days = np.asarray(days, dtype=np.int64)
    if days.size and days.max() + horizons.max() >= panel.n_periods:
        raise DimensionMismatch("formation day plus horizon runs past the panel")
    H = horizons.size
    Q = np.full((days.size, N_QUANTILES, H), np.nan)
    counts = np.zeros((days.size, N_QUANTILES), dtype=np.int64)
    for d_i, t in enumerate(days):
        q = form_portfolio(momentum_signal(panel, membership, int(t), side))
        for b in range(N_QUANTILES):
            members = np.flatnonzero(q == b)
            counts[d_i, b] = members.size
            for h_i, h in enumerate(horizons):
                Q[d_i, b, h_i] = _leg_mean(panel, int(t + h), members)
    LS = Q[:, N_QUANTILES - 1, :] - Q[:, 0, :]
    tq = np.array([[_safe_t(Q[:, b, h_i], lags) for h_i in range(H)] for b in range(N_QUANTILES)])
    tl = np.array([_safe_t(LS[:, h_i], lags) for h_i in range(H)])
    return PortfolioResult(days, horizons, Q, LS, tq, tl, counts)


def split_by_regime(panel: ReturnPanel, membership: MembershipSequence, indicator,
                    horizons=range(1, 8), days=None, **kwargs) -> tuple[PortfolioResult, PortfolioResult]:
    """Backtest separately on formation days with indicator <= median and > median."""
    horizons = list(horizons)
    if days is None:
        T = min(panel.n_periods, membership.n_periods)
        days = np.arange(0, T - max(horizons))
    days = np.asarray(days)
    ind = np.asarray(indicator, dtype=float)
    if ind.shape != days.shape:
        raise DimensionMismatch(f"indicator has {ind.size} values for {days.size} formation days")
    med = np.median(ind)
    low, high = days[ind <= med], days[ind > med]
    if low.size == 0 or high.size == 0:
        raise TooFewAssets("one regime has no formation days")
    return (run_backtest(panel, membership, horizons, low, **kwargs),
            run_backtest(panel, membership, horizons, high, **kwargs))
