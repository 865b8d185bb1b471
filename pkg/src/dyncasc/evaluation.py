"""Scoring of estimated communities."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch, EmptyCommunity, InsufficientFuture
from .model import AdjacencySequence, MembershipSequence, ReturnPanel

log = logging.getLogger(__name__)


def confusion(est, truth, K: int) -> np.ndarray:
    """K x K counts; entry (a, b) is #{i : est(i) = a, truth(i) = b}."""
    est = np.asarray(est, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    return np.bincount(est * K + truth, minlength=K * K).reshape(K, K)


def _k_for(est, truth, K):
    return max(int(K or 0), int(np.max(est, initial=-1)) + 1, int(np.max(truth, initial=-1)) + 1, 1)


def miscluster_rate(est, truth, K: int | None = None) -> float:
    """Fraction of nodes mislabelled under the best relabelling of ``est``."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise DimensionMismatch(f"{est.shape} vs {truth.shape}")
    if est.size == 0:
        return 0.0
    K = _k_for(est, truth, K)
    M = confusion(est, truth, K)
    r, c = linear_sum_assignment(M, maximize=True)
    return float(1.0 - M[r, c].sum() / est.size)


def miscluster_rate_bruteforce(est, truth, K: int | None = None) -> float:
    """Same quantity by enumerating every permutation; for cross-checks with small K."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    K = _k_for(est, truth, K)
    M = confusion(est, truth, K)
    best = max(sum(M[a, p[a]] for a in range(K)) for p in itertools.permutations(range(K)))
    return float(1.0 - best / est.size)


@dataclass(frozen=True, eq=False)
class MisclusterReport:
    row_rates: np.ndarray
    col_rates: np.ndarray

    @property
    def row_mean(self) -> float:
        return float(np.mean(self.row_rates))

    @property
    def col_mean(self) -> float:
        return float(np.mean(self.col_rates))


def miscluster_sequence(est: MembershipSequence, truth: MembershipSequence) -> MisclusterReport:
    if est.row_labels.shape != truth.row_labels.shape:
        raise DimensionMismatch(f"estimate {est.row_labels.shape} vs truth {truth.row_labels.shape}")
    Kr = max(est.k_rows, truth.k_rows)
    Kc = max(est.k_cols, truth.k_cols)
    rows = [miscluster_rate(est.row_labels[t], truth.row_labels[t], Kr) for t in range(est.n_periods)]
    cols = [miscluster_rate(est.col_labels[t], truth.col_labels[t], Kc) for t in range(est.n_periods)]
    return MisclusterReport(np.array(rows), np.array(cols))


def community_degrees(adj: AdjacencySequence, membership: MembershipSequence, community: int,
                      side: str = "col") -> tuple[float, float]:
    """Average within- and cross-community edge densities over periods."""
    if membership.n_periods != adj.n_periods:
        raise DimensionMismatch("membership and adjacency cover different periods")
    n = adj.n_nodes
    within = cross = 0.0
    for t in range(adj.n_periods):
        inside = membership.labels(t, side) == community
        nc = int(inside.sum())
        if nc == 0:
            raise EmptyCommunity(f"community {community} is empty at period {t}")
        A = adj.mats[t]
        within += A[inside][:, inside].sum() / nc ** 2
        if nc < n:
            out = ~inside
            both = A[inside][:, out].sum() + A[out][:, inside].sum()
            cross += both / (2.0 * nc * (n - nc))
    T = adj.n_periods
    return float(within / T), float(cross / T)


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    within: np.ndarray
    cross: np.ndarray
    excluded_pairs: int


def community_correlations(panel: ReturnPanel, membership: MembershipSequence, horizon: int,
                           days=None, side: str = "col") -> CorrelationReport:
    """Mean pairwise Pearson correlation of the next ``horizon`` returns.

    Membership period ``t`` is aligned with panel row ``t``. Series with zero
    variance (or a missing value) inside the window are dropped and counted.
    """
    T = panel.n_periods
    if membership.n_nodes != panel.n_assets:
        raise DimensionMismatch("membership and panel disagree on the asset count")
    if days is None:
        days = [t for t in range(min(T, membership.n_periods)) if t + horizon < T]
        if not days:
            raise InsufficientFuture(f"no period has {horizon} future returns")
    K = membership.k_cols if side == "col" else membership.k_rows
    sums_w = np.zeros(K)
    sums_c = np.zeros(K)
    cnt_w = np.zeros(K)
    cnt_c = np.zeros(K)
    excluded = 0
    iu = np.triu_indices(panel.n_assets, 1)
    for t in days:
        if t + horizon >= T:
            raise InsufficientFuture(f"period {t} needs returns through {t + horizon}, panel ends at {T - 1}")
        win = panel.returns[t + 1:t + 1 + horizon]
        ok = panel.mask[t + 1:t + 1 + horizon].all(axis=0) & (win.std(axis=0) > 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = np.corrcoef(win, rowvar=False)
        valid_pair = ok[iu[0]] & ok[iu[1]]
        excluded += int((~valid_pair).sum())
        lab = membership.labels(t, side)
        a, b = lab[iu[0]], lab[iu[1]]
        vals = corr[iu]
        for k in range(K):
            w = valid_pair & (a == k) & (b == k)
            c = valid_pair & ((a == k) != (b == k))
            if w.any():
                sums_w[k] += vals[w].mean()
                cnt_w[k] += 1
            if c.any():
                sums_c[k] += vals[c].mean()
                cnt_c[k] += 1
    if excluded:
        log.info("excluded %d asset pairs with zero-variance or missing windows", excluded)
    with np.errstate(invalid="ignore"):
        return CorrelationReport(sums_w / cnt_w, sums_c / cnt_c, excluded)
