"""Degrees, regularized Laplacian, covariate similarity and the raw similarity S_t."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraph, DimensionMismatch
from .kernel import SimilaritySequence
from .model import AdjacencySequence, CovariateMatrix, CovariateWeights


@dataclass(frozen=True, eq=False)
class DegreePair:
    d_row: np.ndarray
    d_col: np.ndarray
    tau_row: float
    tau_col: float


@dataclass(frozen=True, eq=False)
class AlphaSchedule:
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("alpha values must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def at(self, t: int) -> float:
        return float(self.values[0] if self.values.size == 1 else self.values[t])


def _dense(adj, t):
    if isinstance(adj, AdjacencySequence):
        return adj.dense(t)
    return np.asarray(adj, dtype=float)


def degree_pair(A: np.ndarray) -> DegreePair:
    """Regularized degrees of a single (possibly weighted or population) matrix."""
    A = np.asarray(A, dtype=float)
    out_deg = A.sum(axis=1)
    in_deg = A.sum(axis=0)
    n = A.shape[0]
    tau_row = float(out_deg.sum() / n)
    tau_col = float(in_deg.sum() / n)
    if tau_row == 0 and tau_col == 0:
        raise DegenerateGraph("period has no edges; regularized degrees vanish")
    return DegreePair(out_deg + tau_row, in_deg + tau_col, tau_row, tau_col)


def degrees(adj, t: int = 0) -> DegreePair:
    """Out/in degrees inflated by the period's average out/in degree."""
    return degree_pair(_dense(adj, t))


def laplacian_of(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    d = degree_pair(A)
    return A / np.sqrt(np.outer(d.d_row, d.d_col))


def laplacian(adj, t: int = 0) -> np.ndarray:
    """D_R^{-1/2} A_t D_C^{-1/2} with tau-regularized degrees."""
    return laplacian_of(_dense(adj, t))


def covariate_weights(cov: CovariateMatrix, n_periods: int = 1, present=None) -> CovariateWeights:
    """Products of adoption rates, W_t(a, b) = (N_a,t / N_t) (N_b,t / N_t).

    A covariate counts as adopted by a node when its value is nonzero.
    ``present`` is an optional T x N boolean mask of the nodes in the market
    at each period; without it the schedule is constant over time.
    """
    active = cov.X != 0
    if present is None:
        rate = active.sum(axis=0) / cov.n_nodes
        return CovariateWeights.constant(np.outer(rate, rate), n_periods)
    present = np.asarray(present, dtype=bool)
    if present.shape[1] != cov.n_nodes:
        raise DimensionMismatch("presence mask must be T x N")
    mats = []
    for mask in present:
        n_t = mask.sum()
        rate = active[mask].sum(axis=0) / n_t if n_t else np.zeros(cov.n_covariates)
        mats.append(np.outer(rate, rate))
    return CovariateWeights(np.array(mats))


def covariate_similarity(cov, weights, t: int = 0) -> np.ndarray:
    """X W_t X^T."""
    X = cov.X if isinstance(cov, CovariateMatrix) else np.asarray(cov, dtype=float)
    W = weights.at(t) if isinstance(weights, CovariateWeights) else np.asarray(weights, dtype=float)
    if W.shape != (X.shape[1], X.shape[1]):
        raise DimensionMismatch(f"weights {W.shape} do not match {X.shape[1]} covariates")
    C = X @ W @ X.T
    # exact symmetry whenever W is symmetric, independent of rounding order
    if np.array_equal(W, W.T):
        C = 0.5 * (C + C.T)
    return C


def alpha_tune(lap: np.ndarray, covsim: np.ndarray, K: int) -> float:
    """Eigen-gap balancing weight (sigma_K(L) - sigma_{K+1}(L)) / sigma_1(C).

    Falls back to 0 when the gap is not positive or the covariate term is zero.
    """
    sv_c = np.linalg.svd(covsim, compute_uv=False)
    if sv_c.size == 0 or sv_c[0] <= 0:
        return 0.0
    sv_l = np.linalg.svd(lap, compute_uv=False)
    if K + 1 > sv_l.size:
        raise DimensionMismatch(f"K + 1 = {K + 1} exceeds matrix size {sv_l.size}")
    gap = sv_l[K - 1] - sv_l[K]
    if gap <= 0:
        return 0.0
    return float(gap / sv_c[0])


def similarity(adj, cov, weights, alpha, t: int = 0) -> np.ndarray:
    """S_t = L_t + alpha_t X W_t X^T."""
    L = laplacian(adj, t)
    a = alpha.at(t) if isinstance(alpha, AlphaSchedule) else float(alpha)
    if a == 0 or cov is None:
        return L
    return L + a * covariate_similarity(cov, weights, t)


def raw_similarities(adj: AdjacencySequence, cov: CovariateMatrix | None,
                     weights: CovariateWeights | None, K: int,
                     alpha="auto") -> tuple[SimilaritySequence, AlphaSchedule]:
    """Raw similarity for every period, tuning alpha_t per period when ``alpha='auto'``."""
    if cov is not None and weights is None:
        weights = covariate_weights(cov, adj.n_periods)
    mats, alphas = [], []
    for t in range(adj.n_periods):
        L = laplacian(adj, t)
        if cov is None or (not isinstance(alpha, str) and np.all(np.asarray(alpha) == 0)):
            mats.append(L)
            alphas.append(0.0)
            continue
        C = covariate_similarity(cov, weights, t)
        if isinstance(alpha, str):
            a = alpha_tune(L, C, K)
        elif isinstance(alpha, AlphaSchedule):
            a = alpha.at(t)
        else:
            a = float(np.atleast_1d(alpha)[0 if np.ndim(alpha) == 0 else t])
        mats.append(L + a * C)
        alphas.append(a)
    return SimilaritySequence(np.array(mats)), AlphaSchedule(np.array(alphas))
