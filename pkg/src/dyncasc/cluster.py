"""Spectral co-clustering of (smoothed) similarity matrices.

The pipeline per period is: truncated SVD, row normalisation of the left and
right singular blocks, spherical k-medians on each, and label 0 for rows
whose singular-vector row is zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import ConvergenceFailure, DimensionMismatch
from .graph import raw_similarities
from .kernel import DEFAULT_ELL, SimilaritySequence, kernel_for, lepski_bandwidth, smooth_similarity
from .model import AdjacencySequence, CovariateMatrix, CovariateWeights, MembershipSequence

log = logging.getLogger(__name__)

ZERO_ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralEmbedding:
    U: np.ndarray
    V: np.ndarray
    sigma: np.ndarray
    zero_rows_U: np.ndarray
    zero_rows_V: np.ndarray


@dataclass(eq=False)
class KMediansResult:
    labels: np.ndarray
    centers: np.ndarray
    objective: float
    restarts_used: int
    iterations: int
    trace: list[float] = field(default_factory=list)


def truncated_svd(S: np.ndarray, K: int) -> SpectralEmbedding:
    """Top-K singular triplets of ``S``.

    Each left singular vector is signed so its largest-magnitude entry is
    positive; the matching right vector takes the same sign so that
    ``U diag(sigma) V^T`` still approximates ``S``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if not 1 <= K <= min(S.shape):
        raise DimensionMismatch(f"K={K} outside [1, {min(S.shape)}]")
    try:
        U, sig, Vt = np.linalg.svd(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    U = U[:, :K].copy()
    V = Vt[:K].T.copy()
    sig = sig[:K].copy()
    pivot = np.argmax(np.abs(U), axis=0)
    sign = np.sign(U[pivot, np.arange(K)])
    sign[sign == 0] = 1.0
    U *= sign
    V *= sign
    return SpectralEmbedding(
        U, V, sig,
        np.linalg.norm(U, axis=1) <= ZERO_ROW_TOL,
        np.linalg.norm(V, axis=1) <= ZERO_ROW_TOL,
    )


def spherical_normalize(U: np.ndarray, zero_row_mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Drop zero rows and scale the rest to unit length.

    Returns the normalised rows and the original index of each.
    """
    U = np.asarray(U, dtype=float)
    norms = np.linalg.norm(U, axis=1)
    if zero_row_mask is None:
        zero_row_mask = norms <= ZERO_ROW_TOL
    keep = np.flatnonzero(~np.asarray(zero_row_mask, dtype=bool))
    return U[keep] / norms[keep, None], keep


@njit(cache=True, nogil=True)
def _assign(X, C, labels, dist):
    m, dim = X.shape
    k = C.shape[0]
    for i in range(m):
        best = np.inf
        arg = 0
        for j in range(k):
            acc = 0.0
            for q in range(dim):
                diff = X[i, q] - C[j, q]
                acc += diff * diff
            if acc < best:
                best = acc
                arg = j
        labels[i] = arg
        dist[i] = np.sqrt(best)


@njit(cache=True, nogil=True)
def _cluster_cost(X, labels, C, j):
    m, dim = X.shape
    total = 0.0
    for i in range(m):
        if labels[i] == j:
            acc = 0.0
            for q in range(dim):
                diff = X[i, q] - C[j, q]
                acc += diff * diff
            total += np.sqrt(acc)
    return total


@njit(cache=True, nogil=True)
def _weiszfeld(X, labels, j, y0, max_iter, tol):
    """Geometric median of cluster ``j`` started from ``y0``.

    Points coinciding with the iterate are handled with the Vardi-Zhang
    modification instead of dividing by zero.
    """
    m, dim = X.shape
    y = y0.copy()
    num = np.empty(dim)
    Rv = np.empty(dim)
    for _ in range(max_iter):
        num[:] = 0.0
        Rv[:] = 0.0
        wsum = 0.0
        eta = 0
        for i in range(m):
            if labels[i] != j:
                continue
            acc = 0.0
            for q in range(dim):
                diff = X[i, q] - y[q]
                acc += diff * diff
            d = np.sqrt(acc)
            if d <= 1e-12:
                eta += 1
                continue
            w = 1.0 / d
            wsum += w
            for q in range(dim):
                num[q] += w * X[i, q]
                Rv[q] += w * (X[i, q] - y[q])
        if wsum == 0.0:
            break
        T = num / wsum
        if eta > 0:
            r = np.sqrt(np.sum(Rv * Rv))
            frac = min(1.0, eta / r) if r > 0 else 1.0
            T = (1.0 - frac) * T + frac * y
        step = np.sqrt(np.sum((T - y) ** 2))
        y = T
        if step <= tol:
            break
    return y


@njit(cache=True, nogil=True)
def _repair_empty(X, labels, dist, C):
    """Reseed empty clusters at the point farthest from its center."""
    k = C.shape[0]
    repairs = 0
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        j = -1
        for c in range(k):
            if counts[c] == 0:
                j = c
                break
        if j < 0:
            break
        p = -1
        far = -1.0
        for i in range(X.shape[0]):
            if counts[labels[i]] > 1 and dist[i] > far:
                far = dist[i]
                p = i
        if p < 0:
            break
        C[j] = X[p]
        repairs += 1
        _assign(X, C, labels, dist)
    return repairs


@njit(cache=True, nogil=True)
def _alternate(X, C, max_iter, weiszfeld_iter, weiszfeld_tol):
    m = X.shape[0]
    k = C.shape[0]
    labels = np.zeros(m, dtype=np.int64)
    dist = np.zeros(m)
    _assign(X, C, labels, dist)
    repairs = _repair_empty(X, labels, dist, C)
    trace = [dist.sum()]
    new_labels = labels.copy()
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            med = _weiszfeld(X, labels, j, C[j], weiszfeld_iter, weiszfeld_tol)
            nrm = np.sqrt(np.sum(med * med))
            if nrm <= 0.0:
                continue
            prop = med / nrm
            old = C[j].copy()
            before = _cluster_cost(X, labels, C, j)
            C[j] = prop
            # a projected median can be worse than the current center
            if _cluster_cost(X, labels, C, j) >= before:
                C[j] = old
        _assign(X, C, new_labels, dist)
        repairs += _repair_empty(X, new_labels, dist, C)
        trace.append(dist.sum())
        same = True
        for i in range(m):
            if new_labels[i] != labels[i]:
                same = False
                break
        labels[:] = new_labels
        if same:
            break
    return labels, C, np.array(trace), it, repairs


def _init_centers(X, k, rng):
    """D-sampling seeding (the k-medians analogue of k-means++)."""
    m = X.shape[0]
    idx = [int(rng.integers(m))]
    d = np.linalg.norm(X - X[idx[0]], axis=1)
    for _ in range(1, k):
        total = d.sum()
        if total <= 0:
            nxt = int(rng.integers(m))
        else:
            nxt = int(rng.choice(m, p=d / total))
        idx.append(nxt)
        d = np.minimum(d, np.linalg.norm(X - X[nxt], axis=1))
    return X[idx].copy()


def _kmedians_run(X, k, rng, max_iter=100):
    C = _init_centers(X, k, rng)
    labels, C, trace, it, repairs = _alternate(np.ascontiguousarray(X), C, max_iter, 50, 1e-9)
    if repairs:
        log.info("EmptyClusterRepair: %d center(s) reseeded", repairs)
    return labels, C, trace.tolist(), it


def spherical_kmedians(points: np.ndarray, k: int, restarts: int = 10, seed: int = 0,
                       max_iter: int = 100) -> KMediansResult:
    """Best of ``restarts`` alternating k-medians runs with centers on the unit sphere.

    Restart ``j`` draws from its own stream ``(seed, j)``, so the result does
    not depend on the order in which restarts are evaluated.
    """
    X = np.asarray(points, dtype=float)
    m = X.shape[0]
    if not 1 <= k <= m:
        raise DimensionMismatch(f"need 1 <= k <= number of points, got k={k}, m={m}")
    root = [int(x) for x in np.atleast_1d(seed)]
    best = None
    for j in range(max(1, restarts)):
        rng = np.random.default_rng(root + [j])
        labels, C, trace, it = _kmedians_run(X, k, rng, max_iter)
        obj = float(np.linalg.norm(X - C[labels], axis=1).sum())
        if best is None or obj < best.objective:
            best = KMediansResult(labels, C, obj, j + 1, it, trace)
    best.restarts_used = max(1, restarts)
    return best


@dataclass(frozen=True)
class DetectConfig:
    """Settings shared by the detection entry points.

    ``bandwidth=None`` selects the bandwidth per period by Lepski's method
    over ``0..min(t, r_max)``; ``r_max`` defaults to ``T // 2``.
    """

    k_rows: int
    k_cols: int
    ell: int = DEFAULT_ELL
    bandwidth: int | None = None
    r_max: int | None = None
    restarts: int = 10
    seed: int = 0
    alpha: float | str = "auto"


def _cluster_side(block, mask, k, seed, restarts):
    pts, keep = spherical_normalize(block, mask)
    labels = np.zeros(block.shape[0], dtype=np.int64)
    if k == 1 or pts.shape[0] == 0:
        return labels
    kk = min(k, pts.shape[0])
    res = spherical_kmedians(pts, kk, restarts=restarts, seed=seed)
    labels[keep] = res.labels
    return labels


def cluster_similarities(raw, config: DetectConfig, diagnostics: dict | None = None) -> MembershipSequence:
    """Smooth, embed and co-cluster a raw similarity sequence."""
    raw = raw.mats if isinstance(raw, SimilaritySequence) else np.asarray(raw, dtype=float)
    T, n = raw.shape[0], raw.shape[1]
    K = min(config.k_rows, config.k_cols)
    r_cap = T // 2 if config.r_max is None else config.r_max
    rows = np.zeros((T, n), dtype=np.int64)
    cols = np.zeros((T, n), dtype=np.int64)
    bws = []
    for t in range(T):
        if config.bandwidth is None:
            r = lepski_bandwidth(raw, t, config.ell, min(t, r_cap))
        else:
            r = min(int(config.bandwidth), t)
        bws.append(r)
        S_hat = raw[t] if r == 0 else smooth_similarity(raw, t, kernel_for(r, config.ell))
        emb = truncated_svd(S_hat, K)
        rows[t] = _cluster_side(emb.U, emb.zero_rows_U, config.k_rows, [config.seed, 0], config.restarts)
        cols[t] = _cluster_side(emb.V, emb.zero_rows_V, config.k_cols, [config.seed, 1], config.restarts)
    if diagnostics is not None:
        diagnostics["bandwidths"] = bws
    return MembershipSequence(rows, cols, config.k_rows, config.k_cols)


def detect_communities(adj: AdjacencySequence, cov: CovariateMatrix | None, config: DetectConfig,
                       weights: CovariateWeights | None = None,
                       diagnostics: dict | None = None) -> MembershipSequence:
    """Dynamic covariate-assisted co-clustering of a directed network sequence."""
    K = min(config.k_rows, config.k_cols)
    raw, alphas = raw_similarities(adj, cov, weights, K, config.alpha)
    if diagnostics is not None:
        diagnostics["alpha"] = alphas.values.tolist()
    return cluster_similarities(raw, config, diagnostics)


def detect_disim_dc(adj: AdjacencySequence, config: DetectConfig,
                    diagnostics: dict | None = None) -> MembershipSequence:
    """Per-period degree-corrected co-clustering of the Laplacian alone."""
    return detect_communities(adj, None, replace(config, alpha=0.0, bandwidth=0), diagnostics=diagnostics)


def detect_casc_static(adj: AdjacencySequence, cov: CovariateMatrix, config: DetectConfig,
                       weights: CovariateWeights | None = None,
                       diagnostics: dict | None = None) -> MembershipSequence:
    """Covariate-assisted co-clustering applied period by period, no smoothing."""
    return detect_communities(adj, cov, replace(config, bandwidth=0), weights, diagnostics)
