"""One-sided discrete boundary kernels, temporal smoothing and Lepski bandwidth."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InfeasibleKernel, InsufficientHistory

DEFAULT_ELL = 4


@dataclass(frozen=True)
class KernelSpec:
    """Weights on the offsets ``-r, ..., 0`` (oldest first)."""

    r: int
    ell: int
    exact: tuple[Fraction, ...]

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.r, 1)

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.exact])

    @property
    def w_max(self) -> float:
        return float(max(abs(w) for w in self.exact))

    def moments(self) -> np.ndarray:
        """(1/|F_r|) sum_i i^k W(i) for k = 0..ell-1, in floating point."""
        i = self.offsets.astype(float)
        w = self.weights
        return np.array([np.sum(i ** k * w) for k in range(self.ell)]) / (self.r + 1)


@dataclass(frozen=True, eq=False)
class SimilaritySequence:
    """Stack of T dense N x N similarity matrices, raw or smoothed."""

    mats: np.ndarray
    smoothed: bool = False
    bandwidths: tuple[int, ...] | None = None

    def __post_init__(self):
        S = np.asarray(self.mats, dtype=float)
        if S.ndim != 3 or S.shape[1] != S.shape[2]:
            raise ValueError("similarities must be T x N x N")
        S.setflags(write=False)
        object.__setattr__(self, "mats", S)

    def __len__(self):
        return self.mats.shape[0]

    def __getitem__(self, idx):
        return self.mats[idx]

    @property
    def n_nodes(self) -> int:
        return self.mats.shape[1]


def _stack(raw) -> np.ndarray:
    if isinstance(raw, SimilaritySequence):
        return raw.mats
    return np.asarray(raw, dtype=float)


def _solve_fractions(G, b):
    """Gauss-Jordan elimination over the rationals."""
    n = len(b)
    M = [list(G[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if M[i][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for i in range(n):
            if i != col and M[i][col] != 0:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[col])]
    return [M[i][n] for i in range(n)]


@lru_cache(maxsize=None)
def build_kernel(r: int, ell: int = DEFAULT_ELL) -> KernelSpec:
    """Minimum-norm weights satisfying the moment conditions exactly.

    The constraints sum_i i^k W(i) = (r+1) [k == 0] for k < ell form an
    underdetermined Vandermonde system A w = b; the minimum-norm solution
    is w = A^T (A A^T)^{-1} b, computed here in exact rational arithmetic.
    """
    r, ell = int(r), int(ell)
    if r < 0 or ell < 1:
        raise InfeasibleKernel(f"need r >= 0 and ell >= 1, got r={r}, ell={ell}")
    if ell > r + 1:
        raise InfeasibleKernel(f"ell={ell} moment conditions cannot be met with {r + 1} weights")
    offsets = range(-r, 1)
    # 0 ** 0 == 1 for Python ints, which is the convention the k=0 row needs
    A = [[Fraction(i) ** k for i in offsets] for k in range(ell)]
    G = [[sum(a * c for a, c in zip(A[p], A[q])) for q in range(ell)] for p in range(ell)]
    b = [Fraction(r + 1)] + [Fraction(0)] * (ell - 1)
    y = _solve_fractions(G, b)
    w = tuple(sum(A[k][j] * y[k] for k in range(ell)) for j in range(r + 1))
    return KernelSpec(r, ell, w)


def kernel_for(r: int, ell: int = DEFAULT_ELL) -> KernelSpec:
    """Kernel with the order clipped to what ``r + 1`` weights can support."""
    return build_kernel(r, min(ell, r + 1))


def smooth_similarity(raw, t: int, kernel: KernelSpec) -> np.ndarray:
    """Weighted average of ``raw[t - r], ..., raw[t]`` with the kernel weights."""
    r = kernel.r
    if t < r:
        raise InsufficientHistory(f"period {t} has only {t} earlier periods, bandwidth {r}")
    stack = _stack(raw)[t - r:t + 1]
    return np.tensordot(kernel.weights, stack, axes=1) / (r + 1)


def spectral_norm(M: np.ndarray, tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Largest singular value by power iteration on M^T M."""
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        return 0.0
    n = M.shape[1]
    # deterministic start that is not orthogonal to typical leading vectors
    v = 1.0 + np.arange(n) / (7.0 * n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector fell in the null space; restart on a column
            v = M[np.argmax(np.abs(M).sum(axis=1))].copy()
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        new = np.sqrt(nw)
        if abs(new - est) <= tol * new:
            return float(new)
        est = new
    return float(est)


def lepski_threshold(raw, t: int, rho: int, w_max: float) -> float:
    S_t = _stack(raw)[t]
    n = S_t.shape[0]
    return 4.0 * w_max * np.sqrt(n * np.max(np.abs(S_t)) / max(rho, 1))


def lepski_feasible(raw, t: int, ell: int = DEFAULT_ELL, r_max: int | None = None) -> list[bool]:
    """Feasibility of each candidate bandwidth ``0..r_max``."""
    if r_max is None:
        r_max = t
    if r_max > t:
        raise InsufficientHistory(f"r_max={r_max} exceeds available history {t}")
    raw = _stack(raw)
    kernels = [kernel_for(r, ell) for r in range(r_max + 1)]
    w_max = max(k.w_max for k in kernels)
    est = [smooth_similarity(raw, t, k) for k in kernels]
    thr = [lepski_threshold(raw, t, rho, w_max) for rho in range(r_max + 1)]
    feasible = [True]
    for r in range(1, r_max + 1):
        ok = True
        for rho in range(r):
            D = est[r] - est[rho]
            # Frobenius norm bounds the spectral norm from above
            if np.linalg.norm(D) <= thr[rho]:
                continue
            if spectral_norm(D) > thr[rho]:
                ok = False
                break
        feasible.append(ok)
    return feasible


def lepski_bandwidth(raw, t: int, ell: int = DEFAULT_ELL, r_max: int | None = None) -> int:
    """Largest bandwidth whose estimate stays within the noise band of all smaller ones.

    ``r_max`` defaults to ``min(t, T // 2)``.
    """
    if r_max is None:
        r_max = min(t, len(raw) // 2)
    feasible = lepski_feasible(raw, t, ell, r_max)
    return max(r for r, ok in enumerate(feasible) if ok)
