"""Return-predictability networks from rolling-window adaptive Lasso regressions.

Each asset's standardized return is regressed on every other asset's
standardized return one day earlier; predictor ``j`` gets an edge ``j -> i``
when its adaptive-Lasso coefficient for target ``i`` is nonzero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConvergenceFailure, InsufficientHistory
from .model import AdjacencySequence, ReturnPanel


@dataclass(frozen=True)
class LassoConfig:
    window: int = 360
    gamma: float = 1.0
    n_lambda: int = 50
    lambda_ratio: float = 1e-4
    lambda_grid: tuple[float, ...] | None = None
    selection: str = "bic"
    ridge_fallback: float = 1e-4
    cond_max: float = 1e8
    tol: float = 1e-8
    max_sweeps: int = 10_000

    def __post_init__(self):
        if self.window < 30:
            raise ValueError("window must be at least 30 observations")
        if self.selection not in ("bic", "aic"):
            raise ValueError(f"unknown selection rule {self.selection!r}")
        if self.lambda_grid is not None and len(self.lambda_grid) == 0:
            raise ValueError("lambda grid must be nonempty")


@dataclass(eq=False)
class LassoFit:
    coef: np.ndarray
    intercept: float
    lam: float
    weights: np.ndarray
    lambdas: np.ndarray = field(repr=False)
    criterion: np.ndarray = field(repr=False)
    path: np.ndarray = field(repr=False)


def standardize_window(panel: ReturnPanel, t_end: int, window: int):
    """z-score every column over rows ``t_end - window .. t_end - 1``.

    Returns the standardized block and a boolean vector of excluded columns
    (zero variance or a missing value in the window); excluded columns are 0.
    """
    if t_end < window or t_end > panel.n_periods:
        raise InsufficientHistory(f"window of {window} rows ending before row {t_end} "
                                  f"is not inside a {panel.n_periods}-row panel")
    block = panel.returns[t_end - window:t_end]
    valid = panel.mask[t_end - window:t_end].all(axis=0)
    mu = block.mean(axis=0)
    sd = block.std(axis=0)
    excluded = ~valid | (sd <= 1e-12 * np.maximum(1.0, np.abs(mu)))
    Z = np.where(excluded, 0.0, (block - mu) / np.where(excluded, 1.0, sd))
    return Z, excluded


@njit(cache=True, nogil=True)
def _cd(G, c, yy, lam, pen, b, tol, max_sweeps):
    """Cyclic coordinate descent for 0.5 b'Gb - c'b + lam * sum(pen |b|).

    ``G`` and ``c`` are the scaled Gram matrix Z'Z/n and Z'y/n, so the
    objective equals the usual (1/2n)||y - Zb||^2 + penalty up to a constant.
    """
    p = G.shape[0]
    Gb = G @ b
    trace = []
    for sweep in range(max_sweeps):
        delta = 0.0
        for j in range(p):
            if not np.isfinite(pen[j]) or G[j, j] <= 0.0:
                if b[j] != 0.0:
                    for q in range(p):
                        Gb[q] -= G[q, j] * b[j]
                    b[j] = 0.0
                continue
            rho = c[j] - Gb[j] + G[j, j] * b[j]
            thr = lam * pen[j]
            if rho > thr:
                new = (rho - thr) / G[j, j]
            elif rho < -thr:
                new = (rho + thr) / G[j, j]
            else:
                new = 0.0
            d = new - b[j]
            if d != 0.0:
                for q in range(p):
                    Gb[q] += G[q, j] * d
                b[j] = new
                if abs(d) > delta:
                    delta = abs(d)
        obj = 0.5 * yy - c @ b + 0.5 * b @ Gb
        for j in range(p):
            if b[j] != 0.0:
                obj += lam * pen[j] * abs(b[j])
        trace.append(obj)
        if delta <= tol:
            return b, np.array(trace), True
    return b, np.array(trace), False


def lasso_cd(Z, y, lam: float, penalty=None, b0=None, tol: float = 1e-8, max_sweeps: int = 10_000):
    """Weighted Lasso on centred data; returns ``(coef, objective trace)``."""
    Z = np.ascontiguousarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = Z.shape
    pen = np.ones(p) if penalty is None else np.asarray(penalty, dtype=float)
    b = np.zeros(p) if b0 is None else np.array(b0, dtype=float)
    b, trace, ok = _cd(Z.T @ Z / n, Z.T @ y / n, float(y @ y / n), float(lam), pen, b, tol, max_sweeps)
    if not ok:
        raise ConvergenceFailure(f"coordinate descent did not reach tol={tol} in {max_sweeps} sweeps")
    return b, trace


def kkt_violation(Z, y, coef, lam: float, penalty) -> float:
    """Largest violation of the Lasso stationarity conditions (inf-weight predictors skipped)."""
    Z = np.asarray(Z, dtype=float)
    n = Z.shape[0]
    grad = Z.T @ (np.asarray(y) - Z @ coef) / n
    pen = np.asarray(penalty, dtype=float)
    worst = 0.0
    for j in range(Z.shape[1]):
        if not np.isfinite(pen[j]):
            continue
        bound = lam * pen[j]
        if coef[j] == 0:
            worst = max(worst, abs(grad[j]) - bound)
        else:
            worst = max(worst, abs(grad[j] - np.sign(coef[j]) * bound))
    return float(max(worst, 0.0))


def pilot_coefficients(Z, y, config: LassoConfig) -> np.ndarray:
    """OLS when the design is well conditioned, ridge otherwise."""
    n, p = Z.shape
    G = Z.T @ Z / n
    keep = np.diag(G) > 0
    b = np.zeros(p)
    if not keep.any():
        return b
    Gk = G[np.ix_(keep, keep)]
    rhs = Z[:, keep].T @ y / n
    if np.linalg.cond(Gk) < config.cond_max:
        b[keep] = np.linalg.solve(Gk, rhs)
    else:
        b[keep] = np.linalg.solve(Gk + config.ridge_fallback * np.eye(Gk.shape[0]), rhs)
    return b


def adaptive_lasso_fit(y, Z, config: LassoConfig = LassoConfig()) -> LassoFit:
    """Adaptive Lasso with the penalty level chosen by BIC (or AIC) over a grid."""
    y = np.asarray(y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    n, p = Z.shape
    ym, Zm = y.mean(), Z.mean(axis=0)
    yc, Zc = y - ym, np.ascontiguousarray(Z - Zm)
    pilot = pilot_coefficients(Zc, yc, config)
    with np.errstate(divide="ignore"):
        w = np.where(pilot == 0, np.inf, 1.0 / np.abs(pilot) ** config.gamma)
    G = Zc.T @ Zc / n
    c = Zc.T @ yc / n
    yy = float(yc @ yc / n)
    finite = np.isfinite(w) & (np.diag(G) > 0)
    lam_max = float(np.max(np.abs(c[finite]) / w[finite])) if finite.any() else 0.0
    if config.lambda_grid is not None:
        lambdas = np.sort(np.asarray(config.lambda_grid, dtype=float))[::-1]
    elif lam_max > 0:
        lambdas = np.geomspace(lam_max, lam_max * config.lambda_ratio, config.n_lambda)
    else:
        lambdas = np.array([0.0])
    pen_k = np.log(n) if config.selection == "bic" else 2.0
    b = np.zeros(p)
    crit, path = [], []
    for lam in lambdas:
        b, _, ok = _cd(G, c, yy, float(lam), w, b.copy(), config.tol, config.max_sweeps)
        if not ok:
            raise ConvergenceFailure(f"coordinate descent stalled at lambda={lam:.3g}")
        rss = float(np.sum((yc - Zc @ b) ** 2))
        k = int(np.count_nonzero(b))
        crit.append(n * np.log(rss / n) + k * pen_k if rss > 0 else -np.inf)
        path.append(b.copy())
    crit = np.array(crit)
    best = int(np.argmin(crit))
    coef = path[best]
    return LassoFit(coef, float(ym - Zm @ coef), float(lambdas[best]), w, lambdas, crit, np.array(path))


def adaptive_lasso_row(y, Z, config: LassoConfig = LassoConfig()) -> np.ndarray:
    return adaptive_lasso_fit(y, Z, config).coef


def infer_network(panel: ReturnPanel, config: LassoConfig, t_end: int) -> np.ndarray:
    """Directed adjacency from the window of ``config.window`` one-step regressions ending at ``t_end``.

    Uses panel rows ``t_end - window - 1 .. t_end - 1``; entry ``(j, i)`` is 1
    when asset ``j``'s lagged return enters the model for asset ``i``.
    """
    window = config.window
    if t_end < window + 1:
        raise InsufficientHistory(f"need {window + 1} rows before {t_end}")
    Zs, excluded = standardize_window(panel, t_end, window + 1)
    lagged, current = Zs[:-1], Zs[1:]
    n = panel.n_assets
    A = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        if excluded[i]:
            continue
        others = np.flatnonzero((np.arange(n) != i) & ~excluded)
        if others.size == 0:
            continue
        coef = adaptive_lasso_row(current[:, i], lagged[:, others], config)
        A[others[coef != 0], i] = 1
    return A


def infer_network_sequence(panel: ReturnPanel, config: LassoConfig, t_ends) -> AdjacencySequence:
    return AdjacencySequence(tuple(infer_network(panel, config, t) for t in t_ends))
