"""Synthetic dynamic degree-corrected contextual blockmodels.

Random streams are derived from the root seed by purpose and period
(``[seed, stream, t]``), so draws never depend on evaluation order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleConfig, RangeViolation
from .graph import alpha_tune, covariate_similarity, covariate_weights, laplacian_of
from .kernel import SimilaritySequence
from .model import (
    AdjacencySequence,
    BlockProbabilitySequence,
    CovariateMatrix,
    CovariateWeights,
    DegreeParameters,
    MembershipSequence,
)

log = logging.getLogger(__name__)

DEFAULT_B = np.array([
    [0.60, 0.30, 0.20, 0.10],
    [0.30, 0.50, 0.20, 0.10],
    [0.20, 0.20, 0.40, 0.10],
    [0.10, 0.10, 0.10, 0.30],
])

_MEMBERSHIP, _COVARIATES, _EDGES, _DEGREES = 1, 2, 3, 4


@dataclass(frozen=True)
class SimConfig:
    """Simulation design.

    ``degree_scale`` controls how the degree parameters enter the edge
    probability. ``"unit_sum"`` uses ``psi_i psi_j B`` with psi summing to one
    per block, which yields only O(K^2) expected edges per period;
    ``"block_size"`` multiplies each psi by its block size so that psi has
    mean one per block and uniform psi reproduces ``P = B``.
    """

    n: int = 200
    T: int = 10
    k_rows: int = 4
    k_cols: int = 4
    s: int = 10
    B_base: np.ndarray = field(default_factory=lambda: DEFAULT_B.copy())
    time_profile: str = "linear_ramp"
    R: int | None = None
    covariate_law: str = "uniform_0_10"
    degree_law: str = "uniform_within_block"
    degree_scale: str = "unit_sum"
    power_exponent: float = 2.5
    label_noise: float = 0.05
    tie_row_col: bool = False
    seed: int = 0

    def __post_init__(self):
        B = np.asarray(self.B_base, dtype=float)
        object.__setattr__(self, "B_base", B)
        if B.shape != (self.k_rows, self.k_cols):
            raise InfeasibleConfig(f"B_base is {B.shape}, expected {(self.k_rows, self.k_cols)}")
        if self.n < max(self.k_rows, self.k_cols):
            raise InfeasibleConfig(f"n={self.n} nodes cannot fill {max(self.k_rows, self.k_cols)} communities")
        if not 0 <= self.s <= self.n:
            raise InfeasibleConfig(f"s={self.s} switches must lie in [0, n={self.n}]")
        if self.T < 1:
            raise InfeasibleConfig("T must be positive")
        if self.tie_row_col and self.k_rows != self.k_cols:
            raise InfeasibleConfig("tied row/column memberships need k_rows == k_cols")
        if self.time_profile not in ("linear_ramp", "constant"):
            raise InfeasibleConfig(f"unknown time profile {self.time_profile!r}")
        if self.covariate_law not in ("uniform_0_10", "indicator"):
            raise InfeasibleConfig(f"unknown covariate law {self.covariate_law!r}")
        if self.degree_law not in ("uniform_within_block", "power"):
            raise InfeasibleConfig(f"unknown degree law {self.degree_law!r}")
        if self.degree_scale not in ("unit_sum", "block_size"):
            raise InfeasibleConfig(f"unknown degree scale {self.degree_scale!r}")

    @property
    def n_covariates(self) -> int:
        return self.R if self.R is not None else max(1, int(np.floor(np.log(self.n * self.T))))


def _rng(config, *stream):
    return np.random.default_rng([int(config.seed), *stream])


def _draw_labels(rng, n, k):
    while True:
        lab = rng.integers(k, size=n)
        if np.unique(lab).size == k:
            return lab


def _label_path(rng, config, k):
    n, s = config.n, config.s
    out = np.empty((config.T, n), dtype=np.int64)
    out[0] = _draw_labels(rng, n, k)
    for t in range(1, config.T):
        while True:
            lab = out[t - 1].copy()
            lab[:s] = rng.integers(k, size=s)
            if np.unique(lab).size == k:
                break
        out[t] = lab
    return out


def gen_memberships(config: SimConfig) -> MembershipSequence:
    """Random initial labels, then the first ``s`` nodes are re-drawn each period."""
    rows = _label_path(_rng(config, _MEMBERSHIP, 0), config, config.k_rows)
    cols = rows.copy() if config.tie_row_col else _label_path(_rng(config, _MEMBERSHIP, 1), config, config.k_cols)
    return MembershipSequence(rows, cols, config.k_rows, config.k_cols)


def time_factor(config: SimConfig, t: int) -> float:
    """Multiplier on ``B_base`` at 0-based period ``t`` (period ``t + 1`` of ``1..T``)."""
    if config.time_profile == "constant":
        return 1.0
    return (config.T + 2.0 * (t + 1)) / (2.0 * config.T)


def gen_block_probs(config: SimConfig) -> BlockProbabilitySequence:
    mats = np.array([config.B_base * time_factor(config, t) for t in range(config.T)])
    if mats.min() < 0 or mats.max() > 1 + 1e-12:
        t, a, b = np.unravel_index(np.argmax(mats), mats.shape)
        raise RangeViolation(f"block probability {mats[t, a, b]:.3f} at period {t}, block ({a}, {b}) leaves [0, 1]")
    return BlockProbabilitySequence(np.clip(mats, 0.0, 1.0))


def _block_normalize(raw, labels):
    sums = np.bincount(labels, weights=raw)
    return raw / sums[labels]


def gen_degrees(config: SimConfig, memberships: MembershipSequence) -> DegreeParameters:
    """Degree parameters normalised to sum to one within each period-0 block."""
    zr, zc = memberships.row_labels[0], memberships.col_labels[0]
    if config.degree_law == "uniform_within_block":
        raw_r = np.ones(config.n)
        raw_c = np.ones(config.n)
    else:
        rng = _rng(config, _DEGREES)
        # Pareto tail with the requested exponent, shifted to be >= 1
        raw_r = rng.pareto(config.power_exponent - 1.0, config.n) + 1.0
        raw_c = rng.pareto(config.power_exponent - 1.0, config.n) + 1.0
    return DegreeParameters(_block_normalize(raw_r, zr), _block_normalize(raw_c, zc))


def degree_multipliers(config: SimConfig, memberships: MembershipSequence, psi: DegreeParameters):
    """Per-node factors that multiply ``B`` in the edge probability."""
    if config.degree_scale == "unit_sum":
        return psi.psi_row, psi.psi_col
    zr, zc = memberships.row_labels[0], memberships.col_labels[0]
    size_r = np.bincount(zr, minlength=config.k_rows)[zr]
    size_c = np.bincount(zc, minlength=config.k_cols)[zc]
    return psi.psi_row * size_r, psi.psi_col * size_c


def edge_probabilities(B_t, zr, zc, theta_r, theta_c):
    P = theta_r[:, None] * theta_c[None, :] * B_t[np.ix_(zr, zc)]
    n_clip = int(np.count_nonzero(P > 1))
    if n_clip:
        log.warning("clipped %d edge probabilities above 1", n_clip)
    return np.clip(P, 0.0, 1.0)


def gen_covariates(config: SimConfig, memberships: MembershipSequence) -> CovariateMatrix:
    rng = _rng(config, _COVARIATES)
    n, R = config.n, config.n_covariates
    if config.covariate_law == "uniform_0_10":
        return CovariateMatrix(rng.uniform(0.0, 10.0, size=(n, R)))
    col = memberships.row_labels[0] % R
    noisy = rng.random(n) < config.label_noise
    col = np.where(noisy, rng.integers(R, size=n), col)
    X = np.zeros((n, R))
    X[np.arange(n), col] = 1.0
    return CovariateMatrix(X)


def gen_network(config: SimConfig):
    """Sample ``(adjacency, covariates, memberships, degree parameters)``."""
    memberships = gen_memberships(config)
    blocks = gen_block_probs(config)
    psi = gen_degrees(config, memberships)
    theta_r, theta_c = degree_multipliers(config, memberships, psi)
    mats = []
    for t in range(config.T):
        P = edge_probabilities(blocks.mats[t], memberships.row_labels[t], memberships.col_labels[t],
                               theta_r, theta_c)
        A = (_rng(config, _EDGES, t).random(P.shape) < P).astype(np.int8)
        np.fill_diagonal(A, 0)
        mats.append(A)
    return AdjacencySequence(tuple(mats)), gen_covariates(config, memberships), memberships, psi


def covariate_means(config: SimConfig) -> np.ndarray:
    """Expected covariate profile of each row community (K_R x R)."""
    R = config.n_covariates
    if config.covariate_law == "uniform_0_10":
        return np.full((config.k_rows, R), 5.0)
    M = np.full((config.k_rows, R), config.label_noise / R)
    M[np.arange(config.k_rows), np.arange(config.k_rows) % R] += 1.0 - config.label_noise
    return M


def population_similarity(memberships: MembershipSequence, blocks: BlockProbabilitySequence,
                          theta_row, theta_col, cov_means, weights=None, alpha="auto") -> SimilaritySequence:
    """Noiseless similarity built from expected adjacency and expected covariates.

    The expected covariate matrix at period t is ``Z_R,t @ cov_means``.
    ``weights`` defaults to the adoption-rate weights of that matrix.
    """
    K = min(memberships.k_rows, memberships.k_cols)
    mats = []
    for t in range(memberships.n_periods):
        zr, zc = memberships.row_labels[t], memberships.col_labels[t]
        A = np.clip(np.asarray(theta_row)[:, None] * np.asarray(theta_col)[None, :]
                    * blocks.mats[t][np.ix_(zr, zc)], 0.0, 1.0)
        L = laplacian_of(A)
        X = CovariateMatrix(memberships.one_hot(t, "row") @ cov_means)
        W = covariate_weights(X).at(0) if weights is None else (
            weights.at(t) if isinstance(weights, CovariateWeights) else np.asarray(weights))
        C = covariate_similarity(X, W)
        a = alpha_tune(L, C, K) if isinstance(alpha, str) else float(alpha)
        mats.append(L + a * C)
    return SimilaritySequence(np.array(mats))


def gen_population_similarity(config: SimConfig, memberships: MembershipSequence | None = None,
                              alpha="auto") -> SimilaritySequence:
    if memberships is None:
        memberships = gen_memberships(config)
    psi = gen_degrees(config, memberships)
    theta_r, theta_c = degree_multipliers(config, memberships, psi)
    return population_similarity(memberships, gen_block_probs(config), theta_r, theta_c,
                                 covariate_means(config), alpha=alpha)
