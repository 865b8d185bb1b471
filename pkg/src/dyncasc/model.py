"""Shared domain types and input validation.

All containers are frozen dataclasses whose arrays are made read-only on
construction, so instances can be handed to worker threads without copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, RangeViolation


def _frozen(a, dtype=None):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NodeIndex:
    """Bijection between node labels (e.g. tickers) and integer ids."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError("node labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_ids", {lab: i for i, lab in enumerate(labels)})

    @classmethod
    def range(cls, n: int) -> "NodeIndex":
        return cls(tuple(str(i) for i in range(n)))

    def __len__(self):
        return len(self.labels)

    def id_of(self, label: str) -> int:
        return self._ids[str(label)]

    def label_of(self, idx: int) -> str:
        return self.labels[idx]

    def __contains__(self, label):
        return str(label) in self._ids


@dataclass(frozen=True, eq=False)
class AdjacencySequence:
    """T sparse binary directed adjacency matrices on a fixed node set."""

    mats: tuple

    def __post_init__(self):
        mats = []
        for A in self.mats:
            A = sp.csr_matrix(A, dtype=np.int8)
            A.eliminate_zeros()
            A.sort_indices()
            mats.append(A)
        if not mats:
            raise ValueError("an adjacency sequence needs at least one period")
        n = mats[0].shape[0]
        for t, A in enumerate(mats):
            if A.shape != (n, n):
                raise DimensionMismatch(f"period {t}: shape {A.shape}, expected {(n, n)}")
        object.__setattr__(self, "mats", tuple(mats))

    @classmethod
    def from_dense(cls, arrays) -> "AdjacencySequence":
        return cls(tuple(np.asarray(a) for a in arrays))

    @property
    def n_nodes(self) -> int:
        return self.mats[0].shape[0]

    @property
    def n_periods(self) -> int:
        return len(self.mats)

    def dense(self, t: int) -> np.ndarray:
        return self.mats[t].toarray().astype(float)

    def __eq__(self, other):
        if not isinstance(other, AdjacencySequence) or other.n_periods != self.n_periods:
            return False
        return all(a.shape == b.shape and (a != b).nnz == 0 for a, b in zip(self.mats, other.mats))

    def permute(self, perm) -> "AdjacencySequence":
        """Relabel nodes so that new node ``k`` is old node ``perm[k]``."""
        perm = np.asarray(perm)
        return AdjacencySequence(tuple(A[perm][:, perm] for A in self.mats))


@dataclass(frozen=True, eq=False)
class CovariateMatrix:
    """N x R node covariates, static over time."""

    X: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DimensionMismatch("covariate matrix must be 2-D")
        object.__setattr__(self, "X", _frozen(X))
        names = self.names
        if names is None:
            names = tuple(f"c{a}" for a in range(X.shape[1]))
        names = tuple(str(x) for x in names)
        if len(names) != X.shape[1]:
            raise DimensionMismatch("one name per covariate column required")
        object.__setattr__(self, "names", names)

    @property
    def n_nodes(self) -> int:
        return self.X.shape[0]

    @property
    def n_covariates(self) -> int:
        return self.X.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, CovariateMatrix)
            and self.names == other.names
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X)
        )


@dataclass(frozen=True, eq=False)
class CovariateWeights:
    """Per-period R x R covariate interaction weights."""

    mats: np.ndarray  # T x R x R

    def __post_init__(self):
        W = np.asarray(self.mats, dtype=float)
        if W.ndim == 2:
            W = W[None]
        if W.ndim != 3 or W.shape[1] != W.shape[2]:
            raise DimensionMismatch("weights must be T x R x R")
        object.__setattr__(self, "mats", _frozen(W))

    @classmethod
    def constant(cls, W, n_periods: int) -> "CovariateWeights":
        W = np.asarray(W, dtype=float)
        return cls(np.repeat(W[None], n_periods, axis=0))

    @property
    def n_periods(self) -> int:
        return self.mats.shape[0]

    def at(self, t: int) -> np.ndarray:
        # a single matrix is broadcast to every period
        return self.mats[0] if self.mats.shape[0] == 1 else self.mats[t]


@dataclass(frozen=True, eq=False)
class MembershipSequence:
    """Hard row/column community labels for each period.

    Labels are stored as integer vectors; :meth:`one_hot` materialises the
    clustering matrix when needed.
    """

    row_labels: np.ndarray  # T x N
    col_labels: np.ndarray  # T x N
    k_rows: int
    k_cols: int

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.row_labels, dtype=np.int64))
        C = np.atleast_2d(np.asarray(self.col_labels, dtype=np.int64))
        if R.shape != C.shape:
            raise DimensionMismatch(f"row labels {R.shape} vs column labels {C.shape}")
        if R.size and (R.min() < 0 or R.max() >= self.k_rows):
            raise RangeViolation("row label outside [0, k_rows)")
        if C.size and (C.min() < 0 or C.max() >= self.k_cols):
            raise RangeViolation("column label outside [0, k_cols)")
        object.__setattr__(self, "row_labels", _frozen(R))
        object.__setattr__(self, "col_labels", _frozen(C))
        object.__setattr__(self, "k_rows", int(self.k_rows))
        object.__setattr__(self, "k_cols", int(self.k_cols))

    @property
    def n_periods(self) -> int:
        return self.row_labels.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.row_labels.shape[1]

    def labels(self, t: int, side: str = "row") -> np.ndarray:
        return self.row_labels[t] if side == "row" else self.col_labels[t]

    def one_hot(self, t: int, side: str = "row") -> np.ndarray:
        lab = self.labels(t, side)
        k = self.k_rows if side == "row" else self.k_cols
        Z = np.zeros((lab.size, k))
        Z[np.arange(lab.size), lab] = 1.0
        return Z

    def empty_communities(self) -> list[tuple[int, str, int]]:
        """(period, side, community) triples with no members."""
        out = []
        for t in range(self.n_periods):
            for side, k, lab in (("row", self.k_rows, self.row_labels[t]),
                                 ("col", self.k_cols, self.col_labels[t])):
                counts = np.bincount(lab, minlength=k)
                out.extend((t, side, c) for c in np.flatnonzero(counts == 0))
        return out

    def __eq__(self, other):
        return (
            isinstance(other, MembershipSequence)
            and self.k_rows == other.k_rows
            and self.k_cols == other.k_cols
            and np.array_equal(self.row_labels, other.row_labels)
            and np.array_equal(self.col_labels, other.col_labels)
        )


@dataclass(frozen=True, eq=False)
class BlockProbabilitySequence:
    mats: np.ndarray  # T x K_R x K_C

    def __post_init__(self):
        B = np.asarray(self.mats, dtype=float)
        if B.ndim == 2:
            B = B[None]
        if B.min() < 0 or B.max() > 1:
            raise RangeViolation("block probabilities must lie in [0, 1]")
        object.__setattr__(self, "mats", _frozen(B))

    @property
    def n_periods(self) -> int:
        return self.mats.shape[0]


@dataclass(frozen=True, eq=False)
class DegreeParameters:
    psi_row: np.ndarray
    psi_col: np.ndarray

    def __post_init__(self):
        for name in ("psi_row", "psi_col"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v <= 0):
                raise RangeViolation(f"{name} must be strictly positive")
            object.__setattr__(self, name, _frozen(v))


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """T x N simple returns with a validity mask for missing cells."""

    dates: tuple[str, ...]
    symbols: tuple[str, ...]
    returns: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        R = np.asarray(self.returns, dtype=float)
        dates = tuple(str(d) for d in self.dates)
        symbols = tuple(str(s) for s in self.symbols)
        if R.shape != (len(dates), len(symbols)):
            raise DimensionMismatch(f"returns {R.shape} vs {len(dates)} dates x {len(symbols)} symbols")
        mask = np.isfinite(R) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if mask.shape != R.shape:
            raise DimensionMismatch("mask shape differs from returns")
        if not np.all(np.isfinite(R[mask])):
            raise RangeViolation("non-finite return in a cell flagged valid")
        R = np.where(mask, R, 0.0)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "returns", _frozen(R))
        object.__setattr__(self, "mask", _frozen(mask))

    @classmethod
    def from_array(cls, returns, symbols=None, dates=None, mask=None) -> "ReturnPanel":
        returns = np.asarray(returns, dtype=float)
        T, N = returns.shape
        if symbols is None:
            symbols = tuple(f"A{j}" for j in range(N))
        if dates is None:
            base = np.datetime64("2016-01-01")
            dates = tuple(str(base + np.timedelta64(i, "D")) for i in range(T))
        return cls(tuple(dates), tuple(symbols), returns, mask)

    @property
    def n_periods(self) -> int:
        return self.returns.shape[0]

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]

    def __eq__(self, other):
        return (
            isinstance(other, ReturnPanel)
            and self.dates == other.dates
            and self.symbols == other.symbols
            and np.array_equal(self.mask, other.mask)
            and np.array_equal(self.returns, other.returns)
        )


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self):
        return self.ok


def validate_bundle(adj: AdjacencySequence, cov: CovariateMatrix,
                    weights: CovariateWeights | None = None) -> ValidationReport:
    """Check the cross-object invariants of a detection input bundle.

    Nothing is raised; every violation is listed with its location.
    """
    report = ValidationReport()
    n = adj.n_nodes
    for t, A in enumerate(adj.mats):
        if A.shape != (n, n):
            report.issues.append(f"period {t}: adjacency shape {A.shape} != ({n}, {n})")
            continue
        for i in np.flatnonzero(A.diagonal()):
            report.issues.append(f"nonzero diagonal at ({t}, {i})")
        bad = np.setdiff1d(np.unique(A.data), [0, 1])
        if bad.size:
            report.issues.append(f"period {t}: non-binary adjacency values {bad.tolist()}")
    if cov.n_nodes != n:
        report.issues.append(f"covariate rows {cov.n_nodes} != adjacency nodes {n}")
    if cov.n_covariates < 1:
        report.issues.append("covariate matrix has no columns")
    if not np.all(np.isfinite(cov.X)):
        rows, cols = np.nonzero(~np.isfinite(cov.X))
        report.issues.append(f"non-finite covariate at {list(zip(rows.tolist(), cols.tolist()))}")
    if weights is not None:
        if weights.mats.shape[1] != cov.n_covariates:
            report.issues.append(
                f"weights are {weights.mats.shape[1]}x{weights.mats.shape[2]}, "
                f"expected {cov.n_covariates}x{cov.n_covariates}")
        if weights.n_periods not in (1, adj.n_periods):
            report.issues.append(f"weights cover {weights.n_periods} periods, adjacency {adj.n_periods}")
        for t, W in enumerate(weights.mats):
            if not np.all(np.isfinite(W)):
                report.issues.append(f"period {t}: non-finite weight")
            elif np.max(np.abs(W - W.T), initial=0.0) > 1e-12:
                a, b = np.unravel_index(np.argmax(np.abs(W - W.T)), W.shape)
                report.issues.append(f"period {t}: weight asymmetry at ({a}, {b})")
    return report
