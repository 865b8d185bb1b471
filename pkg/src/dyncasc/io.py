"""Long-format CSV readers and writers.

Formats (header line first):

* edges        ``t,src,dst``                         one row per directed edge
* covariates   ``node,cov,value``                    sparse triplets, absent = 0
* memberships  ``t,node,row_community,col_community``
* returns      ``date,symbol,return``                absent cells are missing
* bench        ``method,n,s,replication,row_rate,col_rate``

Floats are written with ``repr`` so that reading a file back reproduces
the value bit for bit.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import FormatError
from .model import AdjacencySequence, CovariateMatrix, MembershipSequence, NodeIndex, ReturnPanel

EDGE_HEADER = ["t", "src", "dst"]
COV_HEADER = ["node", "cov", "value"]
MEMBERSHIP_HEADER = ["t", "node", "row_community", "col_community"]
RETURN_HEADER = ["date", "symbol", "return"]
BENCH_HEADER = ["method", "n", "s", "replication", "row_rate", "col_rate"]

_INT = re.compile(r"^-?\d+$")


def natural_order(labels) -> list[str]:
    """Numeric labels sort numerically, anything else lexicographically."""
    labels = sorted(set(map(str, labels)))
    if labels and all(_INT.match(x) for x in labels):
        return sorted(labels, key=int)
    return labels


def _rows(path, header):
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != header:
            raise FormatError(f"{path}:1: expected header {','.join(header)}, got {first}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, [c.strip() for c in row]


def _writer(path, header):
    fh = open(Path(path), "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


def _int(path, lineno, value, what):
    if not _INT.match(value):
        raise FormatError(f"{path}:{lineno}: {what} {value!r} is not an integer")
    return int(value)


def _float(path, lineno, value, what):
    try:
        return float(value)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: {what} {value!r} is not a number") from None


def write_edges(path, adj: AdjacencySequence, nodes: NodeIndex | None = None):
    nodes = nodes or NodeIndex.range(adj.n_nodes)
    fh, w = _writer(path, EDGE_HEADER)
    with fh:
        for t, A in enumerate(adj.mats):
            coo = A.tocoo()
            order = np.lexsort((coo.col, coo.row))
            for i, j in zip(coo.row[order], coo.col[order]):
                w.writerow([t, nodes.label_of(i), nodes.label_of(j)])


def read_edge_triples(path):
    out = []
    for lineno, (t, src, dst) in _rows(path, EDGE_HEADER):
        t = _int(path, lineno, t, "period")
        if t < 0:
            raise FormatError(f"{path}:{lineno}: negative period {t}")
        if src == dst:
            raise FormatError(f"{path}:{lineno}: self-loop on {src}")
        out.append((t, src, dst, lineno))
    return out


def read_edges(path, nodes: NodeIndex | None = None, n_periods: int | None = None):
    """Read an edge list; returns ``(AdjacencySequence, NodeIndex)``.

    Without ``nodes`` the node set is every label seen, in natural order.
    """
    triples = read_edge_triples(path)
    if nodes is None:
        nodes = NodeIndex(tuple(natural_order([x for _, s, d, _ in triples for x in (s, d)])))
    T = n_periods if n_periods is not None else (max((t for t, *_ in triples), default=0) + 1)
    n = len(nodes)
    rows = [[] for _ in range(T)]
    cols = [[] for _ in range(T)]
    for t, s, d, lineno in triples:
        if t >= T:
            raise FormatError(f"{path}:{lineno}: period {t} beyond {T} periods")
        if s not in nodes or d not in nodes:
            raise FormatError(f"{path}:{lineno}: unknown node in edge {s}->{d}")
        rows[t].append(nodes.id_of(s))
        cols[t].append(nodes.id_of(d))
    mats = []
    for t in range(T):
        A = sp.csr_matrix((np.ones(len(rows[t]), dtype=np.int8), (rows[t], cols[t])), shape=(n, n))
        A.sum_duplicates()
        A.data[:] = 1
        mats.append(A)
    return AdjacencySequence(tuple(mats)), nodes


def write_covariates(path, cov: CovariateMatrix, nodes: NodeIndex | None = None):
    nodes = nodes or NodeIndex.range(cov.n_nodes)
    fh, w = _writer(path, COV_HEADER)
    with fh:
        for i in range(cov.n_nodes):
            for a in range(cov.n_covariates):
                v = cov.X[i, a]
                if v != 0:
                    w.writerow([nodes.label_of(i), cov.names[a], repr(float(v))])


def read_covariates(path, nodes: NodeIndex | None = None, names=None):
    """Read covariate triplets; returns ``(CovariateMatrix, NodeIndex)``."""
    trip = [(lineno, node, c, _float(path, lineno, v, "value")) for lineno, (node, c, v) in _rows(path, COV_HEADER)]
    if nodes is None:
        nodes = NodeIndex(tuple(natural_order([node for _, node, _, _ in trip])))
    if names is None:
        names = natural_order([c for _, _, c, _ in trip])
    col = {c: a for a, c in enumerate(names)}
    X = np.zeros((len(nodes), len(names)))
    for lineno, node, c, v in trip:
        if node not in nodes:
            raise FormatError(f"{path}:{lineno}: unknown node {node}")
        if c not in col:
            raise FormatError(f"{path}:{lineno}: unknown covariate {c}")
        if not np.isfinite(v):
            raise FormatError(f"{path}:{lineno}: non-finite covariate value")
        X[nodes.id_of(node), col[c]] = v
    return CovariateMatrix(X, tuple(names)), nodes


def write_memberships(path, mem: MembershipSequence, nodes: NodeIndex | None = None):
    nodes = nodes or NodeIndex.range(mem.n_nodes)
    fh, w = _writer(path, MEMBERSHIP_HEADER)
    with fh:
        for t in range(mem.n_periods):
            for i in range(mem.n_nodes):
                w.writerow([t, nodes.label_of(i), int(mem.row_labels[t, i]), int(mem.col_labels[t, i])])


def read_memberships(path, nodes: NodeIndex | None = None, k_rows=None, k_cols=None):
    recs = []
    for lineno, (t, node, r, c) in _rows(path, MEMBERSHIP_HEADER):
        recs.append((_int(path, lineno, t, "period"), node,
                     _int(path, lineno, r, "row community"), _int(path, lineno, c, "column community"), lineno))
    if nodes is None:
        nodes = NodeIndex(tuple(natural_order([node for _, node, *_ in recs])))
    T = max((t for t, *_ in recs), default=-1) + 1
    R = np.full((T, len(nodes)), -1, dtype=np.int64)
    C = np.full((T, len(nodes)), -1, dtype=np.int64)
    for t, node, r, c, lineno in recs:
        if node not in nodes:
            raise FormatError(f"{path}:{lineno}: unknown node {node}")
        R[t, nodes.id_of(node)] = r
        C[t, nodes.id_of(node)] = c
    if (R < 0).any() or (C < 0).any():
        raise FormatError(f"{path}: some (period, node) pairs have no or negative labels")
    k_rows = k_rows or int(R.max()) + 1
    k_cols = k_cols or int(C.max()) + 1
    return MembershipSequence(R, C, k_rows, k_cols), nodes


def write_returns(path, panel: ReturnPanel):
    fh, w = _writer(path, RETURN_HEADER)
    with fh:
        for t, d in enumerate(panel.dates):
            for j, s in enumerate(panel.symbols):
                if panel.mask[t, j]:
                    w.writerow([d, s, repr(float(panel.returns[t, j]))])


def read_returns(path, symbols=None) -> ReturnPanel:
    recs = []
    for lineno, (d, s, r) in _rows(path, RETURN_HEADER):
        try:
            np.datetime64(d, "D")
        except ValueError:
            raise FormatError(f"{path}:{lineno}: date {d!r} is not ISO-8601") from None
        recs.append((d, s, _float(path, lineno, r, "return"), lineno))
    dates = sorted({d for d, *_ in recs})
    symbols = list(symbols) if symbols is not None else natural_order([s for _, s, *_ in recs])
    di = {d: i for i, d in enumerate(dates)}
    si = {s: j for j, s in enumerate(symbols)}
    R = np.zeros((len(dates), len(symbols)))
    M = np.zeros_like(R, dtype=bool)
    for d, s, r, lineno in recs:
        if s not in si:
            raise FormatError(f"{path}:{lineno}: unknown symbol {s}")
        if M[di[d], si[s]]:
            raise FormatError(f"{path}:{lineno}: duplicate return for {s} on {d}")
        if not np.isfinite(r):
            raise FormatError(f"{path}:{lineno}: non-finite return")
        R[di[d], si[s]] = r
        M[di[d], si[s]] = True
    return ReturnPanel(tuple(dates), tuple(symbols), R, M)


def write_bench(path, rows):
    fh, w = _writer(path, BENCH_HEADER)
    with fh:
        for r in rows:
            w.writerow([r["method"], int(r["n"]), int(r["s"]), int(r["replication"]),
                        repr(float(r["row_rate"])), repr(float(r["col_rate"]))])


def read_bench(path) -> list[dict]:
    out = []
    for lineno, (m, n, s, rep, rr, cr) in _rows(path, BENCH_HEADER):
        out.append({"method": m, "n": _int(path, lineno, n, "n"), "s": _int(path, lineno, s, "s"),
                    "replication": _int(path, lineno, rep, "replication"),
                    "row_rate": _float(path, lineno, rr, "row_rate"),
                    "col_rate": _float(path, lineno, cr, "col_rate")})
    return out
