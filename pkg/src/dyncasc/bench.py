"""Monte Carlo comparison of the three detection methods on simulated networks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .cluster import DetectConfig, detect_casc_static, detect_communities, detect_disim_dc
from .evaluation import miscluster_sequence
from .simulate import DEFAULT_B, SimConfig, gen_network

METHODS = ("casc-dyn", "casc-static", "disim-dc")


@dataclass(frozen=True)
class BenchConfig:
    """Sweep over node counts (``axis='n'``) or switch counts (``axis='s'``)."""

    axis: str = "n"
    values: tuple[int, ...] = tuple(range(20, 201, 20))
    n: int = 200
    s: int = 10
    T: int = 10
    k: int = 4
    replications: int = 10
    seed: int = 0
    ell: int = 4
    bandwidth: int | None = None
    restarts: int = 10
    methods: tuple[str, ...] = METHODS
    covariate_law: str = "uniform_0_10"
    degree_law: str = "uniform_within_block"
    degree_scale: str = "block_size"
    B_base: np.ndarray = field(default_factory=lambda: DEFAULT_B.copy())
    workers: int = 1

    def __post_init__(self):
        if self.axis not in ("n", "s"):
            raise ValueError("axis must be 'n' or 's'")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")


def replication_seed(root: int, n: int, s: int, rep: int) -> int:
    """Seed for one cell; depends only on (root, n, s, rep), not on grid layout."""
    return int(np.random.SeedSequence([int(root), int(n), int(s), int(rep)]).generate_state(1)[0])


def run_cell(config: BenchConfig, n: int, s: int, rep: int) -> list[dict]:
    seed = replication_seed(config.seed, n, s, rep)
    sim = SimConfig(n=n, T=config.T, k_rows=config.k, k_cols=config.k, s=s, B_base=config.B_base,
                    covariate_law=config.covariate_law, degree_law=config.degree_law,
                    degree_scale=config.degree_scale, seed=seed)
    adj, cov, truth, _ = gen_network(sim)
    det = DetectConfig(config.k, config.k, ell=config.ell, bandwidth=config.bandwidth,
                       restarts=config.restarts, seed=seed)
    rows = []
    for method in config.methods:
        if method == "casc-dyn":
            est = detect_communities(adj, cov, det)
        elif method == "casc-static":
            est = detect_casc_static(adj, cov, det)
        else:
            est = detect_disim_dc(adj, det)
        rep_ = miscluster_sequence(est, truth)
        rows.append({"method": method, "n": n, "s": s, "replication": rep,
                     "row_rate": rep_.row_mean, "col_rate": rep_.col_mean})
    return rows


def run_bench(config: BenchConfig) -> list[dict]:
    """Rows ``(method, n, s, replication, row_rate, col_rate)`` in grid order.

    Cells may run on several threads; the output order and values do not
    depend on ``workers``.
    """
    cells = []
    for v in config.values:
        n, s = (v, config.s) if config.axis == "n" else (config.n, v)
        cells.extend((n, s, rep) for rep in range(config.replications))
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(lambda c: run_cell(config, *c), cells))
    else:
        results = [run_cell(config, *c) for c in cells]
    return [row for cell in results for row in cell]


def summarize(rows: list[dict]) -> dict:
    """Mean rates keyed by ``(method, n, s)``."""
    acc: dict = {}
    for r in rows:
        key = (r["method"], r["n"], r["s"])
        acc.setdefault(key, []).append((r["row_rate"], r["col_rate"]))
    return {k: tuple(np.mean(v, axis=0)) for k, v in acc.items()}


def with_overrides(config: BenchConfig, **kw) -> BenchConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
