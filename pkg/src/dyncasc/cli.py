"""Command line front end: ``dyncasc {simulate,detect,infer,backtest,bench}``.

Options come from an optional JSON document (``--config``) whose keys use
the long flag names with underscores; any flag given on the command line
wins over the JSON value. Failures are reported on stderr as one JSON
object ``{"code": ..., "message": ...}`` with exit status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .backtest import run_backtest
from .bench import BenchConfig, run_bench
from .cluster import DetectConfig, detect_casc_static, detect_communities, detect_disim_dc
from .errors import DyncascError, InfeasibleConfig
from .model import NodeIndex, ReturnPanel
from .netinfer import LassoConfig, infer_network_sequence
from .simulate import SimConfig, gen_network

log = logging.getLogger("dyncasc")

DEFAULTS = {
    "k_rows": 4, "k_cols": 4, "ell": 4, "bandwidth": "auto", "restarts": 10, "method": "casc-dyn",
    "n": 200, "T": 10, "s": 10, "covariate_law": "uniform_0_10", "degree_law": "uniform_within_block",
    "degree_scale": None, "replications": 10, "axis": "n", "values": None, "workers": 1,
    "window": 360, "step": 1, "gamma": 1.0, "offset": 0, "side": "col", "max_horizon": 7,
}


def _bandwidth(v):
    if v is None or str(v).lower() == "auto":
        return None
    return int(v)


def _values(v):
    if v is None or isinstance(v, list):
        return v
    return [int(x) for x in str(v).split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyncasc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="JSON file with default option values")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", type=Path)
        sp.add_argument("--method", choices=["casc-dyn", "casc-static", "disim-dc"])
        sp.add_argument("--k-rows", type=int)
        sp.add_argument("--k-cols", type=int)
        sp.add_argument("--ell", type=int)
        sp.add_argument("--bandwidth", help="integer bandwidth or 'auto' for Lepski selection")
        sp.add_argument("--restarts", type=int)
        sp.add_argument("--replications", type=int)
        sp.add_argument("-v", "--verbose", action="store_true")
        return sp

    s = common(sub.add_parser("simulate", help="write a synthetic network bundle"))
    s.add_argument("--n", type=int)
    s.add_argument("--T", type=int)
    s.add_argument("--s", type=int)
    s.add_argument("--covariate-law", choices=["uniform_0_10", "indicator"])
    s.add_argument("--degree-law", choices=["uniform_within_block", "power"])
    s.add_argument("--degree-scale", choices=["unit_sum", "block_size"])

    d = common(sub.add_parser("detect", help="estimate memberships from edges and covariates"))
    d.add_argument("--edges", type=Path)
    d.add_argument("--covariates", type=Path)

    i = common(sub.add_parser("infer", help="infer predictability networks from a return panel"))
    i.add_argument("--returns", type=Path)
    i.add_argument("--window", type=int)
    i.add_argument("--step", type=int)
    i.add_argument("--gamma", type=float)

    b = common(sub.add_parser("backtest", help="community momentum portfolio table"))
    b.add_argument("--returns", type=Path)
    b.add_argument("--memberships", type=Path)
    b.add_argument("--offset", type=int, help="panel row of membership period 0")
    b.add_argument("--side", choices=["row", "col"])
    b.add_argument("--max-horizon", type=int)

    be = common(sub.add_parser("bench", help="misclustering rates over an n or s grid"))
    be.add_argument("--axis", choices=["n", "s"])
    be.add_argument("--values", help="comma separated grid values")
    be.add_argument("--n", type=int)
    be.add_argument("--T", type=int)
    be.add_argument("--s", type=int)
    be.add_argument("--workers", type=int)
    be.add_argument("--degree-scale", choices=["unit_sum", "block_size"])
    return p


def resolve(args) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            opts.update(json.loads(Path(args.config).read_text()))
        except OSError as exc:
            raise DyncascError(f"{args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise DyncascError(f"{args.config}: invalid JSON ({exc})") from exc
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            opts[k] = v
    return opts


def _need(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise InfeasibleConfig("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _path(opts, key):
    return Path(opts[key])


def cmd_simulate(opts):
    _need(opts, "seed", "out")
    kr, kc = int(opts["k_rows"]), int(opts["k_cols"])
    B = np.asarray(opts["B_base"], dtype=float) if "B_base" in opts else _default_b(kr, kc)
    cfg = SimConfig(n=int(opts["n"]), T=int(opts["T"]), k_rows=kr, k_cols=kc, s=int(opts["s"]), B_base=B,
                    covariate_law=opts["covariate_law"], degree_law=opts["degree_law"],
                    degree_scale=opts["degree_scale"] or "unit_sum", seed=int(opts["seed"]))
    adj, cov, truth, _ = gen_network(cfg)
    out = _path(opts, "out")
    out.mkdir(parents=True, exist_ok=True)
    io.write_edges(out / "edges.csv", adj)
    io.write_covariates(out / "covariates.csv", cov)
    io.write_memberships(out / "truth.csv", truth)


def _default_b(kr, kc):
    from .simulate import DEFAULT_B
    if (kr, kc) != DEFAULT_B.shape:
        raise InfeasibleConfig("B_base must be given in the config unless k_rows = k_cols = 4")
    return DEFAULT_B


def cmd_detect(opts):
    _need(opts, "edges", "out")
    adj, nodes = io.read_edges(_path(opts, "edges"))
    cov = None
    if opts.get("covariates"):
        # the node set is the union of the two files
        _, c_nodes = io.read_covariates(_path(opts, "covariates"))
        nodes = NodeIndex(tuple(io.natural_order(list(nodes.labels) + list(c_nodes.labels))))
        adj, _ = io.read_edges(_path(opts, "edges"), nodes)
        cov, _ = io.read_covariates(_path(opts, "covariates"), nodes)
    cfg = DetectConfig(int(opts["k_rows"]), int(opts["k_cols"]), ell=int(opts["ell"]),
                       bandwidth=_bandwidth(opts["bandwidth"]), restarts=int(opts["restarts"]),
                       seed=int(opts.get("seed") or 0))
    method = opts["method"]
    if method != "disim-dc" and cov is None:
        raise InfeasibleConfig(f"method {method} needs --covariates")
    if method == "casc-dyn":
        mem = detect_communities(adj, cov, cfg)
    elif method == "casc-static":
        mem = detect_casc_static(adj, cov, cfg)
    else:
        mem = detect_disim_dc(adj, cfg)
    io.write_memberships(_path(opts, "out"), mem, nodes)


def cmd_infer(opts):
    _need(opts, "returns", "out")
    panel = io.read_returns(_path(opts, "returns"))
    cfg = LassoConfig(window=int(opts["window"]), gamma=float(opts["gamma"]))
    t_ends = list(range(cfg.window + 1, panel.n_periods + 1, int(opts["step"])))
    if not t_ends:
        raise InfeasibleConfig(f"panel of {panel.n_periods} days is shorter than window + 1 = {cfg.window + 1}")
    adj = infer_network_sequence(panel, cfg, t_ends)
    io.write_edges(_path(opts, "out"), adj, NodeIndex(panel.symbols))


def cmd_backtest(opts):
    _need(opts, "returns", "memberships", "out")
    panel = io.read_returns(_path(opts, "returns"))
    mem, _ = io.read_memberships(_path(opts, "memberships"), NodeIndex(panel.symbols))
    off = int(opts["offset"])
    sub = ReturnPanel(panel.dates[off:], panel.symbols, panel.returns[off:], panel.mask[off:])
    res = run_backtest(sub, mem, range(1, int(opts["max_horizon"]) + 1), side=opts["side"])
    out = _path(opts, "out")
    with open(out, "w", newline="") as fh:
        fh.write("portfolio,horizon,mean,tstat\n")
        for r in res.table():
            fh.write(f"{r['portfolio']},{r['horizon']},{r['mean']!r},{r['tstat']!r}\n")


def cmd_bench(opts):
    _need(opts, "seed", "out")
    axis = opts["axis"]
    values = _values(opts["values"])
    if values is None:
        values = list(range(20, 201, 20)) if axis == "n" else list(range(20, 101, 20))
    cfg = BenchConfig(axis=axis, values=tuple(values), n=int(opts["n"]), s=int(opts["s"]), T=int(opts["T"]),
                      k=int(opts["k_rows"]), replications=int(opts["replications"]), seed=int(opts["seed"]),
                      ell=int(opts["ell"]), bandwidth=_bandwidth(opts["bandwidth"]),
                      restarts=int(opts["restarts"]), workers=int(opts["workers"]),
                      degree_scale=opts["degree_scale"] or "block_size")
    io.write_bench(_path(opts, "out"), run_bench(cfg))


COMMANDS = {"simulate": cmd_simulate, "detect": cmd_detect, "infer": cmd_infer,
            "backtest": cmd_backtest, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](resolve(args))
    except DyncascError as exc:
        print(json.dumps({"code": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except OSError as exc:
        print(json.dumps({"code": "io_error", "message": f"{exc.filename}: {exc.strerror}"}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
