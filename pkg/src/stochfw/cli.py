"""Command-line experiment runner.

Subcommands::

    stochfw gen-data --n 2000 --p 50 --seed 1 --out data/
    stochfw run experiment.json [--output DIR] [--seed S]
    stochfw compare experiment.json
    stochfw plot-data experiment.json

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import RunTrace, reference_optimum, run
from .diagnostics import audit_report
from .problems import (
    binding_alpha,
    build_elastic_net,
    elastic_net_ls,
    generate_synthetic,
    load_csv_dataset,
    synthetic_regression,
)
from .traceio import (
    ConfigError,
    ExperimentConfig,
    load_experiment,
    relative_gap,
    time_to_threshold,
    trace_from_csv,
    write_json,
    write_plot_data,
    write_trace_csv,
)

logger = logging.getLogger("stochfw")

THRESHOLDS = (1e-2, 1e-4, 1e-6)
MISSING = "—"
SUMMARY_FILE = "summary.json"
PLOT_FILE = "plot_data.csv"


class UsageError(Exception):
    pass


def build_problem(problem: dict):
    """Objective and polytope for a parsed ``problem`` section."""
    (kind, params), = problem.items()
    if kind == "synthetic":
        return generate_synthetic(params["n"], params["p"], params["l"], params["u"], params["seed"])
    if kind == "csv":
        A, b, _, _ = load_csv_dataset(params["path"], params["target_column"], params["standardize"],
                                      skip_header=params["skip_header"], max_rows=params["max_rows"])
        source = {"source": "csv", "path": params["path"]}
    else:
        A, b = synthetic_regression(params["n"], params["p"], params["seed"], params["noise"])
        source = {"source": "synthetic_regression", "seed": params["seed"]}
    if params.get("center_target", True):
        b = b - b.mean()
    alpha = params["alpha"]
    if alpha is None:
        alpha = binding_alpha(elastic_net_ls(A, b, params["mu"]), params["alpha_fraction"])
    obj, poly = build_elastic_net(A, b, params["mu"], alpha)
    obj.metadata.update(source, alpha=alpha, mu=params["mu"])
    return obj, poly


def _safe_name(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", label)


def trace_path(out: Path, label: str) -> Path:
    return out / f"trace_{_safe_name(label)}.csv"


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen_data(args) -> int:
    if args.n < 1 or args.p < 1:
        raise UsageError("--n and --p must be positive integers")
    if not args.l < args.u:
        raise UsageError("--l must be smaller than --u")
    obj, _ = generate_synthetic(args.n, args.p, args.l, args.u, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "A.csv", obj.A, fmt="%.17g", delimiter=",")
    np.savetxt(out / "b.csv", obj.b, fmt="%.17g", delimiter=",")
    write_json({"generator": "standard_normal", "n": args.n, "p": args.p, "l": args.l,
                "u": args.u, "seed": args.seed, "numpy_bit_generator": "PCG64"},
               out / "meta.json")
    print(f"wrote {out / 'A.csv'} ({args.n}x{args.p}), {out / 'b.csv'}, {out / 'meta.json'}")
    return 0


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the reference solver and every configured algorithm; write outputs."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    obj, poly = build_problem(cfg.problem)
    start = poly.start_vertex()
    f_star, ref = reference_optimum(obj, poly, config=cfg.reference_solver)
    write_json(cfg.to_dict(), out / "config.json")
    summary = {
        "version": __version__,
        "problem": cfg.problem,
        "polytope": poly.to_dict() if poly.kind != "ExplicitHRep" else {"kind": poly.kind},
        "n": obj.n,
        "p": obj.p,
        "f_star": f_star,
        "reference": {"status": ref.status, "iterations": ref.iterations,
                      "final_duality_gap": _last_gap(ref)},
        "start_vertex": _id_json(start.id),
        "shared_start": True,
        "timing": "monotonic wall clock of algorithm work, monitoring excluded",
        "runs": [],
    }
    traces: dict[str, RunTrace] = {}
    nv = _num_vertices(poly)
    for rc in cfg.algorithms:
        entry = {"label": rc.label, "algorithm": rc.algorithm,
                 "trace_file": trace_path(out, rc.label).name}
        try:
            tr = run(obj, poly, rc, start=start)
        except Exception as exc:  # recorded per algorithm, the batch continues
            logger.error("%s failed: %s", rc.label, exc)
            entry.update(status="Failed", error=f"{type(exc).__name__}: {exc}")
            summary["runs"].append(entry)
            continue
        if tr.metadata["start_vertex"] != summary["start_vertex"]:
            raise RuntimeError(f"{rc.label} did not start at the shared vertex")
        write_trace_csv(tr, trace_path(out, rc.label), f_star)
        traces[rc.label] = tr
        entry.update(audit_report(tr, f_star, nv))
        entry["start_vertex"] = tr.metadata["start_vertex"]
        entry["final_objective"] = tr.final_objective
        entry["final_relative_gap"] = float(relative_gap([tr.final_objective], f_star)[0])
        entry["cum_stoch_grads"] = tr.records[-1].cum_stoch_grads
        entry["wall_seconds"] = tr.records[-1].wall_seconds
        for key in ("batch_limit", "strong_convexity_warning", "svrf", "prox_svrg"):
            if key in tr.metadata:
                entry[key] = tr.metadata[key]
        summary["runs"].append(entry)
    write_plot_data(traces, out / PLOT_FILE)
    write_json(summary, out / SUMMARY_FILE)
    return summary


def _num_vertices(poly):
    try:
        return len(poly.vertex_ids())
    except (ValueError, NotImplementedError):
        return None


def _last_gap(trace):
    gaps = [r.duality_gap for r in trace.records if not math.isnan(r.duality_gap)]
    return gaps[-1] if gaps else None


def _id_json(vid):
    if isinstance(vid, tuple):
        return [int(v) for v in vid]
    return int(vid)


def cmd_run(args) -> int:
    cfg = _load(args)
    _apply_flags(cfg, args)
    summary = run_experiment(cfg)
    for r in summary["runs"]:
        print(f"{r['label']:>12s}  {r['status']:<14s} "
              f"gap={r.get('final_relative_gap', float('nan')):.3e}")
    print(f"results in {cfg.output}")
    return 1 if any(r["status"] == "Failed" for r in summary["runs"]) else 0


def load_traces(out: Path) -> tuple[dict, dict[str, RunTrace]]:
    summary_file = out / SUMMARY_FILE
    if not summary_file.exists():
        raise FileNotFoundError(f"{summary_file} not found")
    summary = json.loads(summary_file.read_text(encoding="utf-8"))
    traces = {}
    for r in summary["runs"]:
        if r["status"] == "Failed":
            continue
        path = out / r["trace_file"]
        if not path.exists():
            raise FileNotFoundError(f"missing trace {path}")
        traces[r["label"]] = trace_from_csv(path, {"algorithm": r["algorithm"]})
    return summary, traces


def comparison_table(traces: dict[str, RunTrace], f_star: float,
                     thresholds=THRESHOLDS) -> list[dict]:
    rows = []
    for label, tr in traces.items():
        row = {"label": label}
        for t in thresholds:
            row[t] = time_to_threshold(tr, f_star, t)
        rows.append(row)
    return rows


def format_table(rows: list[dict], thresholds=THRESHOLDS) -> str:
    head = ["algorithm"] + [f"t({t:.0e})" for t in thresholds]
    lines = ["  ".join(f"{h:>12s}" for h in head)]
    for r in rows:
        cells = [r["label"]] + [MISSING if r[t] is None else f"{r[t]:.4f}s" for t in thresholds]
        lines.append("  ".join(f"{c:>12s}" for c in cells))
    return "\n".join(lines)


def cmd_compare(args) -> int:
    cfg = _load(args)
    _apply_flags(cfg, args)
    out = Path(cfg.output)
    if not (out / SUMMARY_FILE).exists():
        run_experiment(cfg)
    summary, traces = load_traces(out)
    rows = comparison_table(traces, summary["f_star"])
    print(f"time to relative gap (running minimum), F* = {summary['f_star']!r}")
    print(format_table(rows))
    write_json([{"label": r["label"], **{f"{t:.0e}": r[t] for t in THRESHOLDS}} for r in rows],
               out / "comparison.json")
    return 0


def cmd_plot_data(args) -> int:
    cfg = _load(args)
    _apply_flags(cfg, args)
    out = Path(cfg.output)
    _, traces = load_traces(out)
    write_plot_data(traces, out / PLOT_FILE)
    print(f"wrote {out / PLOT_FILE}")
    return 0


def _load(args) -> ExperimentConfig:
    return load_experiment(args.config, output_override=args.output, seed_override=args.seed)


def _apply_flags(cfg: ExperimentConfig, args):
    for rc in cfg.algorithms:
        if getattr(args, "max_iterations", None) is not None:
            rc.max_iterations = args.max_iterations
        if getattr(args, "time_budget", None) is not None:
            rc.time_budget = args.time_budget
        rc.validate()


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochfw", description="Stochastic Frank-Wolfe experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic ordered-box least-squares problem")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--l", type=float, default=-1.0)
    g.add_argument("--u", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen_data)

    for name, func, text in (("run", cmd_run, "run an experiment config"),
                             ("compare", cmd_compare, "time-to-threshold table"),
                             ("plot-data", cmd_plot_data, "rewrite the plot-data file")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config")
        s.add_argument("--output", default=None, help="output directory (overrides config)")
        s.add_argument("--seed", type=int, default=None, help="override every seed in the config")
        s.add_argument("--max-iterations", type=int, default=None)
        s.add_argument("--time-budget", type=float, default=None)
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # RunConfig.validate messages start with the field name
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
