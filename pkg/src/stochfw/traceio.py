"""Reading and writing traces, plot data and experiment configs."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .active_set import StepKind
from .algorithms import IterationRecord, RunConfig, RunTrace

TRACE_COLUMNS = [
    "k", "wall_seconds", "objective", "gap_vs_reference", "step_kind", "gamma",
    "batch_size", "cum_stoch_grads", "gamma_max", "is_drop", "is_swap",
    "active_set_size", "duality_gap",
]
TIMING_COLUMNS = ("wall_seconds",)
OUTPUT_ENV = "STOCHFW_OUTPUT_DIR"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def relative_gap(values, f_star: float) -> np.ndarray:
    return (np.asarray(values, dtype=float) - f_star) / max(abs(f_star), 1e-300)


def write_trace_csv(trace: RunTrace, path, f_star: float | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace.records:
            gap = math.nan if f_star is None else float(relative_gap([r.objective], f_star)[0])
            sk = r.step_kind
            w.writerow([
                _fmt(r.k), _fmt(r.wall_seconds), _fmt(r.objective), _fmt(gap),
                sk.tag if sk else "", _fmt(r.gamma), _fmt(r.batch_size), _fmt(r.cum_stoch_grads),
                _fmt(r.gamma_max), _fmt(bool(sk and sk.is_drop)), _fmt(bool(sk and sk.is_swap)),
                _fmt(r.active_set_size), _fmt(r.duality_gap),
            ])


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(s: str) -> float:
    return math.nan if s == "" else float(s)


def trace_from_csv(path, metadata: dict | None = None) -> RunTrace:
    trace = RunTrace(metadata=dict(metadata or {}))
    for row in read_trace_csv(path):
        tag = row["step_kind"]
        trace.records.append(IterationRecord(
            k=int(row["k"]),
            wall_seconds=_num(row["wall_seconds"]),
            objective=_num(row["objective"]),
            step_kind=StepKind(tag, row["is_drop"] == "1", row["is_swap"] == "1") if tag else None,
            gamma=_num(row["gamma"]),
            gamma_max=_num(row["gamma_max"]),
            batch_size=int(row["batch_size"]),
            cum_stoch_grads=int(row["cum_stoch_grads"]),
            active_set_size=int(row["active_set_size"]),
            duality_gap=_num(row["duality_gap"]),
        ))
    return trace


def trace_to_json(trace: RunTrace, f_star: float | None = None) -> dict:
    rows = []
    for r in trace.records:
        sk = r.step_kind
        rows.append({
            "k": r.k, "wall_seconds": r.wall_seconds, "objective": _none(r.objective),
            "step_kind": sk.tag if sk else None, "is_drop": bool(sk and sk.is_drop),
            "is_swap": bool(sk and sk.is_swap), "gamma": _none(r.gamma),
            "gamma_max": _none(r.gamma_max), "batch_size": r.batch_size,
            "cum_stoch_grads": r.cum_stoch_grads, "active_set_size": r.active_set_size,
            "duality_gap": _none(r.duality_gap),
        })
    meta = dict(trace.metadata)
    if f_star is not None:
        meta["f_star"] = f_star
    return {"metadata": _jsonify(meta), "status": trace.status,
            "final_representation": trace.final_representation, "rows": rows}


def _none(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else v


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(data, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def running_min(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.fmin.accumulate(v) if v.size else v


def write_plot_data(traces: dict[str, RunTrace], path) -> None:
    """Long-format CSV: label, k, wall_seconds, objective, running_min."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "k", "wall_seconds", "objective", "running_min"])
        for label, tr in traces.items():
            obj = tr.objectives
            rm = running_min(obj)
            for r, o, m in zip(tr.records, obj, rm):
                w.writerow([label, r.k, _fmt(r.wall_seconds), _fmt(o), _fmt(m)])


def time_to_threshold(trace: RunTrace, f_star: float, threshold: float) -> float | None:
    """First wall time at which the running-minimum relative gap is <= threshold."""
    gaps = relative_gap(running_min(trace.objectives), f_star)
    hit = np.flatnonzero(gaps <= threshold)
    if hit.size == 0:
        return None
    return float(trace.records[hit[0]].wall_seconds)


# ---------------------------------------------------------------------------
# experiment configuration

class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass
class ExperimentConfig:
    problem: dict
    algorithms: list[RunConfig]
    output: str
    reference_solver: RunConfig = field(default_factory=lambda: RunConfig(
        algorithm="AFW", step_rule="ExactLineSearch", max_iterations=200_000,
        gap_tolerance=1e-10, gap_check_period=1, label="reference"))

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "algorithms": [c.to_dict() for c in self.algorithms],
            "output": self.output,
            "reference_solver": self.reference_solver.to_dict(),
        }


PROBLEM_FIELDS = {
    "synthetic": {"n": int, "p": int, "l": float, "u": float, "seed": int},
    "csv": {"path": str, "target_column": int, "standardize": bool, "mu": float,
            "alpha": float, "alpha_fraction": float, "skip_header": bool,
            "max_rows": int, "center_target": bool},
    "regression": {"n": int, "p": int, "seed": int, "mu": float, "alpha": float,
                   "alpha_fraction": float, "noise": float},
}
PROBLEM_DEFAULTS = {
    "synthetic": {"l": -1.0, "u": 1.0, "seed": 0},
    "csv": {"target_column": 0, "standardize": True, "mu": 0.1, "alpha": None,
            "alpha_fraction": 0.5, "skip_header": False, "max_rows": None, "center_target": True},
    "regression": {"seed": 0, "mu": 0.1, "alpha": None, "alpha_fraction": 0.5, "noise": 1.0},
}
PROBLEM_REQUIRED = {"synthetic": ("n", "p"), "csv": ("path",), "regression": ("n", "p")}


def _parse_problem(section) -> dict:
    if not isinstance(section, dict) or len(section) != 1:
        raise ConfigError("problem: expected exactly one of 'synthetic', 'csv', 'regression'")
    (kind, body), = section.items()
    if kind not in PROBLEM_FIELDS:
        raise ConfigError(f"problem: unknown problem kind {kind!r}")
    if not isinstance(body, dict):
        raise ConfigError(f"problem.{kind}: expected an object")
    out = dict(PROBLEM_DEFAULTS[kind])
    for key, val in body.items():
        if key not in PROBLEM_FIELDS[kind]:
            raise ConfigError(f"problem.{kind}.{key}: unknown field")
        typ = PROBLEM_FIELDS[kind][key]
        if val is not None:
            if typ is bool and not isinstance(val, bool):
                raise ConfigError(f"problem.{kind}.{key}: expected a boolean")
            try:
                val = typ(val)
            except (TypeError, ValueError):
                raise ConfigError(f"problem.{kind}.{key}: expected {typ.__name__}") from None
        out[key] = val
    for key in PROBLEM_REQUIRED[kind]:
        if key not in body:
            raise ConfigError(f"problem.{kind}.{key}: required field missing")
    return {kind: out}


def _parse_run(data, where: str) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    try:
        return RunConfig.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}.{exc}") from None


def parse_experiment(data: dict, output_override: str | None = None,
                     seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(data) - {"problem", "algorithms", "output", "reference_solver"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level field")
    if "problem" not in data:
        raise ConfigError("problem: required section missing")
    problem = _parse_problem(data["problem"])
    algs = data.get("algorithms")
    if not isinstance(algs, list) or not algs:
        raise ConfigError("algorithms: at least one algorithm is required")
    runs = [_parse_run(a, f"algorithms[{i}]") for i, a in enumerate(algs)]
    labels = [r.label for r in runs]
    if len(set(labels)) != len(labels):
        raise ConfigError("algorithms: labels must be unique")
    output = output_override or data.get("output") or os.environ.get(OUTPUT_ENV)
    if not output:
        raise ConfigError(f"output: no output directory (set 'output' or ${OUTPUT_ENV})")
    cfg = ExperimentConfig(problem, runs, str(output))
    if "reference_solver" in data:
        cfg.reference_solver = _parse_run(data["reference_solver"], "reference_solver")
    if seed_override is not None:
        for r in cfg.algorithms:
            r.seed = seed_override
        for body in cfg.problem.values():
            if "seed" in body:
                body["seed"] = seed_override
    return cfg


def load_experiment(path, **overrides) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_experiment(data, **overrides)
