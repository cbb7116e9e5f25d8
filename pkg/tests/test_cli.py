import csv
import json
import re

import pytest

from stochfw import cli
from stochfw.algorithms import RunConfig, run
from stochfw.cli import comparison_table, format_table, main
from stochfw.problems import generate_synthetic
from stochfw.traceio import (
    OUTPUT_ENV,
    TRACE_COLUMNS,
    ConfigError,
    load_experiment,
    parse_experiment,
    trace_from_csv,
    write_trace_csv,
)


def _config(tmp_path, algorithms, problem=None, **extra):
    data = {"problem": problem or {"synthetic": {"n": 300, "p": 10, "seed": 1}},
            "algorithms": algorithms, "output": str(tmp_path / "out"), **extra}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(data, indent=1))
    return path


def _strip_wall(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    col = rows[0].index("wall_seconds")
    return [r[:col] + r[col + 1:] for r in rows]


def test_gen_data(tmp_path, capsys):
    assert main(["gen-data", "--n", "40", "--p", "5", "--seed", "1", "--out", str(tmp_path / "a")]) == 0
    assert main(["gen-data", "--n", "40", "--p", "5", "--seed", "1", "--out", str(tmp_path / "b")]) == 0
    for name in ("A.csv", "b.csv", "meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "A.csv").read_text().splitlines()
    assert len(rows) == 40 and all(len(r.split(",")) == 5 for r in rows)
    meta = json.loads((tmp_path / "a" / "meta.json").read_text())
    assert meta["seed"] == 1 and meta["n"] == 40


def test_gen_data_rejects_zero(tmp_path, capsys):
    assert main(["gen-data", "--n", "0", "--p", "5", "--out", str(tmp_path)]) == 2
    assert "--n" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert main(["frobnicate"]) == 2
    assert main([]) == 2


def test_run_writes_traces_and_summary(tmp_path, capsys):
    algs = [{"algorithm": a, "max_iterations": 40} for a in ("ASFW", "PSFW", "SVRF")]
    algs.append({"algorithm": "ProxSVRG", "max_iterations": 600})
    cfg = _config(tmp_path, algs)
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["shared_start"] and len(summary["runs"]) == 4
    assert {r["start_vertex"] for r in summary["runs"]} == {summary["start_vertex"]}
    for r in summary["runs"]:
        with open(out / r["trace_file"], newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:8] == TRACE_COLUMNS[:8]
        tr = trace_from_csv(out / r["trace_file"])
        assert len(rows) == len(tr.records) + 1
    asfw = summary["runs"][0]
    assert asfw["cases"]["iterations"] == 40 and asfw["drop_step_violations"] == 0
    with open(out / "plot_data.csv", newline="") as fh:
        plot = list(csv.DictReader(fh))
    assert {row["label"] for row in plot} == {"ASFW", "PSFW", "SVRF", "ProxSVRG"}
    for label in ("ASFW", "SVRF"):
        mins = [float(row["running_min"]) for row in plot if row["label"] == label]
        assert mins == sorted(mins, reverse=True)


def test_rerun_is_identical_apart_from_wall_time(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "ASFW", "max_iterations": 60, "seed": 3},
                             {"algorithm": "SVRF", "max_iterations": 30}])
    assert main(["run", str(cfg), "--output", str(tmp_path / "r1")]) == 0
    assert main(["run", str(cfg), "--output", str(tmp_path / "r2")]) == 0
    for name in ("trace_ASFW.csv", "trace_SVRF.csv"):
        assert _strip_wall(tmp_path / "r1" / name) == _strip_wall(tmp_path / "r2" / name)


def test_seed_flag_overrides(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "ASFW", "max_iterations": 20, "seed": 3}])
    assert main(["run", str(cfg), "--seed", "11", "--output", str(tmp_path / "s")]) == 0
    saved = json.loads((tmp_path / "s" / "config.json").read_text())
    assert saved["algorithms"][0]["seed"] == 11
    assert saved["problem"]["synthetic"]["seed"] == 11


def test_unknown_algorithm_exits_2(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "Newton"}])
    assert main(["run", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "algorithms[0].algorithm" in err


def test_json_syntax_error_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "problem": {\n  "synthetic": {"n": 3,}\n }\n}\n')
    assert main(["run", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("data, field", [
    ({"algorithms": [{"algorithm": "ASFW"}]}, "problem"),
    ({"problem": {"synthetic": {"n": 5, "p": 2}}, "algorithms": []}, "algorithms"),
    ({"problem": {"synthetic": {"n": 5}}, "algorithms": [{}]}, "problem.synthetic.p"),
    ({"problem": {"synthetic": {"n": "many", "p": 2}}, "algorithms": [{}]}, "problem.synthetic.n"),
    ({"problem": {"lp": {}}, "algorithms": [{}]}, "problem"),
    ({"problem": {"synthetic": {"n": 5, "p": 2}}, "algorithms": [{}, {}]}, "algorithms"),
    ({"problem": {"synthetic": {"n": 5, "p": 2}}, "algorithms": [{"step_rule": "x"}]},
     "algorithms[0].step_rule"),
])
def test_config_diagnostics(data, field):
    data.setdefault("output", "/tmp/unused")
    with pytest.raises(ConfigError, match="^" + re.escape(field)):
        parse_experiment(data)


def test_output_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    cfg = parse_experiment({"problem": {"synthetic": {"n": 5, "p": 2}}, "algorithms": [{}]})
    assert cfg.output == str(tmp_path / "env")
    monkeypatch.delenv(OUTPUT_ENV)
    with pytest.raises(ConfigError, match="^output"):
        parse_experiment({"problem": {"synthetic": {"n": 5, "p": 2}}, "algorithms": [{}]})


def test_config_round_trip(tmp_path):
    path = _config(tmp_path, [{"algorithm": "PSFW", "batch_schedule": {"kind": "Theoretical", "rho": 0.2}}],
                   problem={"csv": {"path": "x.csv", "mu": 0.1}})
    once = load_experiment(path).to_dict()
    twice = parse_experiment(json.loads(json.dumps(once))).to_dict()
    assert once == twice


def test_compare_reports_missing_thresholds(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "AFW", "step_rule": "ExactLineSearch", "max_iterations": 400},
                             {"algorithm": "ASFW", "max_iterations": 5}])
    assert main(["compare", str(cfg)]) == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.strip().startswith(("AFW", "ASFW"))]
    assert len(lines) == 2
    assert "—" not in lines[0] and "—" in lines[1]


def test_compare_single_algorithm(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "PSFW", "max_iterations": 30}])
    assert main(["compare", str(cfg)]) == 0
    table = json.loads((tmp_path / "out" / "comparison.json").read_text())
    assert len(table) == 1


def test_compare_missing_trace(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "PSFW", "max_iterations": 10}])
    assert main(["run", str(cfg)]) == 0
    (tmp_path / "out" / "trace_PSFW.csv").unlink()
    assert main(["compare", str(cfg)]) == 1
    assert "missing trace" in capsys.readouterr().err


def test_plot_data_subcommand(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "ASFW", "max_iterations": 10}])
    assert main(["plot-data", str(cfg)]) == 1
    assert main(["run", str(cfg)]) == 0
    (tmp_path / "out" / "plot_data.csv").unlink()
    assert main(["plot-data", str(cfg)]) == 0
    assert (tmp_path / "out" / "plot_data.csv").exists()


def test_batch_limit_is_a_status(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "PSFW", "max_iterations": 10,
                              "batch_schedule": {"kind": "Experimental", "c0": 1, "base": 1e300}}])
    assert main(["run", str(cfg)]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["runs"][0]["status"] == "BatchLimit"


def test_failed_solver_does_not_abort(tmp_path, capsys, monkeypatch):
    real_run = cli.run

    def flaky(obj, poly, config, start=None):
        if config.label == "PSFW":
            raise FloatingPointError("boom")
        return real_run(obj, poly, config, start=start)

    monkeypatch.setattr(cli, "run", flaky)
    cfg = _config(tmp_path, [{"algorithm": "PSFW", "max_iterations": 10},
                             {"algorithm": "ASFW", "max_iterations": 10}])
    assert main(["run", str(cfg)]) == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert [r["status"] for r in summary["runs"]] == ["Failed", "MaxIterations"]
    assert "boom" in summary["runs"][0]["error"]
    assert (tmp_path / "out" / "trace_ASFW.csv").exists()


def test_regression_problem_section(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "PSFW", "max_iterations": 20}],
                  problem={"regression": {"n": 200, "p": 6, "seed": 2}})
    assert main(["run", str(cfg)]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["polytope"]["kind"] == "L1Ball"


def test_csv_problem_section(tmp_path, capsys):
    data = tmp_path / "data.csv"
    data.write_text("\n".join(f"{i % 7},{i % 3},{(i * i) % 5},{i % 2}" for i in range(60)))
    cfg = _config(tmp_path, [{"algorithm": "ASFW", "max_iterations": 20}],
                  problem={"csv": {"path": str(data), "mu": 0.1}})
    assert main(["run", str(cfg)]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["n"] == 60 and summary["p"] == 3


def test_csv_problem_missing_file(tmp_path, capsys):
    cfg = _config(tmp_path, [{"algorithm": "ASFW"}], problem={"csv": {"path": str(tmp_path / "nope.csv")}})
    assert main(["run", str(cfg)]) == 1


def test_trace_csv_round_trip(tmp_path):
    obj, poly = generate_synthetic(100, 5, seed=0)
    tr = run(obj, poly, RunConfig("PSFW", max_iterations=25))
    write_trace_csv(tr, tmp_path / "t.csv", f_star=1.0)
    back = trace_from_csv(tmp_path / "t.csv")
    assert [r.objective for r in back.records] == [r.objective for r in tr.records]
    assert [r.step_kind for r in back.records] == [r.step_kind for r in tr.records]


def test_comparison_table_formatting():
    assert comparison_table({}, 1.0) == []
    table = format_table([{"label": "X", 1e-2: 0.5, 1e-4: None, 1e-6: None}])
    assert "0.5000s" in table and table.count("—") == 2
