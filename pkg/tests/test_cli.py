import csv
import json

import pytest

from constrained_mrac.cli import EXIT_ABORT, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from constrained_mrac.scenario import ConstraintSpec, dump_scenario, load_bundled
from constrained_mrac.traces import read_events_csv, read_trace_csv


def _summary(path):
    with open(path / "summary.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_validate_example(capsys):
    assert main(["validate", "example_3state"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "17.6 > 3: offline check FAIL (informational)" in out
    assert out.strip().endswith("validation: PASS")


def test_validate_infeasible_scenario(tmp_path, capsys):
    cfg = load_bundled("example_3state")
    bad = cfg.replace(constraints=ConstraintSpec(M_x=1.9, M_u=3.0, M_xm=1.9, f_M=2.4))
    dump_scenario(bad, tmp_path / "bad.json")
    assert main(["validate", str(tmp_path / "bad.json")]) == EXIT_FAIL
    assert "validation: FAIL" in capsys.readouterr().out
    # simulate refuses the same scenario
    assert main(["simulate", str(tmp_path / "bad.json"), "--out", str(tmp_path / "r")]) == EXIT_FAIL
    assert not (tmp_path / "r").exists()


def test_malformed_input(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    assert main(["validate", str(path)]) == EXIT_INPUT
    assert main(["simulate", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["simulate"]) == EXIT_INPUT
    assert main(["frobnicate"]) == EXIT_INPUT
    assert main(["simulate", "example_3state", "--dt", "fast"]) == EXIT_INPUT


def test_simulate_example(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "example_3state", "--out", str(out)]) == EXIT_OK
    doc = _summary(out)
    assert doc["sup_u_applied"] <= 3.0 + 1e-9
    assert all(doc["flags"].values()) and not doc["aborted"]
    cols = read_trace_csv(out / "trace.csv")
    assert len(cols["t"]) == doc["n_samples"]


def test_simulate_baseline_reports_violations(tmp_path, capsys):
    out = tmp_path / "base"
    code = main(["simulate", "example_3state", "--variant", "baseline_mrac", "--T", "10", "--out", str(out)])
    assert code == EXIT_FAIL
    kinds = {row[1] for row in read_events_csv(out / "events.csv")}
    assert "input_constraint_violated" in kinds
    assert "input_constraint_violated" in capsys.readouterr().out


def test_simulate_coarse_step(tmp_path, capsys):
    out = tmp_path / "coarse"
    code = main(["simulate", "example_3state", "--dt", "0.5", "--out", str(out)])
    assert code in (EXIT_ABORT, EXIT_OK)
    doc = _summary(out)
    if code == EXIT_ABORT:
        assert doc["aborted"] and doc["abort_reason"]
    else:
        assert all(doc["flags"].values())


def test_compare(tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "example_3state", "--T", "10", "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    ratio = float(text.rsplit("=", 1)[1])
    assert ratio > 1.0
    assert _summary(out / "baseline")["sup_u_applied"] > _summary(out / "constrained")["sup_u_applied"]


def test_sweep_and_export(tmp_path, capsys):
    out = tmp_path / "sw"
    assert main(["sweep", "example_3state", "--Mu", "3", "7", "--T", "5", "--out", str(out)]) == EXIT_OK
    with open(out / "sweep.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["M_u"]) for r in rows] == [3.0, 7.0]
    assert float(rows[0]["sup_target_deviation"]) > float(rows[1]["sup_target_deviation"])

    figs = tmp_path / "figs"
    args = ["export-figures", str(out / "Mu_3"), "--sweep", str(out / "Mu_3"), str(out / "Mu_7"), "--out", str(figs)]
    assert main(args) == EXIT_OK
    assert sorted(p.name for p in figs.iterdir()) == sorted(f"fig{i}.{e}" for i in range(1, 9) for e in ("csv", "svg"))


def test_export_figures_errors(tmp_path, capsys):
    (tmp_path / "trace.csv").write_text("t,x1\n", encoding="utf-8")
    assert main(["export-figures", str(tmp_path), "--out", str(tmp_path / "f")]) == EXIT_FAIL
    assert main(["export-figures", str(tmp_path / "nothing"), "--out", str(tmp_path / "f")]) == EXIT_INPUT


@pytest.mark.parametrize("name", ["nonlinear_2state"])
def test_bundled_nonlinear_validates(name, capsys):
    assert main(["validate", name]) == EXIT_OK
