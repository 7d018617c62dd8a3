import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from fremlinlab import ExperimentConfig, ExperimentReport, emit_table, run_experiment
from fremlinlab.labcli import EXPERIMENTS, ConfigError, format_table, main

SMALL = {
    "experiment": "atom-table",
    "spaces": [{"family": "lp", "p": 3}, {"family": "interlace", "p": 2, "q": 1, "c": 0.8}],
    "dims": [2],
    "p": 2,
    "trials": 1,
    "seed": 0,
}


def write_config(tmp_path, **overrides):
    cfg = {**SMALL, **overrides}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def empty_report(columns=("a", "b")):
    return ExperimentReport("atom-table", list(columns), [], {"passed": True}, {})


# --- tables -----------------------------------------------------------------


def test_empty_report_is_header_only(tmp_path):
    path = emit_table(empty_report(), "csv", tmp_path / "t.csv")
    assert path.read_text() == "a,b\n"


def test_one_row_is_two_lines():
    rep = empty_report()
    rep.rows.append({"a": 1.5, "b": [1.0, -2.0]})
    text = format_table(rep, "csv")
    assert text.splitlines() == ["a,b", "1.5,1.0 -2.0"]


def test_json_is_single_document_with_summary():
    doc = json.loads(format_table(empty_report(), "json"))
    assert doc["summary"] == {"passed": True}
    assert doc["rows"] == []
    assert "timing" not in doc


def test_unknown_format():
    with pytest.raises(ValueError):
        format_table(empty_report(), "xml")


def test_atom_table_rows():
    rep = run_experiment(ExperimentConfig.from_dict({**SMALL, "spaces": [{"family": "lp", "p": 3}]}))
    assert rep.passed and rep.summary["criterion"] == 3
    row = next(r for r in rep.rows if r["index"] == 1)
    assert row["space"] == "l3^2"
    assert row["concave_norm"] == 1.0 == row["expected"]


def test_lp_diagonal_example_row():
    cfg = ExperimentConfig.from_dict(
        {"experiment": "lp-diagonal", "spaces": [{"family": "lp", "p": 4}], "dims": [2], "trials": 2, "seed": 0}
    )
    rep = run_experiment(cfg)
    assert rep.passed and len(rep.rows) == 2


def test_basis_disjointness_rows():
    cfg = ExperimentConfig.from_dict(
        {"experiment": "basis-disjointness", "spaces": [{"family": "lp", "p": 2}], "dims": [2], "trials": 1}
    )
    rep = run_experiment(cfg)
    assert rep.passed
    assert rep.rows


def test_every_experiment_names_its_criterion():
    crits = sorted(e.criterion for e in EXPERIMENTS.values())
    assert crits == list(range(1, 11))


# --- configs ----------------------------------------------------------------


@pytest.mark.parametrize(
    "bad",
    [
        {"experiment": "nope"},
        {"trials": 0},
        {"tolerances": {"rel": -1.0}},
        {"dims": [99]},
        {"bogus_key": 1},
        {"output": {"path": None, "format": "xml"}},
        {"spaces": [{"family": "lp", "p": 0.5}]},
    ],
)
def test_invalid_configs(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({**SMALL, **bad}).validate()


def test_config_roundtrip():
    cfg = ExperimentConfig.from_dict({**SMALL, "tolerances": {"rel": 1e-3}})
    assert ExperimentConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()
    assert cfg.tol("rel") == 1e-3
    assert cfg.tol("exact") == 1e-12


def test_shipped_configs_are_valid():
    root = Path(__file__).resolve().parents[1] / "configs"
    names = set()
    for path in sorted(root.glob("*.json")):
        cfg = ExperimentConfig.from_json(path)
        cfg.validate()
        names.add(cfg.experiment)
    assert names == set(EXPERIMENTS)


# --- command line -----------------------------------------------------------


def test_run_writes_file_and_is_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", str(cfg), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert "PASS" in capsys.readouterr().out
    rows = list(csv.DictReader(io.StringIO(out1.read_text())))
    assert rows and all(r["passed"] == "true" for r in rows)


def test_json_output_is_deterministic(tmp_path):
    cfg = write_config(tmp_path, experiment="calculus-identities", trials=20)
    out = tmp_path / "a.json"
    args = ["run", str(cfg), "--out", str(out), "--format", "json", "--seed", "3"]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    assert json.loads(first)["config"]["seed"] == 3


def test_run_to_stdout(tmp_path, capsys):
    assert main(["run", str(write_config(tmp_path))]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0].startswith("space")
    assert "criterion 3" in captured.err


def test_failing_row_gives_exit_one(tmp_path, capsys):
    # a tolerance no float computation can meet forces failing rows
    cfg = write_config(
        tmp_path, experiment="lp-diagonal", spaces=[{"family": "lp", "p": 3}], trials=1, tolerances={"rel": 1e-300}
    )
    assert main(["run", str(cfg), "--out", str(tmp_path / "o.csv")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_config_errors_give_exit_two(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(write_config(tmp_path, experiment="nope"))]) == 2
    assert main(["run", str(write_config(tmp_path)), "--out", str(tmp_path / "no" / "dir.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in out


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 6 and "FAIL" not in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fremlinlab", "list-experiments"], capture_output=True, text=True)
    assert res.returncode == 0 and "main-isometry" in res.stdout
