import json
import subprocess
import sys

import pytest

from magnetolin.cli import main
from magnetolin.harness import CSV_COLUMNS

SMALL = {
    "grid": {"n": 5},
    "magnetostatics": {"N": 32},
    "sweep": {"eps_start": 0.2, "num_eps": 2},
    "rigidity": {"n": 5, "samples": 5},
    "check": {"samples": 500},
}


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(json.dumps(SMALL))
    return str(path)


def test_missing_config_exit_code(tmp_path, capsys):
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == 3
    assert "config error" in capsys.readouterr().err


def test_invalid_config_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"grid": {"n": 1}}))
    assert main(["--config", str(path), "linear"]) == 3


def test_usage_errors_are_config_errors():
    assert main(["minimize"]) == 3
    assert main(["nonsense"]) == 3
    assert main(["minimize", "--eps", "-0.1", "--quiet"]) == 3
    assert main(["sweep", "--seed", "-1"]) == 3


def test_sweep_writes_csv(small_config, tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", small_config, "--out", str(out), "--quiet"])
    assert code in (0, 2)
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    assert code == (0 if all(l.endswith("true") for l in lines[1:]) else 2)


def test_global_flags_before_subcommand(small_config, tmp_path):
    out = tmp_path / "state.json"
    assert main(["--config", small_config, "--out", str(out), "--quiet", "minimize", "--eps", "0.1"]) == 0
    dump = json.loads(out.read_text())
    assert dump["eps"] == 0.1 and dump["solver"]["status"] == "converged"
    assert len(dump["phi"]) == 25


def test_linear_reports_direct_solve(small_config, capsys):
    assert main(["linear", "--config", small_config, "--quiet"]) == 0
    dump = json.loads(capsys.readouterr().out)
    assert dump["eps"] == 0.0 and "direct_solve_max_diff" in dump


def test_recovery_output(small_config, capsys):
    assert main(["recovery", "--eps", "0.2", "--config", small_config, "--quiet"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["gap"] == pytest.approx(abs(out["recovery_energy"] - out["limit_energy"]))
    assert len(out["halving"]["eps"]) == 4


def test_rigidity_command(small_config, tmp_path, capsys):
    out = tmp_path / "rig.csv"
    assert main(["rigidity", "--config", small_config, "--out", str(out), "--quiet"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["samples"] == 5
    assert len(out.read_text().splitlines()) == 6


def test_check_command_reports_failures(small_config, capsys):
    code = main(["check", "--config", small_config, "--quiet"])
    report = json.loads(capsys.readouterr().out)
    assert code == (0 if report["passed"] else 1)


def test_seed_override_changes_rigidity_samples(small_config, capsys):
    main(["rigidity", "--config", small_config, "--seed", "1", "--quiet"])
    a = json.loads(capsys.readouterr().out)
    main(["rigidity", "--config", small_config, "--seed", "2", "--quiet"])
    b = json.loads(capsys.readouterr().out)
    assert a["max"] != b["max"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "magnetolin", "sweep", "--config", str(tmp_path / "nope.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 3
