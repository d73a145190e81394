import json

import numpy as np
import pytest

from dipolar_sle import cli


def run(tmp_path, *argv):
    return cli.main([*argv, "--out", str(tmp_path)])


def test_help_lists_commands_and_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for name in cli.COMMANDS:
        assert name in text
    for flag in ("--config", "--out", "--seed", "--n-paths", "--dt", "--T", "--kappa", "--tolerance"):
        assert flag in text


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_kernels_summary(tmp_path):
    assert run(tmp_path, "kernels") == 0
    doc = json.loads((tmp_path / "kernels.json").read_text())
    assert doc["schema"] == 1 and doc["passed"] and "timestamp" in doc and doc["command"] == "kernels"


def test_simulate_kappa_zero_stays_on_axis(tmp_path):
    assert run(tmp_path, "simulate", "--kappa", "0", "--T", "1", "--dt", "1e-3") == 0
    rows = np.loadtxt(tmp_path / "curve.csv", delimiter=",", skiprows=1)
    assert np.all(rows[:, 1] == 0.0)
    assert rows[-1, 2] == pytest.approx(2 * np.arccos(np.exp(-0.5)), rel=1e-2)


def test_bad_config_exits_2(tmp_path, capsys):
    assert run(tmp_path, "simulate", "--dt", "-1") == 2
    bad = tmp_path / "cfg.json"
    bad.write_text(json.dumps({"n_paths": 5, "unknown": 1}))
    assert run(tmp_path, "observables", "--config", str(bad)) == 2
    assert "config error" in capsys.readouterr().err


def test_observables_csv_is_byte_identical(tmp_path):
    args = ("observables", "--n-paths", "8", "--T", "0.2", "--dt", "1e-3", "--seed", "3")
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args) == 0
    assert (tmp_path / "a" / "observables.csv").read_bytes() == (tmp_path / "b" / "observables.csv").read_bytes()


def test_numerical_failure_exits_3(tmp_path, monkeypatch):
    from dipolar_sle.errors import SolverFailure

    def broken(_args):
        raise SolverFailure("synthetic")

    monkeypatch.setitem(cli.HANDLERS, "kernels", broken)
    assert run(tmp_path, "kernels") == 3
    doc = json.loads((tmp_path / "kernels.json").read_text())
    assert not doc["passed"] and "SolverFailure" in doc["results"]["error"]


def test_failed_check_exits_3(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "LATTICE_MAX_ERROR", 0.0)
    assert run(tmp_path, "lattice-green", "--mesh", str(1 / 64)) == 3
    assert not json.loads((tmp_path / "lattice_green.json").read_text())["passed"]


def test_schramm_small_run(tmp_path):
    run(tmp_path, "schramm", "--n-paths", "20", "--T", "1", "--dt", "5e-3")
    lines = (tmp_path / "schramm.csv").read_text().splitlines()
    assert lines[0] == "point_re,point_im,fraction_left,stderr,exact,z,decided,undecided_fraction"
    assert len(lines) == 11
