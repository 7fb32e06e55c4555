import json
import subprocess
import sys
from pathlib import Path

import pytest

from spikelab.cli import main
from spikelab.config import ConfigError, ExperimentConfig, load_config


def run_cli(args):
    return main(list(args))


# --- config parsing ---

def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.m == 2.0 and cfg.N == 3 and cfg.p == 3.0
    assert cfg.shape == "ball"


def test_load_ini(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("""
[nonlinearity]
m = 2.0
n = 2
p = 3.0

[domain]
shape = ellipse
params = 2.0 1.0

[schedule]
eps_list = 0.5 0.4
""")
    cfg = load_config(f)
    assert cfg.N == 2 and cfg.shape == "ellipse"
    assert cfg.domain_params == (2.0, 1.0)
    assert cfg.schedule == (0.5, 0.4)
    assert cfg.domain().shape == "ellipse"


def test_load_json(tmp_path):
    f = tmp_path / "exp.json"
    f.write_text(json.dumps({
        "nonlinearity": {"m": 2.0, "n": 2, "p": 3.0},
        "domain": {"shape": "ball", "params": [1.0]},
        "solver": {"eps": 0.4},
    }))
    cfg = load_config(f)
    assert cfg.eps == 0.4 and cfg.N == 2


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/exp.cfg")


def test_unknown_key_diagnostic(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("[solver]\nepss = 0.3\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config(f)


def test_zero_epsilon_rejected(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("[schedule]\neps_list = 0.5 0.0\n")
    with pytest.raises(ConfigError, match="epsilon"):
        load_config(f)


def test_bad_value_names_field(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("[solver]\neps = not-a-number\n")
    with pytest.raises(ConfigError, match=r"\[solver\] eps"):
        load_config(f)


# --- subcommands ---

def test_missing_config_flag_errors(tmp_path, capsys):
    rc = run_cli(["radial", "--config", str(tmp_path / "nope.cfg"),
                  "--out", str(tmp_path / "o")])
    assert rc != 0
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_cmd_radial_default_ok(tmp_path, capsys):
    rc = run_cli(["radial", "--out", str(tmp_path / "o")])
    assert rc == 0
    report = json.loads((tmp_path / "o" / "radial_report.json").read_text())
    assert report["constants"]["mu"] == pytest.approx(1.0)
    assert (tmp_path / "o" / "profile.csv").exists()
    assert (tmp_path / "o" / "effective_config.json").exists()


def test_cmd_radial_supercritical_fails(tmp_path, capsys):
    f = tmp_path / "exp.cfg"
    f.write_text("[nonlinearity]\nm = 2.0\nn = 3\np = 6.0\n")
    rc = run_cli(["radial", "--config", str(f), "--out", str(tmp_path / "o")])
    assert rc != 0
    err = capsys.readouterr().err
    assert "H2" in err


def test_cmd_curvature(tmp_path, capsys):
    f = tmp_path / "exp.cfg"
    f.write_text("[nonlinearity]\nn = 2\n[domain]\nshape = ellipse\n"
                 "params = 2.0 1.0\n")
    rc = run_cli(["curvature", "--config", str(f),
                  "--out", str(tmp_path / "o")])
    assert rc == 0
    rep = json.loads((tmp_path / "o" / "curvature_report.json").read_text())
    assert rep["H_max"] == pytest.approx(2.0, rel=1e-6)
    assert (tmp_path / "o" / "boundary_curvature.csv").exists()


def test_cmd_mesh(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("[nonlinearity]\nn = 2\n[domain]\nshape = ball\n"
                 "params = 1.0\n[solver]\nmesh_h = 0.2\n")
    rc = run_cli(["mesh", "--config", str(f), "--out", str(tmp_path / "o")])
    assert rc == 0
    rep = json.loads((tmp_path / "o" / "mesh_report.json").read_text())
    assert rep["total_volume"] == pytest.approx(3.1416, rel=0.02)
    assert (tmp_path / "o" / "vertices.csv").exists()
    assert (tmp_path / "o" / "cells.csv").exists()


def test_cmd_solve(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("[nonlinearity]\nn = 2\np = 3.0\n[domain]\nshape = ball\n"
                 "params = 1.0\n[solver]\neps = 0.4\n")
    rc = run_cli(["solve", "--config", str(f), "--out", str(tmp_path / "o")])
    assert rc == 0
    rep = json.loads((tmp_path / "o" / "solve_report.json").read_text())
    assert rep["converged"]
    assert rep["c_eps"] > 0


def test_cmd_sweep_artifacts_and_determinism(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("[nonlinearity]\nn = 2\np = 3.0\n[domain]\nshape = ball\n"
                 "params = 1.0\n[schedule]\neps_list = 0.5 0.4 0.3\n")
    rc = run_cli(["sweep", "--config", str(f), "--out", str(tmp_path / "a")])
    assert rc == 0
    for name in ("sweep_summary.json", "energy_table.csv",
                 "decay_table.csv", "curvature_table.csv"):
        assert (tmp_path / "a" / name).exists(), name
    rc2 = run_cli(["sweep", "--config", str(f), "--out", str(tmp_path / "b")])
    assert rc2 == 0
    assert ((tmp_path / "a" / "sweep_summary.json").read_bytes()
            == (tmp_path / "b" / "sweep_summary.json").read_bytes())


def test_verify_unknown_criterion(capsys):
    rc = run_cli(["verify", "no_such_criterion"])
    assert rc != 0
    err = capsys.readouterr().err
    assert "valid names" in err


def test_verify_single_quick_criterion(capsys):
    rc = run_cli(["verify", "decay_law"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "decay_law" in out and "PASS" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "spikelab.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("radial", "curvature", "mesh", "solve", "sweep", "verify"):
        assert name in proc.stdout
