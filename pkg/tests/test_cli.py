import os
import subprocess
import sys

import numpy as np
import pytest

from sdwave.cli import RunManifest, build_parser, main, run
from sdwave.io import read_summary, read_trajectory_csv, trajectory_columns

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")
SINE = os.path.join(CONFIGS, "sine_mms.yaml")
PERIODIC = os.path.join(CONFIGS, "periodic_linear.yaml")
QUASI = os.path.join(CONFIGS, "quasi_periodic.yaml")
DEGENERATE = os.path.join(CONFIGS, "degenerate.yaml")
SHORT = ["solver.t1=0.5", "solver.dt=0.01", "basis.n_modes=8"]


def _run(tmp_path, command, config, overrides=(), plots=False):
    code = run(RunManifest(command, config, str(tmp_path), list(overrides), plots))
    return code, read_summary(tmp_path / "summary.yaml")


def test_identify_on_sine_fixture(tmp_path):
    code, summary = _run(tmp_path, "identify", SINE)
    assert code == 0
    assert summary["mms.g_error"] <= 1e-4
    cols = read_trajectory_csv(tmp_path / "trajectory.csv")
    assert list(cols) == trajectory_columns(16)
    assert np.max(np.abs(cols["g"] - np.cos(cols["t"]))) <= 1e-4


def test_summary_echoes_resolved_config(tmp_path):
    code, summary = _run(tmp_path, "solve-ivp", SINE, SHORT)
    assert code == 0
    for key in ("config.problem.alpha", "config.problem.alpha_source", "config.diagnostics.eta",
                "config.diagnostics.eta1", "config.diagnostics.eps_free.eps0",
                "config.diagnostics.eps_free.eps6", "config.solver.dt", "config.basis.n_modes"):
        assert key in summary, key
    assert summary["config.solver.dt"] == 0.01
    assert summary["exit_code"] == 0


def test_reproducible_bytes(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run(RunManifest("identify", SINE, str(out), SHORT)) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    assert (a / "summary.yaml").read_bytes() == (b / "summary.yaml").read_bytes()


def test_degenerate_exit_code(tmp_path):
    code, summary = _run(tmp_path, "identify", DEGENERATE)
    assert code == 5 and "error" in summary


def test_config_error_exit_code(tmp_path):
    code, _ = _run(tmp_path, "solve-ivp", SINE, ["solver.dt=-1"])
    assert code == 2
    assert run(RunManifest("solve-ivp", str(tmp_path / "nope.yaml"), str(tmp_path))) == 2
    assert run(RunManifest("bogus", SINE, str(tmp_path))) == 2


def test_divergence_exit_code(tmp_path):
    over = ["problem.nonlinearity={family: linear, coeff: -50.0}", "problem.coupled=false",
            "solver.t1=20.0", "solver.dt=0.01", "solver.divergence_factor=100.0", "basis.n_modes=4"]
    cfg = tmp_path / "c.yaml"
    cfg.write_text(open(PERIODIC).read())
    code, summary = _run(tmp_path, "solve-ivp", str(cfg), over)
    assert code == 3 and "error" in summary


def test_sweep_exit_code(tmp_path):
    code, summary = _run(tmp_path, "find-periodic", PERIODIC, ["longtime.sweep_tol=1e-15"])
    assert code == 4
    assert summary["sweep.converged"] is False
    assert "smallness.verdict" in summary


def test_find_periodic(tmp_path):
    code, summary = _run(tmp_path, "find-periodic", PERIODIC)
    assert code == 0
    assert summary["periodicity.defect"] < summary["periodicity.tol"]
    assert summary["periodicity.decay_rate"] > 0
    assert summary["sweep.converged"] is True


def test_check_smallness(tmp_path):
    code, summary = _run(tmp_path, "check-smallness", SINE)
    assert code == 0
    assert summary["smallness.gamma"] == pytest.approx(1.0)
    assert "smallness.condition.B_pos.margin" in summary


def test_validate(tmp_path):
    code, summary = _run(tmp_path, "validate", SINE)
    assert code == 0 and summary["validation_ok"] is True


def test_mms_verify(tmp_path):
    code, summary = _run(tmp_path, "mms-verify", SINE, ["solver.dt=0.002"])
    assert code == 0
    assert summary["mms.orders.err_g"][0] == pytest.approx(2.0, abs=0.25)
    assert summary["mms.g_error"] <= 1e-4


def test_almost_period_scan(tmp_path):
    code, summary = _run(tmp_path, "almost-period-scan", QUASI,
                         ["almost_period.scan_stride=8"])
    assert code == 0
    assert summary["almost_period.solution_defect"] <= 10 * summary["almost_period.forcing_defect"]


def test_plots(tmp_path):
    pytest.importorskip("matplotlib")
    code, _ = _run(tmp_path, "solve-ivp", SINE, SHORT, plots=True)
    assert code == 0
    for name in ("g.png", "r.png", "energy.png"):
        assert (tmp_path / name).stat().st_size > 0


def test_parser_and_main(tmp_path):
    args = build_parser().parse_args(["identify", SINE, "-o", "x", "--set", "a=1", "--set", "b=2"])
    assert args.overrides == ["a=1", "b=2"] and args.output_dir == "x"
    assert main(["validate", SINE, "-o", str(tmp_path)]) == 0


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "sdwave.cli", "validate", SINE, "-o",
                          str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0
    assert (tmp_path / "summary.yaml").exists()
