import numpy as np
import pytest
import yaml

from sdwave.basis import build_basis
from sdwave.config import build_spec, resolve
from sdwave.errors import BoundaryViolation, ManufactureError
from sdwave.mms import export_config, manufacture, refinement_study, sine_modes, verify_end_to_end
from sdwave.problem import Interval, Nonlinearity
from sdwave.solver import StepperConfig

from conftest import G_COS, SINE_MODES, SINE_PROBLEM, make_spec, sine_mms

ZERO_G = {"family": "constant", "value": 0.0}


def _zero(x, t):
    return 0.0 * np.asarray(x) * np.asarray(t)


def test_zero_pair_gives_zero_data():
    mp = manufacture(make_spec(), _zero, _zero, _zero, _zero, _zero, lambda t: 0.0 * t)
    spec = mp.derived_spec
    x = np.linspace(0, np.pi, 7)
    assert np.all(spec.f2(x, 0.7) == 0)
    assert spec.E(1.3) == 0.0 and spec.E_pp(1.3) == 0.0
    assert mp.self_check == 0.0


def test_sine_pair_with_zero_g():
    mp = sine_mms(g_star=ZERO_G)
    spec = mp.derived_spec
    x = np.linspace(0, np.pi, 9)
    for t in (0.0, 0.4, 2.5):
        assert np.allclose(spec.f2(x, t), np.cos(t) * np.sin(x), atol=1e-13)
        assert spec.E(t) == pytest.approx(np.pi / 2 * np.sin(t), abs=1e-13)
        assert spec.E_pp(t) == pytest.approx(-np.pi / 2 * np.sin(t), abs=1e-13)


def test_g_star_shifts_f2_linearly(mms_problem):
    x = np.linspace(0, np.pi, 9)
    with_g = mms_problem.derived_spec
    without = sine_mms(g_star=ZERO_G).derived_spec
    for t in (0.1, 1.7):
        assert np.allclose(with_g.f2(x, t) - without.f2(x, t), -np.sin(x) * np.cos(t), atol=1e-13)


def test_self_check_threshold(mms_problem):
    assert mms_problem.self_check <= 1e-8


def test_nonlinear_manufactured_residual():
    base = build_spec({**SINE_PROBLEM, "nonlinearity": {"family": "sine", "coeff": 0.5}})
    mp = sine_modes(base, [{"k": 1}, {"k": 3, "amp": 0.2, "omega": 2.0, "phase": 0.3}], G_COS)
    assert mp.self_check <= 1e-8


def test_boundary_violation():
    u = lambda x, t: np.cos(x) * np.sin(t)  # noqa: E731
    with pytest.raises(BoundaryViolation):
        manufacture(make_spec(), u, u, u, u, u, np.cos)


def test_wrong_derivative_is_caught():
    u = lambda x, t: np.sin(x) * np.sin(t)  # noqa: E731
    u_t = lambda x, t: np.sin(x) * np.cos(t)  # noqa: E731
    u_tt = lambda x, t: -u(x, t)  # noqa: E731
    with pytest.raises(ManufactureError):
        # u_xx given with the wrong sign
        manufacture(make_spec(), u, u_t, u_tt, u, u_t, np.cos)


def test_measurement_matches_quadrature(mms_problem, basis16):
    spec = mms_problem.derived_spec
    x, wq = basis16.quad_nodes, basis16.quad_weights
    for t in np.linspace(0, 6, 7):
        direct = np.sum(wq * spec.K(x) * mms_problem.u_star(x, t))
        assert spec.E(t) == pytest.approx(direct, abs=1e-10)


def test_end_to_end_trivial(basis8):
    mp = manufacture(make_spec(), _zero, _zero, _zero, _zero, _zero, lambda t: 0.0 * t)
    rep = verify_end_to_end(mp, basis8, StepperConfig(dt=0.05), 2.0)
    assert rep.err_u == rep.err_ut == rep.err_g == 0.0


def test_end_to_end_sine(mms_problem, basis16):
    rep = verify_end_to_end(mms_problem, basis16, StepperConfig(dt=1e-3), 2 * np.pi)
    assert rep.err_g <= 1e-4
    assert rep.err_u <= 1e-5 and rep.err_ut <= 1e-5


def test_refinement_order(mms_problem, basis16):
    _, orders = refinement_study(mms_problem, basis16, StepperConfig(dt=2e-2), 2 * np.pi, levels=3)
    for name in ("err_u", "err_g"):
        assert all(o == pytest.approx(2.0, abs=0.15) for o in orders[name])


def test_other_interval():
    base = build_spec({**SINE_PROBLEM, "domain": [1.0, 3.0],
                       "f1": {"family": "mode", "k": 1}, "K": {"family": "trig", "terms": [
                           {"kind": "sin", "freq": np.pi / 2, "shift": 1.0},
                           {"kind": "sin", "freq": np.pi, "shift": 1.0, "amp": 0.5}]}})
    mp = sine_modes(base, [{"k": 1}, {"k": 2, "amp": 0.5, "omega": 1.0}], G_COS)
    basis = build_basis(Interval(1.0, 3.0), 8)
    rep = verify_end_to_end(mp, basis, StepperConfig(dt=2e-3), 2.0)
    assert rep.err_g <= 1e-4


def test_export_roundtrip(mms_problem, tmp_path):
    path = tmp_path / "mms.yaml"
    cfg = export_config(mms_problem, SINE_PROBLEM,
                        {"basis": {"n_modes": 16}, "solver": {"dt": 1e-3}}, path=path)
    assert yaml.safe_load(path.read_text()) == cfg
    res = resolve(cfg)
    spec = res.spec
    x = np.linspace(0, np.pi, 5)
    for t in (0.2, 3.0):
        assert np.allclose(spec.f2(x, t), mms_problem.derived_spec.f2(x, t), atol=1e-14)
        assert spec.E(t) == pytest.approx(mms_problem.derived_spec.E(t), abs=1e-14)
    assert res.manufactured.description["modes"] == SINE_MODES


def test_export_needs_description():
    mp = manufacture(make_spec(phi=Nonlinearity.zero()), _zero, _zero, _zero, _zero, _zero,
                     lambda t: 0.0 * t)
    with pytest.raises(ValueError):
        export_config(mp, SINE_PROBLEM)
