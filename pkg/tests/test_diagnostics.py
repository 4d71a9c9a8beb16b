import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave.basis import build_basis, project
from sdwave.diagnostics import (CONDITIONS, energy_series, eps_constants, eta_bounds,
                                fit_decay_rate, friedrichs_constant, regularity_transfer_check,
                                smallness_check, weighted_energy)
from sdwave.errors import InadmissibleEta, InsufficientPositiveSamples
from sdwave.problem import DampingCoefficient, Interval, Nonlinearity
from sdwave.solver import StepperConfig, Trajectory, solve_ivp

from conftest import make_spec, uncoupled, w

E1 = np.eye(8)[0]
ZERO = np.zeros(8)


@pytest.mark.parametrize("domain,gamma", [((0.0, np.pi), 1.0), ((0.0, 1.0), 1 / np.pi),
                                          ((0.0, 2 * np.pi), 2.0), ((-1.0, 1.0), 2 / np.pi)])
def test_friedrichs_values(domain, gamma):
    basis = build_basis(Interval(*domain), 4)
    assert abs(friedrichs_constant(basis) - gamma) <= 1e-12
    assert friedrichs_constant(basis) == pytest.approx(1 / np.sqrt(basis.eigenvalues[0]), rel=1e-14)


def test_eta_bounds():
    assert eta_bounds(1.0, 1.0, 1.0) == (1.0, 1.0)
    bw, bv = eta_bounds(1.0, 0.5, 2.0)
    assert bw == pytest.approx(1 / 3.5) and bv == pytest.approx(1.5 / 4)


def _zero_traj(n=5):
    return Trajectory(np.linspace(0, 1, n), np.zeros((n, 8)), np.zeros((n, 8)), np.zeros(n), 0.25,
                      {"coupled": False})


def test_energy_series_of_zero_trajectory(basis8):
    s = energy_series(_zero_traj(), basis8, make_spec(), 0.3)
    for arr in (s.E_basic, s.W_eta, s.F_second, s.V_eta):
        assert np.all(arr == 0)


def test_basic_energy_of_sine_standing_wave(basis16):
    # u = sin x sin t at t = pi/2: u_t = 0 and ||u_x||^2 = pi/2
    c = project(basis16, np.sin)
    e, _ = weighted_energy(basis16, 1.0, 0.3, 1.0, c, np.zeros(16))
    assert e == pytest.approx(np.pi / 4, rel=1e-13)


def test_inadmissible_eta_is_rejected(basis8):
    with pytest.raises(InadmissibleEta):
        energy_series(_zero_traj(), basis8, make_spec(), 1.5)
    with pytest.raises(InadmissibleEta):
        energy_series(_zero_traj(), basis8, make_spec(), 0.0)


def test_single_mode_W_decays_at_modal_rate(basis8):
    spec = make_spec(b=3.0)
    tab = uncoupled(spec, basis8)
    tr = solve_ivp(spec, basis8, 0.0, 40.0, E1, ZERO, StepperConfig(dt=0.01), tables=tab)
    s = energy_series(tr, basis8, spec, 0.25, tab, fit_tail=0.5)
    # slow root of mu^2 + 3 mu + 1 = 0; a quadratic energy decays at twice it
    assert s.eta1_fit == pytest.approx(3 - np.sqrt(5), rel=1e-3)


def test_fit_decay_rate_examples():
    t = np.linspace(0, 40, 4001)
    assert fit_decay_rate(np.exp(-0.3 * t), t)[0] == pytest.approx(0.3, abs=1e-6)
    assert fit_decay_rate(np.exp(-0.3 * t) * (1 + 0.01 * np.sin(t)), t)[0] == \
        pytest.approx(0.3, abs=0.01)
    assert fit_decay_rate(np.full_like(t, 2.0), t)[0] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InsufficientPositiveSamples):
        fit_decay_rate(np.zeros_like(t), t)
    with pytest.raises(ValueError):
        fit_decay_rate(np.ones(4), np.arange(4.0), tail_fraction=0.0)


def test_tiny_tail_values_are_trimmed():
    t = np.linspace(0, 10, 101)
    s = np.exp(-t)
    s[-10:] = 1e-300
    assert fit_decay_rate(s, t)[0] == pytest.approx(1.0, abs=1e-9)


def test_eps_constants_are_affine_increasing_in_alpha(basis8):
    rep = smallness_check(make_spec(K=np.sin, f1=np.sin), basis8, alpha=0.5)
    for name, val in rep.eps.items():
        assert rep.eps_at_zero[name] <= val + 1e-15
    prev = None
    for alpha in (0.0, 0.1, 0.2, 0.4):
        cur = eps_constants(1.0, 1.0, 0.0, 0.0, 1.0, rep.norms, alpha)
        if prev is not None:
            assert all(cur[k] >= prev[k] for k in cur)
        prev = cur


def test_report_shape(basis8):
    rep = smallness_check(make_spec(), basis8)
    assert set(rep.conditions) == set(CONDITIONS)
    assert set(rep.margins) == set(CONDITIONS)
    assert {f"eps{i}" for i in (1, 2, 7, 8, 9, 10)} <= set(rep.eps)
    assert rep.verdict == all(rep.conditions.values())
    assert rep.gamma == 1.0
    assert set(rep.eps_free) == {"eps0", "eps3", "eps4", "eps6"}
    flat = rep.as_dict()
    assert flat["condition.eps00.passed"] == rep.conditions["eps00"]


def test_large_lipschitz_fails(basis8):
    rep = smallness_check(make_spec(phi=Nonlinearity.linear(1e3)), basis8)
    assert not (rep.conditions["eps0"] and rep.conditions["B_pos"])
    assert not rep.verdict


def test_gradient_term_is_scale_invariant(basis8):
    # the K-dependent constants only see ||K0|| ||K|| and ||grad K|| ||K0||, both invariant
    # under rescaling K, so shrinking K cannot rescue B
    margins = []
    for s in (1.0, 1e-3):
        rep = smallness_check(make_spec(K=lambda x: s * w(1, x), f1=lambda x: s * w(1, x)),
                              basis8, eps_free={"eps0": 1.0, "eps3": 1.0, "eps4": 1.0, "eps6": 1.0})
        margins.append(rep.margins["B_pos"])
    assert margins[0] == pytest.approx(margins[1], rel=1e-9)
    assert margins[0] <= 0


FREE = {"eps0": 1.0, "eps3": 1.0, "eps4": 0.1, "eps6": 0.1}


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 5.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.01, 1.0))
def test_smallness_monotone(L, b1, alpha, shrink):
    basis = build_basis(Interval(0.0, np.pi), 8)

    def rep(L, b1, alpha):
        damp = DampingCoefficient(lambda t: 2.0 + 0 * t, lambda t: 0 * t, 2.0 - b1, 2.0 + b1, b1)
        return smallness_check(make_spec(phi=Nonlinearity.linear(L), damping=damp), basis,
                               alpha=alpha, eta=0.2, eta1=0.02, eps_free=FREE)

    hi = rep(L, b1, alpha)
    lo = rep(shrink * L, shrink * b1, shrink * alpha)
    for name, ok in hi.conditions.items():
        if ok:
            assert lo.conditions[name], name


def test_alpha_max_is_consistent(basis8):
    rep = smallness_check(make_spec(), basis8, eps_free=FREE)
    if rep.alpha_max is not None:
        assert smallness_check(make_spec(), basis8, alpha=0.5 * rep.alpha_max,
                               eps_free=FREE).verdict


def test_truncation_is_reported(basis8):
    rep = smallness_check(make_spec(K=lambda x: x * (np.pi - x), f1=np.sin), basis8)
    assert rep.truncation["grad_K"] > 0
    assert isinstance(rep.thin_margins, list)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8))
def test_friedrichs_in_modal_arithmetic(c):
    basis = build_basis(Interval(0.0, 2.0), 8)
    c = np.array(c)
    gamma = friedrichs_constant(basis)
    lhs = np.sum(c ** 2)
    rhs = gamma ** 2 * np.sum(basis.eigenvalues * c ** 2)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


def test_regularity_transfer_examples(basis8):
    assert regularity_transfer_check(_zero_traj(), make_spec(), basis8) == 0.0
    spec = make_spec(b=0.5)
    tab = uncoupled(spec, basis8)
    errs = []
    for dt in (0.01, 0.005):
        tr = solve_ivp(spec, basis8, 0.0, 5.0, E1, ZERO, StepperConfig(dt=dt), tables=tab)
        errs.append(regularity_transfer_check(tr, spec, basis8))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)
    bad = Trajectory(tr.t, tr.c, tr.c_dot.copy(), tr.g, tr.dt, tr.meta)
    bad.c_dot[len(tr) // 2:] = 0.0
    assert regularity_transfer_check(bad, spec, basis8) > 1e-2
