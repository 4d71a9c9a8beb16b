import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave import families
from sdwave.config import apply_overrides, build_spec, load_config, resolve
from sdwave.errors import ConfigError
from sdwave.problem import Interval

from conftest import SINE_PROBLEM, w

DOM = Interval(0.0, np.pi)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3), st.floats(-3, 3), st.floats(-5, 5))
def test_trig_time_derivatives(amp, freq, phase, t):
    tf = families.time_function({"family": "trig", "const": 0.5,
                                 "terms": [{"kind": "cos", "amp": amp, "freq": freq,
                                            "phase": phase}]})
    assert tf.f(t) == pytest.approx(0.5 + amp * np.cos(freq * t + phase), abs=1e-12)
    assert tf.d1(t) == pytest.approx(-amp * freq * np.sin(freq * t + phase), abs=1e-12)
    assert tf.d2(t) == pytest.approx(-amp * freq ** 2 * np.cos(freq * t + phase), abs=1e-11)
    assert tf.bound == pytest.approx(0.5 + abs(amp))


def test_time_families():
    c = families.time_function({"family": "constant", "value": 2.0})
    assert c.f(1.0) == 2.0 and np.all(c.d2(np.arange(3.0)) == 0)
    assert families.time_function(3.0).f(0.0) == 3.0
    tab = families.time_function({"family": "table", "t": [0, 1, 2], "values": [0, 2, 0]})
    assert tab.f(0.5) == 1.0 and tab.d1(0.5) == 2.0 and tab.d1(1.5) == -2.0
    with pytest.raises(ConfigError):
        families.time_function({"family": "table", "t": [0, 0], "values": [1, 2]})
    with pytest.raises(ConfigError):
        families.time_function({"family": "wavelet"})
    with pytest.raises(ConfigError):
        families.time_function({"family": "trig", "terms": [{"kind": "tan"}]})


def test_space_families():
    x = np.linspace(0, np.pi, 11)
    m = families.space_function({"family": "mode", "k": 2, "amp": 3.0}, DOM)
    assert np.allclose(m.f(x), 3 * w(2, x)) and np.allclose(m.d2(x), -12 * w(2, x))
    trig = families.space_function({"family": "trig", "terms": [{"kind": "sin", "freq": 3}]}, DOM)
    assert np.allclose(trig.d2(x), -9 * np.sin(3 * x))
    assert np.all(families.space_function({"family": "zero"}, DOM).f(x) == 0)
    tab = families.space_function({"family": "table", "x": [0, np.pi], "values": [0, 1]}, DOM)
    assert tab.f(np.pi / 2) == pytest.approx(0.5) and tab.d2 is None
    with pytest.raises(ConfigError):
        families.space_function({"family": "mode", "k": 0}, DOM)
    with pytest.raises(ConfigError):
        families.space_function([1, 2], DOM)


def test_separable_space_time():
    f, f_t = families.space_time_function(
        {"family": "separable", "terms": [{"x": {"family": "mode", "k": 1},
                                           "t": {"family": "trig", "terms": [{"kind": "sin"}]}}]},
        DOM)
    assert f(1.0, 0.3) == pytest.approx(w(1, 1.0) * np.sin(0.3))
    assert f_t(1.0, 0.3) == pytest.approx(w(1, 1.0) * np.cos(0.3))
    z, _ = families.space_time_function({"family": "zero"}, DOM)
    assert z(np.ones(3), 1.0).shape == (3,)


def test_damping_bounds_derived():
    d = families.damping({"family": "trig", "const": 2.0,
                          "terms": [{"kind": "sin", "amp": 0.1}, {"kind": "sin", "amp": 0.1,
                                                                   "freq": np.sqrt(2)}]})
    assert d.lower == pytest.approx(1.8) and d.upper == pytest.approx(2.2)
    assert d.deriv_bound == pytest.approx(0.1 * (1 + np.sqrt(2)))
    c = families.damping({"family": "constant", "value": 1.5})
    assert c.lower == c.upper == 1.5 and c.deriv_bound == 0.0


@pytest.mark.parametrize("spec,lip", [({"family": "linear", "coeff": 2.0}, 2.0),
                                      ({"family": "sine", "coeff": 0.5, "freq": 2.0}, 1.0),
                                      ({"family": "tanh", "coeff": 3.0, "scale": 0.5}, 1.5),
                                      ({"family": "quadratic", "coeff": 1.0, "lipschitz": 4.0}, 4.0)])
def test_nonlinearities(spec, lip):
    nl = families.nonlinearity(spec)
    assert nl.lipschitz == pytest.approx(lip)
    assert nl.phi(0.0, 0.0) == 0.0
    xi = np.linspace(-0.5, 0.5, 5)
    h = 1e-6
    assert np.allclose((nl.phi(0.0, xi + h) - nl.phi(0.0, xi - h)) / (2 * h), nl.phi_xi(0.0, xi),
                       atol=1e-6)
    with pytest.raises(ConfigError):
        families.nonlinearity({"family": "cubic"})


def test_overrides():
    cfg = {"problem": {"a": 1.0}, "solver": {"dt": 1e-3}}
    out = apply_overrides(cfg, ["solver.dt=5e-4", "problem.alpha=0.01", "longtime.workers=2"])
    assert out["solver"]["dt"] == 5e-4 and out["problem"]["alpha"] == 0.01
    assert out["longtime"]["workers"] == 2 and cfg["solver"]["dt"] == 1e-3
    for bad in (["solver.dt"], ["solver..dt=1"], ["problem.a.b=1"]):
        with pytest.raises(ConfigError):
            apply_overrides(cfg, bad)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("problem: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    nop = tmp_path / "nop.yaml"
    nop.write_text("solver: {dt: 0.1}\n")
    with pytest.raises(ConfigError):
        load_config(nop)


def test_build_spec_and_resolve_defaults():
    spec = build_spec(SINE_PROBLEM, alpha=0.3)
    assert spec.alpha == 0.3 and spec.a == 1.0 and spec.meta["problem"]["a"] == 1.0
    res = resolve({"problem": dict(SINE_PROBLEM)})
    assert res.basis.n_modes == 16 and res.stepper.dt == 1e-3
    assert res.config["problem"]["alpha"] == pytest.approx(res.spec.alpha)
    assert res.config["problem"]["alpha_source"] in ("default", "smallness")
    assert res.config["solver"]["nonlinear_tol"] == 1e-12
    with pytest.raises(ConfigError):
        resolve({"problem": dict(SINE_PROBLEM), "solver": {"dt": -1}})
    with pytest.raises(ConfigError):
        build_spec({"domain": [0, "x"]})
