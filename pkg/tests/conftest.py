import numpy as np
import pytest

from sdwave.basis import build_basis
from sdwave.config import build_spec
from sdwave.inverse import compute_K0
from sdwave.mms import sine_modes
from sdwave.problem import DampingCoefficient, Interval, Nonlinearity, ProblemSpec

PI_DOMAIN = Interval(0.0, np.pi)


def w(k, x, length=np.pi, left=0.0):
    """Normalized Dirichlet eigenfunction."""
    return np.sqrt(2.0 / length) * np.sin(k * np.pi * (np.asarray(x) - left) / length)


def make_spec(a=1.0, b=1.0, K=None, f1=None, f2=None, E=None, E_pp=None, phi=None,
              alpha=0.1, damping=None, domain=PI_DOMAIN):
    kw = {}
    if f2 is not None:
        kw["f2"] = f2
    if E is not None:
        kw["E"] = E
    if E_pp is not None:
        kw["E_pp"] = E_pp
    return ProblemSpec(
        domain=domain, a=a,
        damping=damping or DampingCoefficient.constant(b),
        nonlinearity=phi or Nonlinearity.zero(),
        f1=f1 or (lambda x: w(1, x)), K=K or (lambda x: w(1, x)),
        alpha=alpha, **kw)


def forced_mode_spec(b=1.0, a=1.0, damping=None):
    """Direct problem c'' + b lam c' + a^2 lam c = cos(t) in mode 1 on (0, pi)."""
    return make_spec(a=a, b=b, damping=damping, f2=lambda x, t: w(1, x) * np.cos(t))


SINE_PROBLEM = {
    "domain": [0.0, float(np.pi)], "a": 1.0,
    "damping": {"family": "constant", "value": 1.0}, "nonlinearity": {"family": "zero"},
    "f1": {"family": "trig", "terms": [{"kind": "sin"}]},
    "K": {"family": "trig", "terms": [{"kind": "sin"}]},
}
SINE_MODES = [{"k": 1, "amp": 1.0, "omega": 1.0, "phase": 0.0}]
G_COS = {"family": "trig", "terms": [{"kind": "cos", "amp": 1.0, "freq": 1.0}]}


def sine_mms(alpha=0.1, g_star=G_COS):
    """u* = sin x sin t, g* = cos t, a = b = 1, phi = 0, f1 = K = sin x on (0, pi)."""
    return sine_modes(build_spec(SINE_PROBLEM, alpha=alpha), SINE_MODES, g_star)


@pytest.fixture(scope="session")
def basis16():
    return build_basis(PI_DOMAIN, 16)


@pytest.fixture(scope="session")
def basis8():
    return build_basis(PI_DOMAIN, 8)


@pytest.fixture(scope="session")
def mms_problem():
    return sine_mms()


def uncoupled(spec, basis):
    return compute_K0(spec, basis, coupled=False)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1].replace("test_", "")
            detail = ", ".join(f"{k}={_fmt(v)}" for k, v in rep.user_properties)
            lines.append((name, f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}  {detail}"))
    if lines:
        terminalreporter.section("acceptance")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, list):
        return "[" + " ".join(_fmt(x) for x in v) + "]"
    return str(v)
