"""Continuous problem data for the strongly damped wave equation.

    u_tt - a^2 u_xx - b(t) u_xxt + phi(x, u) = f1(x) g(t) + f2(x, t)    on (left, right)
    u = 0 at both ends,     integral K(x) u(x, t) dx = E(t)

Coefficient callables are expected to be vectorized over ``x`` (numpy arrays).
Time arguments are scalars unless stated otherwise; functions that also
broadcast over time arrays are used in vectorized form when possible.
"""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

Func1 = Callable[[np.ndarray], np.ndarray]
Func2 = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Interval:
    left: float
    right: float

    def __post_init__(self):
        if not (np.isfinite(self.left) and np.isfinite(self.right)):
            raise ValueError("interval endpoints must be finite")
        if not self.left < self.right:
            raise ValueError(f"need left < right, got ({self.left}, {self.right})")

    @property
    def length(self):
        return self.right - self.left


def _zero_t(t):
    return np.zeros_like(np.asarray(t, dtype=float))


def _zero_x(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _zero_xt(x, t):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)


@dataclass(frozen=True)
class DampingCoefficient:
    """Strong-damping factor b(t) with its declared bounds."""

    b: Callable
    b_prime: Callable
    lower: float
    upper: float
    deriv_bound: float = 0.0

    @classmethod
    def constant(cls, value):
        value = float(value)
        return cls(
            b=lambda t: np.full(np.shape(t), value) if np.ndim(t) else value,
            b_prime=_zero_t,
            lower=value,
            upper=value,
            deriv_bound=0.0,
        )


@dataclass(frozen=True)
class Nonlinearity:
    """Lipschitz nonlinearity phi(x, xi) with phi(x, 0) = 0."""

    phi: Callable
    phi_xi: Callable
    lipschitz: float
    # lets the solver skip quadrature and fixed-point work
    is_zero: bool = False

    @classmethod
    def zero(cls):
        return cls(phi=lambda x, xi: np.zeros_like(xi * 1.0),
                   phi_xi=lambda x, xi: np.zeros_like(xi * 1.0),
                   lipschitz=0.0, is_zero=True)

    @classmethod
    def linear(cls, coeff):
        coeff = float(coeff)
        return cls(phi=lambda x, xi: coeff * xi,
                   phi_xi=lambda x, xi: np.full(np.shape(xi), coeff),
                   lipschitz=abs(coeff), is_zero=coeff == 0.0)


@dataclass(frozen=True)
class ProblemSpec:
    domain: Interval
    a: float
    damping: DampingCoefficient
    nonlinearity: Nonlinearity
    f1: Func1
    K: Func1
    f2: Func2 = _zero_xt
    f2_t: Func2 = _zero_xt
    E: Callable = _zero_t
    E_pp: Callable = _zero_t
    alpha: float = 0.1
    # free-form provenance (config echo, manufactured-solution tags)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.a == 0:
            raise ValueError("wave speed factor a must be nonzero")
        if not self.alpha > 0:
            raise ValueError(f"penalty parameter alpha must be positive, got {self.alpha}")

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))

    def b(self, t):
        return self.damping.b(t)


def central_second_derivative(f, time_scale=1.0):
    """Fallback E'' by a central difference with step 1e-4 * time_scale."""
    h = 1e-4 * time_scale

    def f_pp(t):
        return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)

    return f_pp


def central_time_derivative(f, time_scale=1.0):
    """Fallback d/dt of f(x, t) by a central difference."""
    h = 1e-4 * time_scale

    def f_t(x, t):
        return (f(x, t + h) - f(x, t - h)) / (2.0 * h)

    return f_t


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    worst: float
    location: tuple
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list

    @property
    def violations(self):
        return [c for c in self.checks if not c.passed]

    @property
    def ok(self):
        return not self.violations

    def as_dict(self):
        return {
            c.name: {"passed": c.passed, "worst": float(c.worst),
                     "location": [float(v) for v in c.location], "detail": c.detail}
            for c in self.checks
        }


def _gauss_integral(domain, func, n=256):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    x = domain.left + 0.5 * domain.length * (nodes + 1.0)
    return 0.5 * domain.length * np.sum(weights * func(x))


def validate_on_grid(spec, t_samples, x_samples, xi_samples, rtol=1e-12):
    """Spot-check the standing assumptions on explicit sample grids.

    Every check is a max/min over the supplied points, so a grid that passes
    also passes on any subset of it.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    x_samples = np.asarray(x_samples, dtype=float)
    xi_samples = np.asarray(xi_samples, dtype=float)
    damp = spec.damping
    checks = []

    bt = np.array([float(damp.b(t)) for t in t_samples])
    bpt = np.array([float(damp.b_prime(t)) for t in t_samples])

    i = int(np.argmin(bt))
    checks.append(AssumptionCheck(
        "damping_lower", bool(damp.lower > 0 and bt[i] >= damp.lower * (1 - rtol)),
        bt[i], (t_samples[i],), f"min b = {bt[i]:.6g}, declared lower = {damp.lower:.6g}"))
    i = int(np.argmax(bt))
    checks.append(AssumptionCheck(
        "damping_upper", bool(bt[i] <= damp.upper * (1 + rtol) + rtol),
        bt[i], (t_samples[i],), f"max b = {bt[i]:.6g}, declared upper = {damp.upper:.6g}"))
    i = int(np.argmax(np.abs(bpt)))
    checks.append(AssumptionCheck(
        "damping_derivative", bool(abs(bpt[i]) <= damp.deriv_bound * (1 + rtol) + rtol),
        abs(bpt[i]), (t_samples[i],),
        f"max |b'| = {abs(bpt[i]):.6g}, declared bound = {damp.deriv_bound:.6g}"))

    phi = spec.nonlinearity.phi
    lip = spec.nonlinearity.lipschitz
    at_zero = np.abs(phi(x_samples, np.zeros_like(x_samples)))
    i = int(np.argmax(at_zero))
    checks.append(AssumptionCheck(
        "phi_zero", bool(at_zero[i] <= rtol), at_zero[i], (x_samples[i],),
        "phi(x, 0) must vanish"))

    worst, where = 0.0, (x_samples[0], xi_samples[0], xi_samples[0])
    xi, eta = np.meshgrid(xi_samples, xi_samples, indexing="ij")
    gap = np.abs(xi - eta)
    for x in x_samples:
        diff = np.abs(phi(np.full(xi.shape, x), xi) - phi(np.full(eta.shape, x), eta))
        excess = diff - lip * gap
        j = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[j] > worst:
            worst, where = float(excess[j]), (x, xi[j], eta[j])
    checks.append(AssumptionCheck(
        "phi_lipschitz", bool(worst <= rtol * max(1.0, lip)), worst, where,
        f"largest |phi(x,xi)-phi(x,eta)| - L|xi-eta| with L = {lip:.6g}"))

    dom = spec.domain
    k_ends = np.abs(spec.K(np.array([dom.left, dom.right])))
    i = int(np.argmax(k_ends))
    k_scale = np.sqrt(_gauss_integral(dom, lambda x: spec.K(x) ** 2))
    checks.append(AssumptionCheck(
        "K_boundary", bool(k_ends[i] <= 1e-10 * max(1.0, k_scale)), k_ends[i],
        ((dom.left, dom.right)[i],), "K must vanish at both endpoints"))

    kf1 = _gauss_integral(dom, lambda x: spec.K(x) * spec.f1(x))
    f1_scale = np.sqrt(_gauss_integral(dom, lambda x: spec.f1(x) ** 2))
    tol = 1e-8 * k_scale * f1_scale
    checks.append(AssumptionCheck(
        "K_f1_pairing", bool(abs(kf1) > tol), abs(kf1), (),
        f"|integral K f1| = {abs(kf1):.3e}, tolerance {tol:.3e}"))
    return ValidationReport(checks)


def validate(spec, sample_count, t_span=(0.0, 20.0), xi_span=(-3.0, 3.0)):
    """Sampled check of the standing assumptions on the data.

    Parameters
    ----------
    spec : ProblemSpec
    sample_count : int
        Points per sampled axis (t, x, xi); must be at least 2.
    t_span, xi_span : tuple
        Ranges sampled for the damping coefficient and the nonlinearity argument.

    Returns
    -------
    ValidationReport
        One entry per assumption; violations are reported, never raised.
    """
    if sample_count < 2:
        raise ValueError("sample_count must be at least 2")
    dom = spec.domain
    return validate_on_grid(
        spec,
        np.linspace(t_span[0], t_span[1], sample_count),
        np.linspace(dom.left, dom.right, sample_count),
        np.linspace(xi_span[0], xi_span[1], sample_count),
    )
