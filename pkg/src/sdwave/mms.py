"""Manufactured solutions: exact (u*, g*) pairs and the data that produce them.

Given u* and g*, the forcing f2 and the measurement E are chosen so that
(u*, g*) solves the identification problem exactly:

    f2 = u*_tt - a^2 u*_xx - b(t) u*_xxt + phi(x, u*) - f1 g*
    E  = integral K u* dx,   E'' = integral K u*_tt dx
"""

import copy
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import yaml

from .basis import project
from .errors import BoundaryViolation, ManufactureError
from .families import time_function
from .inverse import compute_K0, eval_t, eval_xt
from .solver import solve_ivp

_QUAD_NODES = 256


@dataclass(eq=False)
class ManufacturedProblem:
    u_star: Callable
    u_star_t: Callable
    u_star_tt: Callable
    g_star: Callable
    derived_spec: object
    # sup of the equation residual found by the build-time self check
    self_check: float = 0.0
    # declarative form, present when the problem can be exported to a config
    description: dict = field(default_factory=dict)


def _quadrature(domain, n=_QUAD_NODES):
    xr, wr = np.polynomial.legendre.leggauss(n)
    half = 0.5 * domain.length
    return domain.left + half * (xr + 1.0), half * wr


def _fd_t(f, x, t, h):
    """Five-point first and second t-derivatives of f(x, t)."""
    fm2, fm1, fp1, fp2 = (f(x, t + s * h) for s in (-2, -1, 1, 2))
    f0 = f(x, t)
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    return d1, d2


def _fd_xx(f, x, t, h):
    fm2, fm1, fp1, fp2 = (f(x + s * h, t) for s in (-2, -1, 1, 2))
    return (-fm2 + 16 * fm1 - 30 * f(x, t) + 16 * fp1 - fp2) / (12 * h * h)


def _close(a, b, rtol, scale):
    return np.max(np.abs(a - b)) <= rtol * max(scale, 1.0)


def manufacture(base, u_star, u_star_t, u_star_tt, u_star_xx, u_star_xxt, g_star,
                t_span=(0.0, 2.0 * np.pi), samples=1000, seed=0, tol=1e-8):
    """Derive f2, E and E'' for an exact pair and self-check the result.

    All u* callables take (x, t) and broadcast over arrays.

    Raises
    ------
    BoundaryViolation
        u* does not vanish at the interval ends on the sampled times.
    ManufactureError
        A supplied derivative disagrees with a finite-difference check, or the
        equation residual exceeds ``tol``.
    """
    dom = base.domain
    rng = np.random.default_rng(seed)
    ts = rng.uniform(t_span[0], t_span[1], samples)
    xs = rng.uniform(dom.left, dom.right, samples)

    scale = max(float(np.max(np.abs(u_star(xs, ts)))), 1.0)
    ends = np.concatenate([u_star(np.full_like(ts, dom.left), ts),
                           u_star(np.full_like(ts, dom.right), ts)])
    if np.max(np.abs(ends)) > 1e-10 * scale:
        raise BoundaryViolation(
            f"u* reaches {np.max(np.abs(ends)):.3e} on the boundary; Dirichlet data must vanish")

    # derivative consistency, on a subsample to keep the check cheap
    sub = slice(0, min(samples, 200))
    x_s, t_s = xs[sub], ts[sub]
    h_t = 1e-3 * max(1.0, t_span[1] - t_span[0])
    h_x = 1e-3 * dom.length
    d1, d2 = _fd_t(u_star, x_s, t_s, h_t)
    checks = {
        "u_t": (d1, u_star_t(x_s, t_s)),
        "u_tt": (d2, u_star_tt(x_s, t_s)),
        "u_xx": (_fd_xx(u_star, x_s, t_s, h_x), u_star_xx(x_s, t_s)),
        "u_xxt": (_fd_t(u_star_xx, x_s, t_s, h_t)[0], u_star_xxt(x_s, t_s)),
    }
    for name, (fd, given) in checks.items():
        if not _close(fd, given, 1e-5, float(np.max(np.abs(given)))):
            raise ManufactureError(
                f"supplied {name} disagrees with finite differences by "
                f"{np.max(np.abs(fd - given)):.3e}")

    a2 = base.a ** 2
    phi = base.nonlinearity.phi
    f1 = base.f1
    b = base.b

    def f2(x, t):
        return (u_star_tt(x, t) - a2 * u_star_xx(x, t) - b(t) * u_star_xxt(x, t)
                + phi(x, u_star(x, t)) - f1(x) * g_star(t))

    def f2_t(x, t):
        h = 1e-4 * max(1.0, t_span[1] - t_span[0])
        return (f2(x, t + h) - f2(x, t - h)) / (2.0 * h)

    nodes, weights = _quadrature(dom)
    k_w = weights * base.K(nodes)

    def E(t):
        return k_w @ eval_xt(u_star, nodes, np.atleast_1d(t)) if np.ndim(t) else \
            float(k_w @ u_star(nodes, t))

    def E_pp(t):
        return k_w @ eval_xt(u_star_tt, nodes, np.atleast_1d(t)) if np.ndim(t) else \
            float(k_w @ u_star_tt(nodes, t))

    spec = replace(base, f2=f2, f2_t=f2_t, E=E, E_pp=E_pp,
                   meta={**base.meta, "manufactured": True})

    # equation residual evaluated term by term against the derived data
    lhs = (u_star_tt(xs, ts) - a2 * u_star_xx(xs, ts) - b(ts) * u_star_xxt(xs, ts)
           + phi(xs, u_star(xs, ts)))
    rhs = f1(xs) * g_star(ts) + np.array([spec.f2(x, t) for x, t in zip(xs, ts)])
    resid = float(np.max(np.abs(lhs - rhs)))
    if resid > tol:
        raise ManufactureError(f"equation residual {resid:.3e} exceeds {tol:.1e}")
    e_check = _fd_t(lambda x, t: eval_t(E, t), None, ts[:20], h_t)[1] - eval_t(E_pp, ts[:20])
    if np.max(np.abs(e_check)) > 1e-5 * max(1.0, float(np.max(np.abs(eval_t(E, ts[:20]))))):
        raise ManufactureError("E'' inconsistent with E")
    return ManufacturedProblem(u_star, u_star_t, u_star_tt, g_star, spec, resid)


def sine_modes(base, modes, g_star, **kwargs):
    """Manufactured problem with u* = sum amp sin(k pi (x-left)/|I|) sin(omega t + phase).

    ``modes`` is a list of dicts with keys k, amp, omega, phase; ``g_star`` is
    a time-family spec (see :mod:`sdwave.families`).
    """
    dom = base.domain
    parsed = []
    for m in modes:
        k = int(m["k"])
        if k < 1:
            raise ValueError("mode index must be >= 1")
        parsed.append((k * np.pi / dom.length, float(m.get("amp", 1.0)),
                       float(m.get("omega", 1.0)), float(m.get("phase", 0.0))))

    def build(dx, dt_order):
        def f(x, t):
            x = np.asarray(x, dtype=float)
            t = np.asarray(t, dtype=float)
            out = 0.0
            for kw, amp, om, ph in parsed:
                sx = np.sin(kw * (x - dom.left)) * (-kw * kw) ** dx
                st = np.sin(om * t + ph + 0.5 * np.pi * dt_order) * om ** dt_order
                out = out + amp * sx * st
            return out
        return f

    gt = time_function(g_star, "g_star")
    mp = manufacture(base, build(0, 0), build(0, 1), build(0, 2), build(1, 0), build(1, 1),
                     gt.f, **kwargs)
    mp.description = {"family": "sine_modes", "modes": [dict(m) for m in modes],
                      "g_star": copy.deepcopy(g_star)}
    return mp


@dataclass(eq=False)
class MMSReport:
    err_u: float
    err_ut: float
    err_g: float
    dt: float
    n_modes: int
    traj: object = None


def verify_end_to_end(mp, basis, stepper, horizon, s=0.0, tables=None):
    """Solve from the projected exact data and compare with (u*, g*) on [s, s+horizon]."""
    spec = mp.derived_spec
    tables = compute_K0(spec, basis) if tables is None else tables
    u0 = project(basis, lambda x: mp.u_star(x, s))
    u1 = project(basis, lambda x: mp.u_star_t(x, s))
    traj = solve_ivp(spec, basis, s, s + horizon, u0, u1, stepper, tables=tables)
    x = basis.quad_nodes
    u_exact = eval_xt(mp.u_star, x, traj.t).T
    ut_exact = eval_xt(mp.u_star_t, x, traj.t).T
    err_u = float(np.max(np.abs(traj.c @ basis.values.T - u_exact)))
    err_ut = float(np.max(np.abs(traj.c_dot @ basis.values.T - ut_exact)))
    err_g = float(np.max(np.abs(traj.g - eval_t(mp.g_star, traj.t))))
    return MMSReport(err_u, err_ut, err_g, stepper.dt, basis.n_modes, traj)


def refinement_study(mp, basis, stepper, horizon, levels=2, s=0.0):
    """Errors under repeated dt halving and the observed orders.

    Returns (reports, orders) where orders[name][j] = log2(err_j / err_{j+1}).
    """
    reports = []
    for j in range(levels):
        cfg = replace(stepper, dt=stepper.dt / 2 ** j)
        rep = verify_end_to_end(mp, basis, cfg, horizon, s)
        rep.traj = None
        reports.append(rep)
    orders = {}
    for name in ("err_u", "err_ut", "err_g"):
        vals = [getattr(r, name) for r in reports]
        orders[name] = [float(np.log2(a / b)) if a > 0 and b > 0 else float("nan")
                        for a, b in zip(vals, vals[1:])]
    return reports, orders


def export_config(mp, problem, extra=None, path=None):
    """Config dict (and optionally a YAML file) reproducing ``mp`` through the CLI.

    ``problem`` is the declarative problem block the base spec was built from;
    ``extra`` merges further sections such as ``basis`` or ``solver``.
    """
    if not mp.description:
        raise ValueError("manufactured problem has no declarative description")
    cfg = {"problem": copy.deepcopy(problem), "manufactured": copy.deepcopy(mp.description)}
    for key in ("f2", "E"):
        cfg["problem"].pop(key, None)
    cfg.update(copy.deepcopy(extra or {}))
    if path is not None:
        with open(path, "w") as fh:
            yaml.safe_dump(cfg, fh, sort_keys=False)
    return cfg
