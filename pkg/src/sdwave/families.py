"""Named coefficient families for configuration files.

Every family is a plain dict. Time functions come back with their first and
second derivatives, space functions with their second derivative where the
family allows it, so manufactured problems and E'' never need numerical
differentiation for trigonometric data.

Time function families::

    {family: constant, value: v}
    {family: trig, const: c0, terms: [{kind: sin|cos, amp, freq, phase}]}
    {family: table, t: [...], values: [...]}          # piecewise linear

Space function families::

    {family: zero}
    {family: trig, terms: [{kind: sin|cos, amp, freq, shift}]}
    {family: mode, k: 1, amp: 1}                       # normalized eigenfunction
    {family: table, x: [...], values: [...]}

Space-time families::

    {family: zero}
    {family: separable, terms: [{x: <space spec>, t: <time spec>}]}
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .problem import DampingCoefficient, Nonlinearity


@dataclass(frozen=True)
class TimeFunction:
    f: Callable
    d1: Callable
    d2: Callable
    bound: float
    d1_bound: float


@dataclass(frozen=True)
class SpaceFunction:
    f: Callable
    # second derivative in x, None when the family has no closed form
    d2: Callable = None


def _req(spec, key, where):
    if key not in spec:
        raise ConfigError(f"{where}: missing key {key!r}")
    return spec[key]


def _family(spec, where):
    if isinstance(spec, (int, float)):
        return "constant", {"value": float(spec)}
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(spec).__name__}")
    return spec.get("family", "constant"), spec


def time_function(spec, where="time function"):
    fam, spec = _family(spec, where)
    if fam == "constant":
        v = float(_req(spec, "value", where))
        z = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        return TimeFunction(lambda t: v + z(t), z, z, abs(v), 0.0)
    if fam == "trig":
        c0 = float(spec.get("const", 0.0))
        terms = []
        for j, term in enumerate(spec.get("terms", [])):
            kind = term.get("kind", "sin")
            if kind not in ("sin", "cos"):
                raise ConfigError(f"{where}.terms[{j}]: kind must be sin or cos")
            terms.append((kind, float(term.get("amp", 1.0)), float(term.get("freq", 1.0)),
                          float(term.get("phase", 0.0))))

        def make(order):
            def f(t):
                t = np.asarray(t, dtype=float)
                out = np.full(t.shape, c0 if order == 0 else 0.0)
                for kind, amp, w, ph in terms:
                    arg = w * t + ph
                    if kind == "cos":
                        arg = arg + 0.5 * np.pi
                    # derivatives of sin shift the phase by pi/2 each
                    out = out + amp * w ** order * np.sin(arg + 0.5 * np.pi * order)
                return out if out.ndim else float(out)
            return f

        bound = abs(c0) + sum(abs(a) for _, a, _, _ in terms)
        d1b = sum(abs(a * w) for _, a, w, _ in terms)
        return TimeFunction(make(0), make(1), make(2), bound, d1b)
    if fam == "table":
        tt = np.asarray(_req(spec, "t", where), dtype=float)
        vv = np.asarray(_req(spec, "values", where), dtype=float)
        if tt.shape != vv.shape or tt.size < 2 or np.any(np.diff(tt) <= 0):
            raise ConfigError(f"{where}: table needs increasing t and matching values")
        slopes = np.diff(vv) / np.diff(tt)

        def f(t):
            out = np.interp(t, tt, vv)
            return out if np.ndim(out) else float(out)

        def d1(t):
            i = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, slopes.size - 1)
            out = slopes[i]
            return out if np.ndim(out) else float(out)

        def d2(t):
            return np.zeros_like(np.asarray(t, dtype=float))

        return TimeFunction(f, d1, d2, float(np.max(np.abs(vv))), float(np.max(np.abs(slopes))))
    raise ConfigError(f"{where}: unknown time family {fam!r}")


def space_function(spec, domain, where="space function"):
    fam, spec = _family(spec, where)
    if fam == "zero" or (fam == "constant" and float(spec.get("value", 0.0)) == 0.0):
        z = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
        return SpaceFunction(z, z)
    if fam == "constant":
        v = float(spec["value"])
        return SpaceFunction(lambda x: np.full(np.shape(x), v),
                             lambda x: np.zeros_like(np.asarray(x, dtype=float)))
    if fam == "mode":
        k = int(_req(spec, "k", where))
        amp = float(spec.get("amp", 1.0))
        if k < 1:
            raise ConfigError(f"{where}: mode index must be >= 1")
        w = k * np.pi / domain.length
        norm = amp * np.sqrt(2.0 / domain.length)
        return SpaceFunction(lambda x: norm * np.sin(w * (np.asarray(x) - domain.left)),
                             lambda x: -w * w * norm * np.sin(w * (np.asarray(x) - domain.left)))
    if fam == "trig":
        terms = []
        for j, term in enumerate(_req(spec, "terms", where)):
            kind = term.get("kind", "sin")
            if kind not in ("sin", "cos"):
                raise ConfigError(f"{where}.terms[{j}]: kind must be sin or cos")
            terms.append((kind, float(term.get("amp", 1.0)), float(term.get("freq", 1.0)),
                          float(term.get("shift", 0.0))))

        def make(order):
            def f(x):
                x = np.asarray(x, dtype=float)
                out = np.zeros(x.shape)
                for kind, amp, w, sh in terms:
                    base = np.sin if kind == "sin" else np.cos
                    out = out + amp * (-w * w) ** order * base(w * (x - sh))
                return out
            return f

        return SpaceFunction(make(0), make(1))
    if fam == "table":
        xx = np.asarray(_req(spec, "x", where), dtype=float)
        vv = np.asarray(_req(spec, "values", where), dtype=float)
        if xx.shape != vv.shape or xx.size < 2 or np.any(np.diff(xx) <= 0):
            raise ConfigError(f"{where}: table needs increasing x and matching values")
        return SpaceFunction(lambda x: np.interp(x, xx, vv), None)
    raise ConfigError(f"{where}: unknown space family {fam!r}")


def space_time_function(spec, domain, where="space-time function"):
    """Returns (f, f_t) for a space-time family."""
    fam, spec = _family(spec, where)
    if fam == "zero" or (fam == "constant" and float(spec.get("value", 0.0)) == 0.0):
        z = lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)  # noqa: E731
        return z, z
    if fam == "separable":
        parts = [(space_function(term.get("x", {}), domain, f"{where}.terms[{j}].x"),
                  time_function(term.get("t", {"value": 1.0}), f"{where}.terms[{j}].t"))
                 for j, term in enumerate(_req(spec, "terms", where))]

        def f(x, t):
            return sum(sx.f(x) * tf.f(t) for sx, tf in parts)

        def f_t(x, t):
            return sum(sx.f(x) * tf.d1(t) for sx, tf in parts)

        return f, f_t
    raise ConfigError(f"{where}: unknown space-time family {fam!r}")


def damping(spec, where="damping"):
    """DampingCoefficient from a time family; bounds derived unless given."""
    tf = time_function(spec, where)
    fam, spec = _family(spec, where)
    if fam == "constant":
        v = float(spec["value"])
        return DampingCoefficient.constant(v)
    if fam == "trig":
        c0 = float(spec.get("const", 0.0))
        spread = tf.bound - abs(c0)
        lower, upper = c0 - spread, c0 + spread
        d1 = tf.d1_bound
    else:
        vals = np.asarray(spec["values"], dtype=float)
        lower, upper, d1 = float(vals.min()), float(vals.max()), tf.d1_bound
    return DampingCoefficient(tf.f, tf.d1, float(spec.get("lower", lower)),
                              float(spec.get("upper", upper)),
                              float(spec.get("deriv_bound", d1)))


def nonlinearity(spec, where="nonlinearity"):
    """zero | linear{coeff} | sine{coeff, freq} | tanh{coeff, scale} | quadratic{coeff, lipschitz}."""
    if spec is None:
        return Nonlinearity.zero()
    fam = spec.get("family", "zero") if isinstance(spec, dict) else None
    if fam == "zero":
        return Nonlinearity.zero()
    c = float(spec.get("coeff", 1.0))
    if fam == "linear":
        return Nonlinearity.linear(c)
    if fam == "sine":
        w = float(spec.get("freq", 1.0))
        return Nonlinearity(lambda x, xi: c * np.sin(w * xi), lambda x, xi: c * w * np.cos(w * xi),
                            abs(c * w))
    if fam == "tanh":
        s = float(spec.get("scale", 1.0))
        return Nonlinearity(lambda x, xi: c * np.tanh(s * xi),
                            lambda x, xi: c * s / np.cosh(s * xi) ** 2, abs(c * s))
    if fam == "quadratic":
        # not globally Lipschitz; the declared constant only holds on a bounded range
        return Nonlinearity(lambda x, xi: c * xi * xi, lambda x, xi: 2.0 * c * xi,
                            float(spec.get("lipschitz", abs(c))))
    raise ConfigError(f"{where}: unknown nonlinearity family {fam!r}")
