"""YAML configuration: loading, dotted overrides and problem construction.

Layout (every section optional except ``problem``)::

    problem:
      domain: [0.0, 3.141592653589793]
      a: 1.0
      damping: {family: constant, value: 1.0}
      nonlinearity: {family: zero}
      f1: {family: trig, terms: [{kind: sin}]}
      K:  {family: trig, terms: [{kind: sin}]}
      f2: {family: zero}
      E:  {family: constant, value: 0.0}
      alpha: 0.1                # omitted: min(0.1, largest alpha passing the smallness check)
      coupled: true             # false drops the reduction (plain direct problem)
    manufactured: {family: sine_modes, modes: [{k: 1, amp: 1, omega: 1}], g_star: {...}}
    basis: {n_modes: 16, quad_factor: 4}
    solver: {dt: 1.0e-3, t0: 0.0, t1: 6.283185307179586, ...}
    initial: {u0: <space spec>, u1: <space spec>}
    longtime: {omega, window, m_schedule, sweep_tol, tail_fraction, periodicity_tol, workers}
    almost_period: {h_min, h_max, window, scan_stride}
    diagnostics: {eta, eta1, eps_free: {eps0, eps3, eps4, eps6}}
    output: {plots: false}
"""

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from . import families
from .errors import ConfigError
from .problem import Interval, ProblemSpec

DEFAULT_ALPHA = 0.1

_SOLVER_KEYS = ("dt", "nonlinear_tol", "max_nonlinear_iters", "scheme",
                "divergence_factor", "stride")


def load_config(path):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(cfg, dict) or "problem" not in cfg:
        raise ConfigError(f"config {path} needs a top-level 'problem' section")
    return cfg


def apply_overrides(cfg, overrides):
    """Set dotted keys, e.g. ``solver.dt=5e-4``; values parse as YAML scalars."""
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        if not all(parts):
            raise ConfigError(f"override key {key!r} is malformed")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"override {item!r}: {exc}") from exc
        if isinstance(value, str):
            # YAML 1.1 reads 5e-4 (no dot) as a string
            try:
                value = float(value)
            except ValueError:
                pass
        node = cfg
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r} descends into a non-mapping")
        node[parts[-1]] = value
    return cfg


def _domain(raw):
    if isinstance(raw, dict):
        raw = [raw.get("left"), raw.get("right")]
    try:
        left, right = (float(v) for v in raw)
        return Interval(left, right)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"problem.domain: {exc}") from exc


def build_spec(problem, alpha=None):
    """ProblemSpec from a ``problem`` block. ``alpha`` overrides the block's value."""
    try:
        dom = _domain(problem.get("domain", [0.0, np.pi]))
        f2, f2_t = families.space_time_function(problem.get("f2", {"family": "zero"}), dom,
                                                "problem.f2")
        e = families.time_function(problem.get("E", {"value": 0.0}), "problem.E")
        if "alpha" in problem and alpha is None:
            alpha = problem["alpha"]
        return ProblemSpec(
            domain=dom,
            a=float(problem.get("a", 1.0)),
            damping=families.damping(problem.get("damping", {"value": 1.0}), "problem.damping"),
            nonlinearity=families.nonlinearity(problem.get("nonlinearity"), "problem.nonlinearity"),
            f1=families.space_function(problem.get("f1", {"family": "mode", "k": 1}), dom,
                                       "problem.f1").f,
            K=families.space_function(problem.get("K", {"family": "mode", "k": 1}), dom,
                                      "problem.K").f,
            f2=f2, f2_t=f2_t, E=e.f, E_pp=e.d2,
            alpha=DEFAULT_ALPHA if alpha is None else float(alpha),
            meta={"problem": copy.deepcopy(problem)},
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"problem: {exc}") from exc


def build_manufactured(cfg, base):
    from .mms import sine_modes

    block = cfg["manufactured"]
    fam = block.get("family")
    if fam != "sine_modes":
        raise ConfigError(f"manufactured: unknown family {fam!r}")
    try:
        t_span = (float(cfg.get("solver", {}).get("t0", 0.0)),
                  float(cfg.get("solver", {}).get("t1", 2 * np.pi)))
        return sine_modes(base, block["modes"], block.get("g_star", {"value": 0.0}),
                          t_span=t_span)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"manufactured: {exc}") from exc


@dataclass(eq=False)
class Resolved:
    """Everything a command needs, after defaults are filled in."""

    config: dict
    spec: object
    basis: object
    stepper: object
    coupled: bool
    manufactured: object = None


def resolve(cfg):
    """Build spec, basis and stepper; fill defaults back into the config echo.

    alpha, when missing, is min(0.1, largest alpha passing the smallness check)
    and falls back to 0.1 when no alpha passes.
    """
    from .basis import build_basis
    from .diagnostics import smallness_check
    from .solver import StepperConfig

    cfg = copy.deepcopy(cfg)
    problem = cfg["problem"]
    coupled = bool(problem.get("coupled", True))
    problem["coupled"] = coupled
    b_cfg = cfg.setdefault("basis", {})
    b_cfg.setdefault("n_modes", 16)
    b_cfg.setdefault("quad_factor", 4)
    s_cfg = cfg.setdefault("solver", {})
    s_cfg.setdefault("dt", 1e-3)
    s_cfg.setdefault("t0", 0.0)
    s_cfg.setdefault("t1", 2 * np.pi)
    try:
        stepper = StepperConfig(**{k: s_cfg[k] for k in _SOLVER_KEYS if k in s_cfg})
        for k in _SOLVER_KEYS:
            s_cfg.setdefault(k, getattr(stepper, k))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc

    spec = build_spec(problem, alpha=problem.get("alpha", DEFAULT_ALPHA))
    try:
        basis = build_basis(spec.domain, int(b_cfg["n_modes"]), int(b_cfg["quad_factor"]))
    except ValueError as exc:
        raise ConfigError(f"basis: {exc}") from exc

    mp = None
    if "manufactured" in cfg:
        mp = build_manufactured(cfg, spec)

    if "alpha" not in problem:
        target = mp.derived_spec if mp is not None else spec
        d_cfg = cfg.get("diagnostics", {})
        rep = smallness_check(target, basis, alpha=DEFAULT_ALPHA, eta=d_cfg.get("eta"),
                              eta1=d_cfg.get("eta1"), eps_free=d_cfg.get("eps_free"))
        alpha = DEFAULT_ALPHA if rep.alpha_max is None else min(DEFAULT_ALPHA, rep.alpha_max)
        problem["alpha"] = float(alpha)
        problem["alpha_source"] = "default" if rep.alpha_max is None else "smallness"
        spec = spec.with_alpha(alpha)
        if mp is not None:
            mp.derived_spec = mp.derived_spec.with_alpha(alpha)
    if mp is not None:
        spec = mp.derived_spec
    return Resolved(cfg, spec, basis, stepper, coupled, mp)
