"""Energy functionals, decay fits and the smallness conditions of the long-time theory.

Energies are evaluated in modal arithmetic: with u = sum c_k w_k,
||u||^2 = sum c_k^2 and ||u'||^2 = sum lam_k c_k^2, both exact in the basis.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleEta, InsufficientPositiveSamples
from .inverse import compute_K0, eval_t
from .solver import accelerations

CONDITIONS = ("eps00", "eps0", "eps34", "B_pos", "B1_pos", "eta_admissible",
              "eta1_admissible", "V_grad_ut", "V_grad_utt")

# coarse log grid for the free tolerances eps0, eps3, eps4, eps6
_FREE_GRID = 10.0 ** np.arange(-4, 5)


def friedrichs_constant(basis):
    """Sharp constant in ||u|| <= gamma ||u'|| on the interval: 1/sqrt(lam_1)."""
    return basis.domain.length / np.pi


def eta_bounds(a, b_lower, gamma):
    """Upper bounds on eta keeping W_eta and V_eta non-negative.

    Returns (bound_W, bound_V) with bound_W = min(1, a^2/|gamma^2 - b_lower|)
    and bound_V = min(1, (a^2 + b_lower)/gamma^2).
    """
    a2 = a * a
    gap = abs(gamma ** 2 - b_lower)
    bound_w = 1.0 if gap == 0 else min(1.0, a2 / gap)
    bound_v = min(1.0, (a2 + b_lower) / gamma ** 2)
    return bound_w, bound_v


def default_eta(a, b_lower, gamma):
    return 0.5 * min(eta_bounds(a, b_lower, gamma))


def _check_eta(spec, basis, eta):
    bw, bv = eta_bounds(spec.a, spec.damping.lower, friedrichs_constant(basis))
    if not 0 < eta <= bw:
        raise InadmissibleEta(f"eta={eta} outside (0, {bw:.6g}] needed for W_eta >= 0")
    if not eta <= bv:
        raise InadmissibleEta(f"eta={eta} exceeds {bv:.6g} needed for V_eta >= 0")


def _quadratic(lam, a2, eta, b, x, y):
    """1/2 |y|^2 + a^2/2 sum lam x^2 + eta (x.y + b/2 sum lam x^2), row-wise."""
    grad2 = np.sum(lam * x * x, axis=-1)
    base = 0.5 * np.sum(y * y, axis=-1) + 0.5 * a2 * grad2
    return base, base + eta * (np.sum(x * y, axis=-1) + 0.5 * b * grad2)


def weighted_energy(basis, a, eta, b, c, c_dot):
    """(E, W_eta) for stacked modal states; b is scalar or per row."""
    return _quadratic(basis.eigenvalues, a * a, eta, b, np.asarray(c), np.asarray(c_dot))


@dataclass(eq=False)
class EnergySeries:
    t: np.ndarray
    E_basic: np.ndarray
    W_eta: np.ndarray
    F_second: np.ndarray
    V_eta: np.ndarray
    eta: float
    eta1_fit: float = None


def energy_series(traj, basis, spec, eta, tables=None, fit_tail=None):
    """All four energy functionals along a trajectory.

    The accelerations entering F and V are recomputed from the right-hand side
    at the stored states. With ``fit_tail`` the decay rate of W_eta on that
    trailing fraction is stored in ``eta1_fit``.
    """
    _check_eta(spec, basis, eta)
    if tables is None:
        tables = compute_K0(spec, basis, coupled=traj.meta.get("coupled", True))
    b = eval_t(spec.b, traj.t)
    e_basic, w = weighted_energy(basis, spec.a, eta, b, traj.c, traj.c_dot)
    acc = accelerations(spec, basis, traj, tables)
    f_second, v = weighted_energy(basis, spec.a, eta, b, traj.c_dot, acc)
    series = EnergySeries(traj.t.copy(), e_basic, w, f_second, v, eta)
    if fit_tail is not None:
        series.eta1_fit = fit_decay_rate(w, traj.t, fit_tail)[0]
    return series


def fit_decay_rate(series, t, tail_fraction=0.5):
    """Least-squares decay rate of a positive series on its trailing fraction.

    Returns
    -------
    rate : float
        eta_1 = -slope of log(series) against t.
    residual : float
        RMS residual of the linear fit on log scale.
    """
    series = np.asarray(series, dtype=float)
    t = np.asarray(t, dtype=float)
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    start = int(np.floor((1.0 - tail_fraction) * series.size))
    s_tail, t_tail = series[start:], t[start:]
    peak = np.max(np.abs(series)) if series.size else 0.0
    keep = s_tail > 1e-14 * peak
    if np.count_nonzero(keep) < 3:
        raise InsufficientPositiveSamples(
            f"{np.count_nonzero(keep)} positive samples on the tail; need 3")
    y = np.log(s_tail[keep])
    x = t_tail[keep]
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    return float(-slope), resid


# ---------------------------------------------------------------- smallness

@dataclass(frozen=True)
class NormData:
    K: float
    grad_K: float
    K0: float


def _norms(tables, basis):
    k = tables.K_modal
    return NormData(float(np.linalg.norm(k)),
                    float(np.sqrt(np.sum(basis.eigenvalues * k * k))),
                    float(np.linalg.norm(tables.K0_modal)))


def eps_constants(a, b_upper, b1, L, gamma, norms, alpha):
    """epsilon_1, epsilon_2 and epsilon_7 .. epsilon_10 at a given alpha."""
    a2 = a * a
    nk, ngk, nk0 = norms.K, norms.grad_K, norms.K0
    ga = gamma
    lin = ga * ga * (L + alpha) * nk
    return {
        "eps1": 2.0 * nk0 * max(a2 * ngk + lin, b_upper * ngk),
        "eps2": nk0 * max(b_upper * ngk, (a2 + b1) * ngk + L * ga * nk + alpha * ga * nk),
        "eps7": nk0 * max(a2 * ngk + lin, ga * ngk * (a2 * ga + 2.0 * b_upper) + lin),
        "eps8": nk0 * max(b_upper * ngk, ga * ngk * (2.0 * a2 + b_upper * ga) + 2.0 * lin),
        "eps9": nk0 * max(ngk * (a2 + b1), ga * ngk * (a2 * ga + b1 * ga + 2.0 * b_upper) + lin),
        "eps10": nk0 * max(2.0 * ga * ngk * (a2 + b1), b_upper * ngk),
    }


def _margins(p, eps, eps_zero, alpha, eta, eta1, free):
    """Signed margins (positive = satisfied) of every condition."""
    a2, b_lo, b_hi, b1, L, ga = p["a2"], p["b_lower"], p["b_upper"], p["b1"], p["L"], p["gamma"]
    e0, e3, e4, e6 = free
    g2 = ga * ga
    bw, bv = p["eta_bounds"]
    B = min(2 * a2 - b1 - eps["eps8"] - L * g2, 2 * b_lo - g2 * L - eps["eps7"]) - 2 * g2 * e6
    B1 = B - eta * (eps["eps8"] + 2 * g2)
    m = {
        "eps00": b_lo - eps_zero["eps1"] ** 2 / e0,
        "eps0": b_lo - eps["eps1"] ** 2 / e0,
        "eps34": b_lo - e4 - eps["eps2"] ** 2 * e3,
        "B_pos": B,
        "B1_pos": B1,
        "eta_admissible": min(eta, bw - eta, bv - eta),
        "eta1_admissible": min(
            eta1, eta - eta1,
            B1 - eta1 * (a2 / eta + g2 + b_hi) - (eps["eps7"] + L * g2) / eta,
            B1 - eta1 * g2 * (1 + eta)),
        "V_grad_ut": -(eta1 * (a2 / eta + b_hi) - (2 * a2 - b1) + eps["eps10"] + eps["eps9"] / eta),
        "V_grad_utt": -(eta1 * g2 * (1 + eta) - (2 * b_lo - b1 - g2 * L) + eps["eps9"] + eta * eps["eps10"]),
    }
    return m


def _params(spec, basis):
    gamma = friedrichs_constant(basis)
    d = spec.damping
    return {"a2": spec.a ** 2, "a": spec.a, "b_lower": d.lower, "b_upper": d.upper,
            "b1": d.deriv_bound, "L": spec.nonlinearity.lipschitz, "gamma": gamma,
            "eta_bounds": eta_bounds(spec.a, d.lower, gamma)}


def _evaluate(p, norms, alpha, eta, eta1, free):
    args = (p["a"], p["b_upper"], p["b1"], p["L"], p["gamma"], norms)
    eps = eps_constants(*args, alpha)
    eps_zero = eps_constants(*args, 0.0)
    return eps, eps_zero, _margins(p, eps, eps_zero, alpha, eta, eta1, free)


def _best_free(p, norms, alpha, eta, eta1):
    # compare sorted margins lexicographically so ties on the worst
    # condition are broken by the next worst
    best, best_val = None, None
    for free in itertools.product(_FREE_GRID, repeat=4):
        m = _evaluate(p, norms, alpha, eta, eta1, free)[2]
        val = sorted(m.values())
        if best_val is None or val > best_val:
            best, best_val = free, val
    return best


def _alpha_max(p, norms, eta, eta1, free, hi=1e3, iters=60):
    """Largest alpha with every alpha-dependent condition satisfied, or None."""
    def ok(alpha):
        return all(v > 0 for v in _evaluate(p, norms, alpha, eta, eta1, free)[2].values())

    if not ok(0.0):
        return None
    if ok(hi):
        return hi
    lo = 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


@dataclass(eq=False)
class SmallnessReport:
    gamma: float
    alpha: float
    eta: float
    eta1: float
    eps_free: dict
    norms: NormData
    eps: dict
    eps_at_zero: dict
    margins: dict
    conditions: dict
    verdict: bool
    alpha_max: float = None
    truncation: dict = field(default_factory=dict)
    thin_margins: list = field(default_factory=list)

    def as_dict(self):
        out = {"gamma": self.gamma, "alpha": self.alpha, "eta": self.eta, "eta1": self.eta1,
               "verdict": self.verdict, "alpha_max": self.alpha_max,
               "norm_K": self.norms.K, "norm_grad_K": self.norms.grad_K, "norm_K0": self.norms.K0}
        out.update({f"eps_free.{k}": v for k, v in self.eps_free.items()})
        out.update({f"eps.{k}": v for k, v in self.eps.items()})
        out.update({f"eps_at_zero.{k}": v for k, v in self.eps_at_zero.items()})
        for name in self.margins:
            out[f"condition.{name}.passed"] = self.conditions[name]
            out[f"condition.{name}.margin"] = self.margins[name]
        out.update({f"truncation.{k}": v for k, v in self.truncation.items()})
        out["thin_margins"] = ",".join(self.thin_margins)
        return out


def smallness_check(spec, basis, alpha=None, eta=None, eta1=None, eps_free=None, tables=None):
    """Evaluate the smallness constants and every sufficient condition.

    Parameters
    ----------
    alpha, eta, eta1 : float, optional
        Defaults: the problem's alpha, half the admissible eta, eta/10.
    eps_free : dict, optional
        Free tolerances ``eps0``, ``eps3``, ``eps4``, ``eps6``. Missing ones are
        picked by a coarse log-grid search maximizing the smallest margin.
    """
    from .basis import build_basis

    alpha = spec.alpha if alpha is None else float(alpha)
    p = _params(spec, basis)
    eta = min(p["eta_bounds"]) * 0.5 if eta is None else float(eta)
    eta1 = 0.1 * eta if eta1 is None else float(eta1)
    tables = compute_K0(spec, basis, alpha) if tables is None else tables
    norms = _norms(tables, basis)

    names = ("eps0", "eps3", "eps4", "eps6")
    given = dict(eps_free or {})
    unknown = set(given) - set(names)
    if unknown:
        raise ValueError(f"unknown free tolerances {sorted(unknown)}")
    if len(given) < 4:
        searched = dict(zip(names, _best_free(p, norms, alpha, eta, eta1)))
        searched.update(given)
        given = searched
    free = tuple(float(given[n]) for n in names)

    eps, eps_zero, margins = _evaluate(p, norms, alpha, eta, eta1, free)
    conditions = {k: bool(v > 0) for k, v in margins.items()}

    # truncation estimate: same norms from a basis with twice the modes
    fine = build_basis(basis.domain, 2 * basis.n_modes)
    norms_fine = _norms(compute_K0(spec, fine, alpha), fine)
    margins_fine = _evaluate(p, norms_fine, alpha, eta, eta1, free)[2]
    truncation = {"K": abs(norms_fine.K - norms.K), "grad_K": abs(norms_fine.grad_K - norms.grad_K),
                  "K0": abs(norms_fine.K0 - norms.K0)}
    thin = [k for k in margins if abs(margins[k]) <= abs(margins_fine[k] - margins[k])]

    return SmallnessReport(
        gamma=p["gamma"], alpha=alpha, eta=eta, eta1=eta1, eps_free=dict(zip(names, free)),
        norms=norms, eps=eps, eps_at_zero=eps_zero, margins=margins, conditions=conditions,
        verdict=all(conditions.values()), alpha_max=_alpha_max(p, norms, eta, eta1, free),
        truncation=truncation, thin_margins=thin)


# ----------------------------------------------------- regularity transfer

def regularity_transfer_check(traj, spec, basis):
    """Mismatch between u and its representation through z = a^2 u + b u_t.

    Since u_t = -(a^2/b) u + z/b, u is recovered from z and u(s) with an
    exponential integrating factor. The integral is taken by the trapezoid
    rule step by step; the returned sup over stored times of the modal l2
    mismatch is O(dt^2) for consistent trajectories.
    """
    if len(traj) < 2:
        return 0.0
    t = traj.t
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("trajectory must be uniformly spaced")
    a2 = spec.a ** 2
    b = eval_t(spec.b, t)
    if np.any(b <= 0):
        raise ValueError("the representation needs b(t) > 0")
    z = a2 * traj.c + b[:, None] * traj.c_dot
    inv_b = 1.0 / b
    decay = np.exp(-a2 * 0.5 * dt * (inv_b[:-1] + inv_b[1:]))
    u = traj.c[0].copy()
    worst = 0.0
    for i in range(len(traj) - 1):
        u = decay[i] * u + 0.5 * dt[i] * (decay[i] * z[i] * inv_b[i] + z[i + 1] * inv_b[i + 1])
        worst = max(worst, float(np.linalg.norm(u - traj.c[i + 1])))
    return worst
