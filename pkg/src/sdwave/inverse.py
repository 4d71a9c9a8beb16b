"""Reduction of the source-identification problem to a penalized direct problem.

With K0 = f1 / (integral K f1), the unknown g(t) is eliminated through

    g = (E'' + int[a^2 K' u_x + b K' u_xt + K phi(x, u) - K f2] dx) / int K f1

and u solves  u_tt - a^2 u_xx - b u_xxt + phi(x, u) - Phi_a[u] = F_a  with

    F_a    = f2 + K0 (E'' - alpha E - int K f2)
    Phi_a  = K0 int[a^2 K' u_x + b K' u_xt + K phi(x, u) + alpha K u] dx.

Along solutions, r(t) = int K u dx - E(t) obeys r'' = alpha r.
"""

from dataclasses import dataclass

import numpy as np

from .basis import project
from .errors import DegenerateOverdetermination


def eval_t(func, times):
    """Evaluate a scalar function of time on an array, vectorized if it allows."""
    times = np.asarray(times, dtype=float)
    try:
        out = np.asarray(func(times), dtype=float)
        if out.shape == times.shape:
            return out
    except Exception:
        pass
    return np.array([float(func(t)) for t in times.ravel()]).reshape(times.shape)


def eval_xt(func, x, times):
    """Values f(x_m, t_j) as an (len(x), len(times)) array."""
    times = np.asarray(times, dtype=float)
    try:
        out = np.asarray(func(x[:, None], times[None, :]), dtype=float)
        if out.shape == (x.size, times.size):
            return out
    except Exception:
        pass
    cols = [np.broadcast_to(np.asarray(func(x, t), dtype=float), x.shape) for t in times]
    return np.stack(cols, axis=1) if cols else np.empty((x.size, 0))


@dataclass(frozen=True, eq=False)
class ReductionTables:
    K_modal: np.ndarray
    K0_modal: np.ndarray
    Kf1: float
    f1_modal: np.ndarray
    K_nodes: np.ndarray
    # eigenvalue-weighted K coefficients: int K' w_k' dx
    K_lam: np.ndarray
    E: object
    E_pp: object
    alpha: float
    # False drops Phi_a and the K0 part of F_a (plain direct problem, g unused)
    coupled: bool = True

    @property
    def coupling(self):
        return self.K0_modal if self.coupled else np.zeros_like(self.K0_modal)

    def KF2_pairing(self, spec, basis, t):
        return float(np.sum(basis.quad_weights * self.K_nodes * spec.f2(basis.quad_nodes, t)))

    def penalty_row(self, a):
        """Coefficients p with p . c the u-dependent linear part of S, minus the b term."""
        return a * a * self.K_lam + self.alpha * self.K_modal


def compute_K0(spec, basis, alpha=None, coupled=True):
    """Cache the modal data of the reduction; reject pairs with a vanishing K-f1 pairing."""
    alpha = spec.alpha if alpha is None else float(alpha)
    x, w = basis.quad_nodes, basis.quad_weights
    k_nodes = np.broadcast_to(np.asarray(spec.K(x), dtype=float), x.shape).copy()
    f1_nodes = np.broadcast_to(np.asarray(spec.f1(x), dtype=float), x.shape)
    kf1 = float(np.sum(w * k_nodes * f1_nodes))
    tol = 1e-8 * np.sqrt(np.sum(w * k_nodes ** 2)) * np.sqrt(np.sum(w * f1_nodes ** 2))
    if not abs(kf1) > tol:
        raise DegenerateOverdetermination(kf1, tol)
    k_modal = project(basis, k_nodes)
    f1_modal = project(basis, f1_nodes)
    for arr in (k_modal, f1_modal, k_nodes):
        arr.setflags(write=False)
    k0 = f1_modal / kf1
    k0.setflags(write=False)
    k_lam = basis.eigenvalues * k_modal
    k_lam.setflags(write=False)
    return ReductionTables(k_modal, k0, kf1, f1_modal, k_nodes, k_lam,
                           spec.E, spec.E_pp, alpha, coupled)


def forcing_table(tables, spec, basis, times):
    """Tabulate F_a on a time grid.

    Returns
    -------
    F : (n, N) array
        Modal coefficients of F_a(., t_j).
    KF2 : (n,) array
        int K f2(., t_j) dx.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    f2 = eval_xt(spec.f2, basis.quad_nodes, times)
    F = (basis.analysis @ f2).T
    kf2 = (basis.quad_weights * tables.K_nodes) @ f2
    if tables.coupled:
        scal = eval_t(tables.E_pp, times) - tables.alpha * eval_t(tables.E, times) - kf2
        F = F + np.outer(scal, tables.K0_modal)
    return F, kf2


def F_alpha(tables, spec, basis, t):
    F, _ = forcing_table(tables, spec, basis, [t])
    return F[0]


def phi_terms(tables, spec, basis, c):
    """Nonlinear pairings for modal state(s) c.

    Returns (<phi(u), w_k>, <K, phi(u)>) with the leading axis of ``c`` kept.
    """
    c = np.asarray(c, dtype=float)
    if spec.nonlinearity.is_zero:
        return np.zeros_like(c), np.zeros(c.shape[:-1])
    u = c @ basis.values.T
    ph = spec.nonlinearity.phi(basis.quad_nodes, u)
    return ph @ basis.analysis.T, ph @ (basis.quad_weights * tables.K_nodes)


def penalty_scalar(tables, spec, basis, t, c, c_dot, k_phi=None):
    """S(t) = a^2 <K',u'> + b <K',u_t'> + <K, phi(u)> + alpha <K, u>."""
    if k_phi is None:
        k_phi = phi_terms(tables, spec, basis, c)[1]
    b = spec.b(t)
    return (spec.a ** 2 * (c @ tables.K_lam) + b * (c_dot @ tables.K_lam)
            + k_phi + tables.alpha * (c @ tables.K_modal))


def Phi_alpha(tables, spec, basis, state):
    if not tables.coupled:
        return np.zeros(basis.n_modes)
    s = penalty_scalar(tables, spec, basis, state.t, state.c, state.c_dot)
    return tables.K0_modal * float(s)


def g_from_states(tables, spec, basis, times, c, c_dot, k_phi=None, kf2=None):
    """Vectorized source reconstruction for stacked states (rows)."""
    times = np.asarray(times, dtype=float)
    if k_phi is None:
        k_phi = phi_terms(tables, spec, basis, c)[1]
    if kf2 is None:
        kf2 = (basis.quad_weights * tables.K_nodes) @ eval_xt(spec.f2, basis.quad_nodes, times)
    b = eval_t(spec.b, times)
    bracket = (eval_t(tables.E_pp, times) + spec.a ** 2 * (c @ tables.K_lam)
               + b * (c_dot @ tables.K_lam) + k_phi - kf2)
    return bracket / tables.Kf1


def reconstruct_g(tables, spec, basis, state):
    """Source factor g(t) from the state via the reduction formula."""
    g = g_from_states(tables, spec, basis, np.array([state.t]),
                      np.atleast_2d(state.c), np.atleast_2d(state.c_dot))
    return float(g[0])


def overdetermination_residual(tables, basis, traj):
    """r(t_i) = int K u(., t_i) dx - E(t_i) for every stored step."""
    return traj.c @ tables.K_modal - eval_t(tables.E, traj.t)


def consistency_ode_check(r, alpha, dt):
    """Sup over interior samples of |r'' - alpha r| with central differences.

    A small value certifies that the computed trajectory satisfies the
    reduction identity on the sampled window. It cannot certify that r stays
    bounded beyond the window: r'' = alpha r has a growing branch, which only
    boundedness on the whole line excludes.
    """
    r = np.asarray(r, dtype=float)
    if r.size < 3:
        raise ValueError("need at least three uniformly spaced samples")
    second = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dt * dt)
    return float(np.max(np.abs(second - alpha * r[1:-1])))
