"""Time integration of the modal Galerkin system for the penalized direct problem.

For modal coefficients c(t) of u the system reads

    c'' = -a^2 lam c - b(t) lam c' - <phi(u), w_k> + K0 S(c, c', t) + F_a(t)

with S the penalty scalar of the reduction. The stiff diagonal part and the
rank-one coupling K0 S are linear in (c, c') and are solved exactly inside the
implicit trapezoid stage; only phi goes through fixed-point iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import Diverged, NonConvergence
from .inverse import compute_K0, eval_t, forcing_table, g_from_states, phi_terms, penalty_scalar

# rows of forcing tabulated at once; bounds memory on long runs
_CHUNK = 4096


@dataclass(frozen=True, eq=False)
class GalerkinState:
    t: float
    c: np.ndarray
    c_dot: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        cd = np.asarray(self.c_dot, dtype=float)
        if c.shape != cd.shape or c.ndim != 1:
            raise ValueError("c and c_dot must be 1-D modal vectors of equal length")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "c_dot", cd)


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    nonlinear_tol: float = 1e-12
    max_nonlinear_iters: int = 50
    scheme: str = "implicit_trapezoid"
    # guard on |c| + |c'| relative to max(1, initial norm)
    divergence_factor: float = 1e6
    # keep every stride-th step
    stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.nonlinear_tol > 10 * np.finfo(float).eps:
            raise ValueError("nonlinear_tol must exceed 10 machine epsilons")
        if self.max_nonlinear_iters < 1:
            raise ValueError("max_nonlinear_iters must be at least 1")
        if self.scheme != "implicit_trapezoid":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.stride < 1:
            raise ValueError("stride must be at least 1")


@dataclass(eq=False)
class Trajectory:
    t: np.ndarray
    c: np.ndarray
    c_dot: np.ndarray
    g: np.ndarray
    dt: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.t.size

    def state(self, i):
        return GalerkinState(float(self.t[i]), self.c[i], self.c_dot[i])

    @property
    def states(self):
        return [self.state(i) for i in range(len(self))]

    @property
    def g_samples(self):
        return list(zip(self.t.tolist(), self.g.tolist()))

    def window(self, t_lo, t_hi):
        """Sub-trajectory with t_lo <= t <= t_hi (half-step slack)."""
        slack = 0.5 * self.dt
        keep = (self.t >= t_lo - slack) & (self.t <= t_hi + slack)
        return Trajectory(self.t[keep], self.c[keep], self.c_dot[keep], self.g[keep],
                          self.dt, dict(self.meta))


def _tables(spec, basis, tables):
    return compute_K0(spec, basis) if tables is None else tables


def _nonlinear_source(tables, spec, basis, c):
    """-<phi(u), w_k> + K0 <K, phi(u)>: the part of the acceleration solved by iteration."""
    proj, k_phi = phi_terms(tables, spec, basis, c)
    return -proj + tables.coupling * k_phi


def rhs(spec, basis, state, tables=None):
    """Modal acceleration c'' at ``state``."""
    tables = _tables(spec, basis, tables)
    lam = basis.eigenvalues
    b = float(spec.b(state.t))
    F, _ = forcing_table(tables, spec, basis, [state.t])
    proj, k_phi = phi_terms(tables, spec, basis, state.c)
    acc = -spec.a ** 2 * lam * state.c - b * lam * state.c_dot - proj + F[0]
    if tables.coupled:
        s = penalty_scalar(tables, spec, basis, state.t, state.c, state.c_dot, k_phi)
        acc = acc + tables.K0_modal * s
    return acc


def accelerations(spec, basis, traj, tables=None):
    """Stacked c'' for every stored state; vectorized :func:`rhs`."""
    tables = _tables(spec, basis, tables)
    lam = basis.eigenvalues
    b = eval_t(spec.b, traj.t)[:, None]
    F, _ = forcing_table(tables, spec, basis, traj.t)
    proj, k_phi = phi_terms(tables, spec, basis, traj.c)
    acc = -spec.a ** 2 * lam * traj.c - b * lam * traj.c_dot - proj + F
    if tables.coupled:
        s = (spec.a ** 2 * (traj.c @ tables.K_lam) + b[:, 0] * (traj.c_dot @ tables.K_lam)
             + k_phi + tables.alpha * (traj.c @ tables.K_modal))
        acc = acc + np.outer(s, tables.K0_modal)
    return acc


class _Stepper:
    """Per-step machinery shared by :func:`step` and :func:`solve_ivp`."""

    def __init__(self, spec, basis, tables, cfg):
        self.spec, self.basis, self.tables, self.cfg = spec, basis, tables, cfg
        self.lam = np.ascontiguousarray(basis.eigenvalues, dtype=float)
        self.k0 = np.ascontiguousarray(tables.coupling, dtype=float)
        self.p = np.ascontiguousarray(tables.penalty_row(spec.a), dtype=float)
        self.lamk = np.ascontiguousarray(tables.K_lam, dtype=float)
        self.a2 = float(spec.a) ** 2
        self.linear = spec.nonlinearity.is_zero

    def source(self, c):
        if self.linear:
            return 0.0
        return _nonlinear_source(self.tables, self.spec, self.basis, c)

    def acc(self, t, c, d, f):
        return kernels.acceleration(c, d, self.lam, self.k0, self.p, self.lamk, self.a2,
                                    float(self.spec.b(t)), f + self.source(c))

    def advance(self, t0, c0, d0, acc0, f1, b1):
        """One step given the forcing row f1 = F_a(t1); returns (c1, d1, acc1, iterations)."""
        h = self.cfg.dt
        args = (self.lam, self.k0, self.p, self.lamk, self.a2, b1, h)
        if self.linear:
            c1, d1, acc1, _ = kernels.stage_solve(c0, d0, acc0, f1, *args)
            return c1, d1, acc1, 1
        guess = c0 + h * d0
        src = self.source(guess)
        c_prev = guess
        for it in range(1, self.cfg.max_nonlinear_iters + 1):
            c1, d1, acc1, _ = kernels.stage_solve(c0, d0, acc0, f1 + src, *args)
            src_new = self.source(c1)
            inc = float(np.linalg.norm(c1 - c_prev))
            if inc <= self.cfg.nonlinear_tol * (1.0 + float(np.linalg.norm(c1))):
                # make the stored acceleration consistent with phi at c1
                return c1, d1, acc1 + (src_new - src), it
            src, c_prev = src_new, c1
        raise NonConvergence(t0 + h, self.cfg.max_nonlinear_iters, inc)


def step(spec, basis, state, cfg, tables=None):
    """Advance ``state`` by one implicit-trapezoid step of size ``cfg.dt``."""
    tables = _tables(spec, basis, tables)
    st = _Stepper(spec, basis, tables, cfg)
    t1 = state.t + cfg.dt
    F, _ = forcing_table(tables, spec, basis, [state.t, t1])
    acc0 = st.acc(state.t, state.c, state.c_dot, F[0])
    c1, d1, _, _ = st.advance(state.t, state.c, state.c_dot, acc0, F[1], float(spec.b(t1)))
    return GalerkinState(t1, c1, d1)


def _step_count(s, T, dt):
    span = T - s
    n = int(round(span / dt))
    return max(n, 1)


def solve_ivp(spec, basis, s, T, u0, u1, cfg, tables=None, keep_from=None):
    """Integrate from (u0, u1) at t = s to t = T on a uniform grid.

    The number of steps is round((T - s)/dt); the reached end time is stored
    in ``meta["t_end"]``. With ``keep_from`` only samples at t >= keep_from are
    retained (used by long sweeps).

    Raises
    ------
    NonConvergence
        Fixed-point iteration for phi did not settle within the iteration cap.
    Diverged
        The state norm exceeded the divergence guard.
    """
    if not s < T:
        raise ValueError(f"need s < T, got s={s}, T={T}")
    tables = _tables(spec, basis, tables)
    c0 = np.array(u0, dtype=float).reshape(basis.n_modes)
    d0 = np.array(u1, dtype=float).reshape(basis.n_modes)
    if not (np.all(np.isfinite(c0)) and np.all(np.isfinite(d0))):
        raise ValueError("initial data must be finite")
    dt = cfg.dt
    n = _step_count(s, T, dt)
    times = s + dt * np.arange(n + 1)
    guard = cfg.divergence_factor * max(1.0, float(np.linalg.norm(c0) + np.linalg.norm(d0)))
    st = _Stepper(spec, basis, tables, cfg)

    keep = np.arange(0, n + 1, cfg.stride)
    if keep_from is not None:
        keep = keep[times[keep] >= keep_from - 0.5 * dt]
    c_keep = np.empty((keep.size, basis.n_modes))
    d_keep = np.empty((keep.size, basis.n_modes))
    kf2_keep = np.empty(keep.size)

    c, d = c0, d0
    acc = None
    iter_total = 0
    iter_max = 0
    kept = 0
    for start in range(0, n + 1, _CHUNK):
        stop = min(start + _CHUNK, n + 1)
        # chunk rows [start-1, stop) so each step sees both endpoints
        lo = max(start - 1, 0)
        F, kf2 = forcing_table(tables, spec, basis, times[lo:stop])
        b_tab = eval_t(spec.b, times[lo:stop])
        rows = stop - lo
        c_blk = np.empty((rows, basis.n_modes))
        d_blk = np.empty((rows, basis.n_modes))
        if st.linear:
            kernels.linear_march(c, d, st.lam, st.k0, st.p, st.lamk, st.a2,
                                 b_tab, np.ascontiguousarray(F), dt, c_blk, d_blk)
            iter_total += rows - 1
            iter_max = max(iter_max, 1)
        else:
            c_blk[0], d_blk[0] = c, d
            if acc is None:
                acc = st.acc(times[lo], c, d, F[0])
            for j in range(1, rows):
                c_n, d_n, acc, its = st.advance(times[lo + j - 1], c_blk[j - 1], d_blk[j - 1],
                                                acc, F[j], float(b_tab[j]))
                c_blk[j], d_blk[j] = c_n, d_n
                iter_total += its
                iter_max = max(iter_max, its)
        norms = np.linalg.norm(c_blk, axis=1) + np.linalg.norm(d_blk, axis=1)
        bad = np.flatnonzero(~np.isfinite(norms) | (norms > guard))
        if bad.size:
            i = bad[0]
            raise Diverged(float(times[lo + i]), float(norms[i]), guard)
        c, d = c_blk[-1].copy(), d_blk[-1].copy()
        # rows of this chunk that are new (skip the overlap row) and kept
        new_idx = np.arange(start, stop)
        sel = np.isin(new_idx, keep)
        m = int(np.count_nonzero(sel))
        if m:
            local = new_idx[sel] - lo
            c_keep[kept:kept + m] = c_blk[local]
            d_keep[kept:kept + m] = d_blk[local]
            kf2_keep[kept:kept + m] = kf2[local]
            kept += m

    t_keep = times[keep]
    g = g_from_states(tables, spec, basis, t_keep, c_keep, d_keep,
                      k_phi=phi_terms(tables, spec, basis, c_keep)[1], kf2=kf2_keep)
    meta = {
        "s": float(s), "t_end": float(times[-1]), "dt": dt, "steps": n,
        "n_modes": basis.n_modes, "alpha": tables.alpha, "coupled": tables.coupled,
        "backend": kernels.BACKEND, "nonlinear_iterations_total": int(iter_total),
        "nonlinear_iterations_max": int(iter_max), "stride": cfg.stride,
    }
    return Trajectory(t_keep, c_keep, d_keep, g, dt, meta)
