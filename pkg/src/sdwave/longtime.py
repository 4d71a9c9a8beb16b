"""Bounded solutions on the whole line, contraction and (almost-)periodicity checks.

A whole-line solution is approximated by solving from zero data at t = -m
for an increasing schedule of m and watching the solutions restricted to an
observation window settle. Forcing before -m is zero by construction, since
integration simply starts there.

Time shifts (periods, almost periods, the window edges) are snapped to integer
multiples of dt so that shifted samples coincide with stored ones.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import default_eta, fit_decay_rate, friedrichs_constant, weighted_energy
from .errors import SweepNotConverged, WindowTooShort
from .inverse import compute_K0, eval_t, forcing_table
from .solver import solve_ivp


def composite_norm(basis, dc, dc_dot):
    """||u||_{H^1} + ||u_t||_{L^2} row-wise for modal differences."""
    dc = np.atleast_2d(dc)
    dc_dot = np.atleast_2d(dc_dot)
    h1 = np.sqrt(np.sum((1.0 + basis.eigenvalues) * dc * dc, axis=1))
    return h1 + np.linalg.norm(dc_dot, axis=1)


def snap(value, dt):
    """Nearest integer multiple of dt: (steps, snapped value, snap error)."""
    k = int(round(value / dt))
    return k, k * dt, abs(k * dt - value)


def default_schedule(omega=None):
    if omega is not None:
        return [omega * 2.0 ** j for j in range(5)]
    return [5.0, 10.0, 20.0, 40.0]


@dataclass(frozen=True)
class SweepConfig:
    m_schedule: tuple
    window: tuple
    sweep_tol: float = 1e-6
    norm: str = "H1_energy"
    # >1 runs every m concurrently and scans the results afterwards
    workers: int = 1

    def __post_init__(self):
        sched = tuple(float(m) for m in self.m_schedule)
        object.__setattr__(self, "m_schedule", sched)
        lo, hi = self.window
        if not lo < hi:
            raise ValueError("window must satisfy T_lo < T_hi")
        if any(m <= 0 for m in sched) or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("m_schedule must be positive and strictly increasing")
        if any(-m >= lo for m in sched):
            raise ValueError("every m must satisfy -m < T_lo")
        if not self.sweep_tol > 0:
            raise ValueError("sweep_tol must be positive")
        if self.norm != "H1_energy":
            raise ValueError(f"unknown norm {self.norm!r}")


@dataclass(eq=False)
class SweepDiagnostics:
    m_values: list
    differences: list
    sweep_tol: float
    window: tuple
    converged: bool = False
    # decay rate of the inter-m differences per unit of m
    fitted_rate: float = None
    ratios: list = field(default_factory=list)

    def as_dict(self):
        out = {"converged": self.converged, "sweep_tol": self.sweep_tol,
               "window_lo": self.window[0], "window_hi": self.window[1],
               "fitted_rate": self.fitted_rate}
        for m, d in zip(self.m_values[1:], self.differences):
            out[f"difference.m={m:.6g}"] = d
        return out


def _window_solve(spec, basis, m, window, stepper, tables):
    dt = stepper.dt
    _, m_s, _ = snap(m, dt)
    i0 = int(round((window[0] + m_s) / dt))
    n_win = int(round((window[1] - window[0]) / dt))
    s = -m_s
    zero = np.zeros(basis.n_modes)
    return solve_ivp(spec, basis, s, s + (i0 + n_win) * dt, zero, zero, stepper,
                     tables=tables, keep_from=s + i0 * dt)


def _difference(basis, ta, tb):
    n = min(len(ta), len(tb))
    return float(np.max(composite_norm(basis, ta.c[:n] - tb.c[:n], ta.c_dot[:n] - tb.c_dot[:n])))


def _fit_rate(m_values, diffs):
    d = np.asarray(diffs)
    m = np.asarray(m_values[1:])
    keep = d > 0
    if np.count_nonzero(keep) < 2:
        return None
    return float(-np.polyfit(m[keep], np.log(d[keep]), 1)[0])


def solve_whole_line(spec, basis, cfg, stepper, tables=None, smallness=None):
    """Approximate the bounded whole-line solution on ``cfg.window``.

    Returns the trajectory of the last solve, restricted to the window, and
    the sweep diagnostics.

    Raises
    ------
    SweepNotConverged
        Successive windows never agreed within ``sweep_tol``; ``smallness``
        (a report or a zero-argument callable producing one) is attached.
    """
    if len(cfg.m_schedule) < 2:
        raise ValueError("m_schedule needs at least two entries")
    tables = compute_K0(spec, basis) if tables is None else tables
    diag = SweepDiagnostics([], [], cfg.sweep_tol, tuple(cfg.window))

    def run(m):
        return _window_solve(spec, basis, m, cfg.window, stepper, tables)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            trajs = list(pool.map(run, cfg.m_schedule))
        source = iter(trajs)
        nxt = lambda m: next(source)  # noqa: E731
    else:
        nxt = run

    prev = None
    for m in cfg.m_schedule:
        traj = nxt(m)
        diag.m_values.append(m)
        if prev is not None:
            d = _difference(basis, traj, prev)
            if diag.differences and diag.differences[-1] > 0:
                diag.ratios.append(d / diag.differences[-1])
            diag.differences.append(d)
            if d < cfg.sweep_tol:
                diag.converged = True
                diag.fitted_rate = _fit_rate(diag.m_values, diag.differences)
                traj.meta["sweep_m"] = m
                return traj, diag
        prev = traj
    diag.fitted_rate = _fit_rate(diag.m_values, diag.differences)
    if callable(smallness):
        smallness = smallness()
    raise SweepNotConverged(diag, smallness)


@dataclass(eq=False)
class ContractionResult:
    rate: float
    monotone: bool
    residual: float
    t: np.ndarray
    W_tilde: np.ndarray
    eta: float


def contraction_check(spec, basis, u0a, u1a, u0b, u1b, horizon, stepper, eta=None,
                      tail_fraction=0.5, tables=None):
    """Decay of the weighted energy of the difference of two solutions.

    Solves both initial value problems on [0, horizon], forms z = u_a - u_b and
    W~_eta(z) = 1/2 ||z_t||^2 + a^2/2 ||z'||^2 + eta (z.z_t + b/2 ||z'||^2), and
    fits its exponential rate. Identical data give ``rate = inf``.
    """
    tables = compute_K0(spec, basis) if tables is None else tables
    if eta is None:
        eta = default_eta(spec.a, spec.damping.lower, friedrichs_constant(basis))
    ta = solve_ivp(spec, basis, 0.0, horizon, u0a, u1a, stepper, tables=tables)
    tb = solve_ivp(spec, basis, 0.0, horizon, u0b, u1b, stepper, tables=tables)
    b = eval_t(spec.b, ta.t)
    _, w = weighted_energy(basis, spec.a, eta, b, ta.c - tb.c, ta.c_dot - tb.c_dot)
    if not np.any(w > 0):
        return ContractionResult(np.inf, True, 0.0, ta.t, w, eta)
    rate, resid = fit_decay_rate(w, ta.t, tail_fraction)
    monotone = bool(np.all(np.diff(w) <= 1e-12 * np.max(w)))
    return ContractionResult(rate, monotone, resid, ta.t, w, eta)


@dataclass
class PeriodicityReport:
    omega: float
    defect: float
    converged: bool
    decay_rate: float = None
    snap_error: float = 0.0
    tol: float = 1e-4


def check_periodicity(traj, basis, omega, tail_fraction=0.5, tol=1e-4, decay_rate=None):
    """Sup of the composite norm of u(t + omega) - u(t) over the trailing tail."""
    k, omega_s, err = snap(omega, traj.dt)
    n = len(traj)
    start = int(np.floor((1.0 - tail_fraction) * (n - 1)))
    if n - 1 - start < 2 * k or k < 1:
        raise WindowTooShort(
            f"tail of {(n - 1 - start) * traj.dt:.6g} time units is shorter than 2*omega={2 * omega_s:.6g}")
    idx = np.arange(start, n - k)
    d = composite_norm(basis, traj.c[idx + k] - traj.c[idx], traj.c_dot[idx + k] - traj.c_dot[idx])
    defect = float(np.max(d))
    return PeriodicityReport(omega_s, defect, defect < tol, decay_rate, err, tol)


def _forcing_and_b(spec, basis, tables, times):
    F, _ = forcing_table(tables, spec, basis, times)
    return F, eval_t(spec.b, times)


def forcing_defect(spec, basis, h, window, dt, tables=None):
    """sup over the window of ||F_a(t+h) - F_a(t)|| + |b(t+h) - b(t)| on the dt grid."""
    tables = compute_K0(spec, basis) if tables is None else tables
    k, _, _ = snap(h, dt)
    n_win = int(round((window[1] - window[0]) / dt))
    times = window[0] + dt * np.arange(n_win + k + 1)
    F, b = _forcing_and_b(spec, basis, tables, times)
    dF = np.linalg.norm(F[k:] - F[:n_win + 1], axis=1)
    return float(np.max(dF + np.abs(b[k:] - b[:n_win + 1])))


@dataclass
class AlmostPeriodReport:
    h: float
    snap_error: float
    forcing_defect: float
    solution_defect: float

    @property
    def ratio(self):
        if self.forcing_defect == 0:
            return 0.0 if self.solution_defect == 0 else np.inf
        return self.solution_defect / self.forcing_defect


def check_almost_period(spec, basis, h, window, stepper, sweep, tables=None):
    """Forcing and solution defects of a proposed almost period ``h``.

    ``sweep`` is a :class:`SweepConfig` whose window is replaced by
    [window[0], window[1] + h] so the shifted solution is available.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    tables = compute_K0(spec, basis) if tables is None else tables
    dt = stepper.dt
    k, h_s, err = snap(h, dt)
    f_def = forcing_defect(spec, basis, h_s, window, dt, tables)
    ext = SweepConfig(sweep.m_schedule, (window[0], window[1] + h_s), sweep.sweep_tol,
                      sweep.norm, sweep.workers)
    traj, _ = solve_whole_line(spec, basis, ext, stepper, tables)
    n_win = int(round((window[1] - window[0]) / dt))
    idx = np.arange(0, min(n_win + 1, len(traj) - k))
    d = composite_norm(basis, traj.c[idx + k] - traj.c[idx], traj.c_dot[idx + k] - traj.c_dot[idx])
    return AlmostPeriodReport(h_s, err, f_def, float(np.max(d)))


def scan_almost_periods(spec, basis, h_range, window, dt, tables=None, stride=1):
    """Scan shifts h = k dt in ``h_range`` for the smallest forcing defect.

    Returns (best_h, h_values, defects).
    """
    tables = compute_K0(spec, basis) if tables is None else tables
    k_lo = max(1, int(np.ceil(h_range[0] / dt)))
    k_hi = int(np.floor(h_range[1] / dt))
    if k_hi < k_lo:
        raise ValueError("h_range contains no multiple of dt")
    n_win = int(round((window[1] - window[0]) / dt))
    times = window[0] + dt * np.arange(n_win + k_hi + 1)
    F, b = _forcing_and_b(spec, basis, tables, times)
    ks = np.arange(k_lo, k_hi + 1, stride)
    defects = np.empty(ks.size)
    base_F, base_b = F[:n_win + 1], b[:n_win + 1]
    for j, k in enumerate(ks):
        dF = np.linalg.norm(F[k:k + n_win + 1] - base_F, axis=1)
        defects[j] = np.max(dF + np.abs(b[k:k + n_win + 1] - base_b))
    best = int(np.argmin(defects))
    return float(ks[best] * dt), ks * dt, defects
