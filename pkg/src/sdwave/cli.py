"""Command-line front end.

    sdwave <command> CONFIG [-o OUT] [--set key=value ...] [--plots]

Exit codes: 0 success, 2 configuration error, 3 divergence or non-convergence
of the time stepper, 4 sweep non-convergence, 5 degenerate overdetermination.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, kernels
from .basis import project
from .config import apply_overrides, load_config, resolve
from .diagnostics import (default_eta, energy_series, friedrichs_constant,
                          regularity_transfer_check, smallness_check)
from .errors import (ConfigError, DegenerateOverdetermination, Diverged, NonConvergence,
                     SdwaveError, SweepNotConverged)
from .families import space_function
from .inverse import compute_K0, consistency_ode_check, eval_t, overdetermination_residual
from .io import write_summary, write_trajectory_csv
from .longtime import (SweepConfig, check_almost_period, check_periodicity, default_schedule,
                       scan_almost_periods, solve_whole_line)
from .mms import refinement_study
from .problem import validate
from .solver import solve_ivp

log = logging.getLogger("sdwave")

COMMANDS = ("validate", "solve-ivp", "identify", "find-periodic", "check-smallness",
            "mms-verify", "almost-period-scan")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_SWEEP, EXIT_DEGENERATE = 0, 2, 3, 4, 5


@dataclass
class RunManifest:
    command: str
    config_path: str
    output_dir: str = "."
    overrides: list = field(default_factory=list)
    plots: bool = False


# ------------------------------------------------------------------ helpers

def _initial(res, tables):
    """Projected initial data: exact values for manufactured problems."""
    basis = res.basis
    t0 = float(res.config["solver"]["t0"])
    if res.manufactured is not None:
        mp = res.manufactured
        return (project(basis, lambda x: mp.u_star(x, t0)),
                project(basis, lambda x: mp.u_star_t(x, t0)))
    init = res.config.get("initial", {})
    dom = res.spec.domain
    try:
        u0 = space_function(init.get("u0", {"family": "zero"}), dom, "initial.u0").f
        u1 = space_function(init.get("u1", {"family": "zero"}), dom, "initial.u1").f
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial: {exc}") from exc
    return project(basis, u0), project(basis, u1)


def _eta(res):
    d = res.config.setdefault("diagnostics", {})
    if d.get("eta") is None:
        d["eta"] = float(default_eta(res.spec.a, res.spec.damping.lower,
                                     friedrichs_constant(res.basis)))
    return float(d["eta"])


def _trajectory_summary(res, traj, tables, r):
    dt = traj.dt
    out = {
        "steps": traj.meta["steps"], "samples": len(traj), "t_end": traj.meta["t_end"],
        "backend": traj.meta["backend"],
        "nonlinear_iterations_total": traj.meta["nonlinear_iterations_total"],
        "nonlinear_iterations_max": traj.meta["nonlinear_iterations_max"],
        "final_norm_c": float(np.linalg.norm(traj.c[-1])),
        "final_norm_c_dot": float(np.linalg.norm(traj.c_dot[-1])),
        "final_g": float(traj.g[-1]),
        "max_abs_r": float(np.max(np.abs(r))),
    }
    if len(traj) >= 3 and traj.meta["stride"] == 1:
        out["consistency_residual"] = consistency_ode_check(r, tables.alpha, dt)
    if res.spec.damping.lower > 0:
        out["regularity_transfer_residual"] = regularity_transfer_check(traj, res.spec, res.basis)
        es = energy_series(traj, res.basis, res.spec, _eta(res), tables)
        out["energy.E_basic_final"] = float(es.E_basic[-1])
        out["energy.W_eta_final"] = float(es.W_eta[-1])
        out["energy.W_eta_min"] = float(np.min(es.W_eta))
    return out


def _sweep_cfg(res):
    lt = res.config.setdefault("longtime", {})
    omega = lt.get("omega")
    if omega is not None:
        omega = float(omega)
    lt.setdefault("window", [0.0, 4.0 * omega if omega else 20.0])
    lt.setdefault("m_schedule", default_schedule(omega))
    lt.setdefault("sweep_tol", 1e-6)
    lt.setdefault("tail_fraction", 0.5)
    lt.setdefault("periodicity_tol", 1e-4)
    lt.setdefault("workers", 1)
    try:
        cfg = SweepConfig(tuple(lt["m_schedule"]), tuple(float(v) for v in lt["window"]),
                          float(lt["sweep_tol"]), workers=int(lt["workers"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"longtime: {exc}") from exc
    return cfg, omega


# ----------------------------------------------------------------- commands

def cmd_validate(res, out_dir, summary):
    n = int(res.config.get("validate", {}).get("sample_count", 32))
    rep = validate(res.spec, n)
    summary["validation"] = rep.as_dict()
    summary["validation_ok"] = rep.ok
    for chk in rep.checks:
        print(f"{chk.name:22s} {'pass' if chk.passed else 'FAIL'}  worst={chk.worst:.3e}")
    return None


def _solve(res, out_dir, summary, coupled):
    tables = compute_K0(res.spec, res.basis, coupled=coupled)
    u0, u1 = _initial(res, tables)
    s_cfg = res.config["solver"]
    traj = solve_ivp(res.spec, res.basis, float(s_cfg["t0"]), float(s_cfg["t1"]), u0, u1,
                     res.stepper, tables=tables)
    r = overdetermination_residual(tables, res.basis, traj)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj, r)
    summary["trajectory"] = _trajectory_summary(res, traj, tables, r)
    if res.manufactured is not None:
        mp = res.manufactured
        x = res.basis.quad_nodes
        u_ex = np.stack([mp.u_star(x, t) for t in traj.t])
        summary["mms"] = {
            "g_error": float(np.max(np.abs(traj.g - eval_t(mp.g_star, traj.t)))),
            "u_error": float(np.max(np.abs(traj.c @ res.basis.values.T - u_ex))),
        }
        print(f"g-error {summary['mms']['g_error']:.3e}")
    print(f"solved {traj.meta['steps']} steps to t={traj.meta['t_end']:.6g}; "
          f"max |r| = {summary['trajectory']['max_abs_r']:.3e}")
    return traj


def cmd_solve_ivp(res, out_dir, summary):
    return _solve(res, out_dir, summary, res.coupled)


def cmd_identify(res, out_dir, summary):
    return _solve(res, out_dir, summary, True)


def _smallness_summary(res):
    d = res.config.setdefault("diagnostics", {})
    rep = smallness_check(res.spec, res.basis, eta=d.get("eta"), eta1=d.get("eta1"),
                          eps_free=d.get("eps_free"))
    d["eta"], d["eta1"] = rep.eta, rep.eta1
    d["eps_free"] = dict(rep.eps_free)
    return rep


def cmd_find_periodic(res, out_dir, summary):
    tables = compute_K0(res.spec, res.basis, coupled=res.coupled)
    cfg, omega = _sweep_cfg(res)
    if omega is None:
        raise ConfigError("find-periodic needs longtime.omega")
    traj, diag = solve_whole_line(res.spec, res.basis, cfg, res.stepper, tables,
                                  smallness=lambda: _smallness_summary(res))
    lt = res.config["longtime"]
    rep = check_periodicity(traj, res.basis, omega, float(lt["tail_fraction"]),
                            float(lt["periodicity_tol"]), decay_rate=diag.fitted_rate)
    r = overdetermination_residual(tables, res.basis, traj)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), traj, r)
    summary["sweep"] = diag.as_dict()
    summary["periodicity"] = {"omega": rep.omega, "snap_error": rep.snap_error,
                              "defect": rep.defect, "converged": rep.converged,
                              "tol": rep.tol, "decay_rate": rep.decay_rate}
    print(f"sweep converged at m={traj.meta['sweep_m']:.6g}; periodicity defect "
          f"{rep.defect:.3e}; fitted rate {rep.decay_rate}")
    return traj


def cmd_check_smallness(res, out_dir, summary):
    rep = _smallness_summary(res)
    summary["smallness"] = rep.as_dict()
    print(f"gamma = {rep.gamma:.6g}   alpha = {rep.alpha:.6g}   eta = {rep.eta:.6g}   "
          f"eta1 = {rep.eta1:.6g}")
    for name, margin in rep.margins.items():
        print(f"{name:16s} {'pass' if rep.conditions[name] else 'FAIL'}  margin={margin:+.4e}")
    print(f"verdict: {'pass' if rep.verdict else 'fail'}")
    return None


def cmd_mms_verify(res, out_dir, summary):
    if res.manufactured is None:
        raise ConfigError("mms-verify needs a 'manufactured' section")
    levels = int(res.config.get("mms", {}).get("levels", 2))
    s_cfg = res.config["solver"]
    horizon = float(s_cfg["t1"]) - float(s_cfg["t0"])
    reports, orders = refinement_study(res.manufactured, res.basis, res.stepper, horizon,
                                       levels, float(s_cfg["t0"]))
    summary["mms"] = {}
    for j, rep in enumerate(reports):
        summary["mms"][f"level{j}"] = {"dt": rep.dt, "err_u": rep.err_u, "err_ut": rep.err_ut,
                                       "err_g": rep.err_g}
        print(f"dt={rep.dt:.3e}  err_u={rep.err_u:.3e}  err_ut={rep.err_ut:.3e}  "
              f"err_g={rep.err_g:.3e}")
    summary["mms"]["orders"] = orders
    summary["mms"]["g_error"] = reports[0].err_g
    return _solve(res, out_dir, {}, True)


def cmd_almost_period_scan(res, out_dir, summary):
    tables = compute_K0(res.spec, res.basis, coupled=res.coupled)
    cfg, _ = _sweep_cfg(res)
    ap = res.config.setdefault("almost_period", {})
    ap.setdefault("window", list(cfg.window))
    ap.setdefault("h_min", 1.0)
    ap.setdefault("h_max", 40.0)
    ap.setdefault("scan_stride", 1)
    window = tuple(float(v) for v in ap["window"])
    best, hs, defects = scan_almost_periods(res.spec, res.basis,
                                            (float(ap["h_min"]), float(ap["h_max"])), window,
                                            res.stepper.dt, tables, int(ap["scan_stride"]))
    rep = check_almost_period(res.spec, res.basis, best, window, res.stepper, cfg, tables)
    summary["almost_period"] = {"h": rep.h, "snap_error": rep.snap_error,
                                "forcing_defect": rep.forcing_defect,
                                "solution_defect": rep.solution_defect, "ratio": rep.ratio,
                                "scanned": int(hs.size)}
    print(f"h={rep.h:.6g}  forcing defect {rep.forcing_defect:.3e}  solution defect "
          f"{rep.solution_defect:.3e}  ratio {rep.ratio:.3g}")
    return None


_DISPATCH = {
    "validate": cmd_validate, "solve-ivp": cmd_solve_ivp, "identify": cmd_identify,
    "find-periodic": cmd_find_periodic, "check-smallness": cmd_check_smallness,
    "mms-verify": cmd_mms_verify, "almost-period-scan": cmd_almost_period_scan,
}


def run(manifest):
    """Execute one command; returns the process exit code."""
    if manifest.command not in _DISPATCH:
        log.error("unknown command %s", manifest.command)
        return EXIT_CONFIG
    summary = {"command": manifest.command, "version": __version__,
               "kernel_backend": kernels.BACKEND}
    out_dir = manifest.output_dir
    code = EXIT_OK
    res = None
    try:
        cfg = apply_overrides(load_config(manifest.config_path), manifest.overrides)
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
        res = resolve(cfg)
        traj = _DISPATCH[manifest.command](res, out_dir, summary)
        if "eps_free" not in res.config.get("diagnostics", {}):
            # echo the defaulted eta, eta1 and free tolerances
            try:
                _smallness_summary(res)
            except SdwaveError:
                pass
        if manifest.plots and traj is not None:
            from .plots import plot_run
            energy = None
            if res.spec.damping.lower > 0:
                energy = energy_series(traj, res.basis, res.spec, _eta(res),
                                       compute_K0(res.spec, res.basis,
                                                  coupled=traj.meta.get("coupled", True)))
            summary["plots"] = plot_run(os.path.join(out_dir, "trajectory.csv"), out_dir, energy)
    except ConfigError as exc:
        code, summary["error"] = EXIT_CONFIG, str(exc)
    except (Diverged, NonConvergence) as exc:
        code, summary["error"] = EXIT_DIVERGED, str(exc)
    except SweepNotConverged as exc:
        code, summary["error"] = EXIT_SWEEP, str(exc)
        summary["sweep"] = exc.diagnostics.as_dict()
        if exc.smallness is not None:
            summary["smallness"] = exc.smallness.as_dict()
    except DegenerateOverdetermination as exc:
        code, summary["error"] = EXIT_DEGENERATE, str(exc)
    except SdwaveError as exc:
        code, summary["error"] = EXIT_CONFIG, str(exc)
    summary["exit_code"] = code
    if res is not None:
        summary["config"] = res.config
    if "error" in summary:
        print(f"error: {summary['error']}", file=sys.stderr)
    if os.path.isdir(out_dir):
        write_summary(os.path.join(out_dir, "summary.yaml"), summary)
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="sdwave", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="YAML configuration file")
    p.add_argument("-o", "--output-dir", default=".", help="directory for CSV and summary")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="dotted-path override, e.g. solver.dt=5e-4")
    p.add_argument("--plots", action="store_true", help="also write PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(args.command, args.config, args.output_dir, args.overrides, args.plots)
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
