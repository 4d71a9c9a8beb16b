"""Compare the compiled and pure-numpy time-stepping kernels.

    python benchmarks/bench_kernels.py [--modes 16 64] [--steps 20000]

Both backends march the same linear table; the script reports wall time per
step and the largest difference between their trajectories.
"""

import argparse
import time

import numpy as np

from sdwave.kernels import available_backends


def make_problem(n_modes, steps, dt, seed=0):
    rng = np.random.default_rng(seed)
    lam = (np.arange(1, n_modes + 1)) ** 2.0
    k0 = rng.normal(size=n_modes) / n_modes
    kmod = rng.normal(size=n_modes) / n_modes
    p = lam * kmod + 0.1 * kmod
    lamk = lam * kmod
    t = dt * np.arange(steps + 1)
    b = 1.0 + 0.1 * np.sin(t)
    g = np.outer(np.cos(t), rng.normal(size=n_modes))
    return (rng.normal(size=n_modes), rng.normal(size=n_modes), lam, k0, p, lamk, 1.0,
            b, np.ascontiguousarray(g), dt)


def bench(mod, args, repeats):
    n = args[2].size
    rows = args[7].size
    best = np.inf
    for _ in range(repeats):
        c = np.empty((rows, n))
        d = np.empty((rows, n))
        t0 = time.perf_counter()
        mod.linear_march(*args, c, d)
        best = min(best, time.perf_counter() - t0)
    return best, c, d


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, nargs="+", default=[8, 16, 64])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'modes':>6} {'backend':>9} {'us/step':>9} {'speedup':>8} {'max diff':>10}")
    for n in args.modes:
        prob = make_problem(n, args.steps, args.dt)
        ref_t, ref_c, _ = bench(backends["python"], prob, args.repeats)
        print(f"{n:6d} {'python':>9} {1e6 * ref_t / args.steps:9.3f} {1.0:8.2f} {0.0:10.2e}")
        if "compiled" in backends:
            t, c, _ = bench(backends["compiled"], prob, args.repeats)
            diff = float(np.max(np.abs(c - ref_c)))
            print(f"{n:6d} {'compiled':>9} {1e6 * t / args.steps:9.3f} {ref_t / t:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
