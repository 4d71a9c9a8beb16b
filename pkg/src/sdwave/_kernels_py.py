"""Pure-numpy implicit-trapezoid kernels (fallback for ``_kernels.pyx``).

Both implementations solve the same stage equation for the modal system

    c' = d
    d' = -a2 lam c - b lam d + k0 (p . c + b lamk . d) + g(t)

where the rank-one term k0 (.) carries the reduction coupling. Per step the
implicit velocity solves (diag + rank one) d1 = rhs, done with
Sherman-Morrison in O(N).
"""

import numpy as np


def acceleration(c, d, lam, k0, p, lamk, a2, b, g):
    return -a2 * lam * c - b * lam * d + k0 * (p @ c + b * (lamk @ d)) + g


def stage_solve(c0, d0, acc0, g1, lam, k0, p, lamk, a2, b1, h):
    """One implicit-trapezoid step with the forcing at t1 frozen to ``g1``.

    Returns (c1, d1, acc1, denom); ``denom`` is the Sherman-Morrison pivot.
    """
    hh = 0.5 * h
    cp = c0 + hh * d0
    rhs = d0 + hh * acc0 + hh * (-a2 * lam * cp + k0 * (p @ cp) + g1)
    diag = 1.0 + hh * b1 * lam + hh * hh * a2 * lam
    v = hh * p + b1 * lamk
    y = rhs / diag
    z = k0 / diag
    denom = 1.0 - hh * (v @ z)
    d1 = y + z * (hh * (v @ y) / denom)
    c1 = cp + hh * d1
    acc1 = acceleration(c1, d1, lam, k0, p, lamk, a2, b1, g1)
    return c1, d1, acc1, denom


def linear_march(c0, d0, lam, k0, p, lamk, a2, b_tab, g_tab, h, c_out, d_out):
    """March a forcing table of n+1 rows; fills rows 0..n of the outputs.

    Returns the smallest |denom| met, so callers can flag a singular stage.
    """
    n = b_tab.shape[0] - 1
    c = np.array(c0, dtype=float)
    d = np.array(d0, dtype=float)
    c_out[0] = c
    d_out[0] = d
    acc = acceleration(c, d, lam, k0, p, lamk, a2, b_tab[0], g_tab[0])
    min_denom = np.inf
    for i in range(n):
        c, d, acc, denom = stage_solve(c, d, acc, g_tab[i + 1], lam, k0, p, lamk,
                                       a2, b_tab[i + 1], h)
        min_denom = min(min_denom, abs(denom))
        c_out[i + 1] = c
        d_out[i + 1] = d
    return min_denom
