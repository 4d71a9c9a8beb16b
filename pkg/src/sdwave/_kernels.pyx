# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implicit-trapezoid kernels; same contract as ``_kernels_py``."""

import numpy as np
from libc.math cimport fabs, INFINITY


cdef inline double dot(const double[::1] x, const double[::1] y, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(n):
        s += x[k] * y[k]
    return s


cdef void _acc(const double[::1] c, const double[::1] d, const double[::1] lam,
               const double[::1] k0, const double[::1] p, const double[::1] lamk,
               double a2, double b, const double[::1] g, double[::1] out,
               Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = dot(p, c, n) + b * dot(lamk, d, n)
    for k in range(n):
        out[k] = -a2 * lam[k] * c[k] - b * lam[k] * d[k] + k0[k] * s + g[k]


cdef double _stage(const double[::1] c0, const double[::1] d0, const double[::1] acc0,
                   const double[::1] g1, const double[::1] lam, const double[::1] k0,
                   const double[::1] p, const double[::1] lamk, double a2, double b1,
                   double h, double[::1] c1, double[::1] d1, double[::1] acc1,
                   double[::1] work_y, double[::1] work_z, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double hh = 0.5 * h
    cdef double pcp = 0.0, vz = 0.0, vy = 0.0, diag, vk, denom, scale
    # c1 holds the predictor cp until the end
    for k in range(n):
        c1[k] = c0[k] + hh * d0[k]
        pcp += p[k] * c1[k]
    for k in range(n):
        diag = 1.0 + hh * b1 * lam[k] + hh * hh * a2 * lam[k]
        work_y[k] = (d0[k] + hh * acc0[k]
                     + hh * (-a2 * lam[k] * c1[k] + k0[k] * pcp + g1[k])) / diag
        work_z[k] = k0[k] / diag
        vk = hh * p[k] + b1 * lamk[k]
        vz += vk * work_z[k]
        vy += vk * work_y[k]
    denom = 1.0 - hh * vz
    scale = hh * vy / denom
    for k in range(n):
        d1[k] = work_y[k] + work_z[k] * scale
        c1[k] = c1[k] + hh * d1[k]
    _acc(c1, d1, lam, k0, p, lamk, a2, b1, g1, acc1, n)
    return denom


def stage_solve(c0, d0, acc0, g1, lam, k0, p, lamk, double a2, double b1, double h):
    cdef Py_ssize_t n = lam.shape[0]
    cdef const double[::1] c0v = np.ascontiguousarray(c0, dtype=np.float64)
    cdef const double[::1] d0v = np.ascontiguousarray(d0, dtype=np.float64)
    cdef const double[::1] a0v = np.ascontiguousarray(acc0, dtype=np.float64)
    cdef const double[::1] g1v = np.ascontiguousarray(g1, dtype=np.float64)
    cdef const double[::1] lamv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] k0v = np.ascontiguousarray(k0, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] lkv = np.ascontiguousarray(lamk, dtype=np.float64)
    c1 = np.empty(n)
    d1 = np.empty(n)
    acc1 = np.empty(n)
    wy = np.empty(n)
    wz = np.empty(n)
    cdef double denom = _stage(c0v, d0v, a0v, g1v, lamv, k0v, pv, lkv, a2, b1, h,
                               c1, d1, acc1, wy, wz, n)
    return c1, d1, acc1, denom


def linear_march(c0, d0, lam, k0, p, lamk, double a2, b_tab, g_tab, double h,
                 double[:, ::1] c_out, double[:, ::1] d_out):
    cdef const double[::1] lamv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] k0v = np.ascontiguousarray(k0, dtype=np.float64)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef const double[::1] lkv = np.ascontiguousarray(lamk, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b_tab, dtype=np.float64)
    cdef const double[:, ::1] gv = np.ascontiguousarray(g_tab, dtype=np.float64)
    cdef Py_ssize_t n = lamv.shape[0]
    cdef Py_ssize_t steps = bv.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double[::1] acc = np.empty(n)
    cdef double[::1] acc_next = np.empty(n)
    cdef double[::1] wy = np.empty(n)
    cdef double[::1] wz = np.empty(n)
    cdef double denom, min_denom = INFINITY
    cdef const double[::1] c0v = np.ascontiguousarray(c0, dtype=np.float64)
    cdef const double[::1] d0v = np.ascontiguousarray(d0, dtype=np.float64)
    for k in range(n):
        c_out[0, k] = c0v[k]
        d_out[0, k] = d0v[k]
    with nogil:
        _acc(c_out[0], d_out[0], lamv, k0v, pv, lkv, a2, bv[0], gv[0], acc, n)
        for i in range(steps):
            denom = _stage(c_out[i], d_out[i], acc, gv[i + 1], lamv, k0v, pv, lkv,
                           a2, bv[i + 1], h, c_out[i + 1], d_out[i + 1], acc_next,
                           wy, wz, n)
            if fabs(denom) < min_denom:
                min_denom = fabs(denom)
            for k in range(n):
                acc[k] = acc_next[k]
    return min_denom
