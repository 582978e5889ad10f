# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the small-array hot loops.

Mirrors sympass._kernels_py exactly; see that module for the semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()

NAME = "cython"


def pow_sum(double[::1] x, double p):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0
    if p == 2.0:
        for i in range(n):
            s += x[i] * x[i]
    else:
        for i in range(n):
            s += pow(fabs(x[i]), p)
    return s


def pow_sum_diff(double[::1] x, double[::1] y, double p):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, d
    if p == 2.0:
        for i in range(n):
            d = x[i] - y[i]
            s += d * d
    else:
        for i in range(n):
            s += pow(fabs(x[i] - y[i]), p)
    return s


def polarize_values(double[::1] w, unsigned char[::1] in_h,
                    long long[::1] mirror, unsigned char[::1] valid):
    cdef Py_ssize_t i, n = w.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double a, b
    for i in range(n):
        a = fabs(w[i])
        b = fabs(w[mirror[i]]) if valid[i] else 0.0
        if in_h[i]:
            out[i] = a if a > b else b
        else:
            out[i] = a if a < b else b
    return out_arr


def kinetic_sum_1d(double[::1] u, double p):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double s = 0.0, prev = 0.0, d
    if p == 2.0:
        for i in range(n):
            d = u[i] - prev
            s += d * d
            prev = u[i]
        s += prev * prev
    else:
        for i in range(n):
            d = u[i] - prev
            s += pow(fabs(d), p)
            prev = u[i]
        s += pow(fabs(prev), p)
    return s


def eval_p2_1d(double[::1] u, double h, double lam, double q, double[::1] kappa):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double kin = 0.0, mass = 0.0, nl = 0.0, prev = 0.0, d, a
    for i in range(n):
        d = u[i] - prev
        kin += d * d
        mass += u[i] * u[i]
        prev = u[i]
    kin += prev * prev
    if q == 4.0:
        for i in range(n):
            a = u[i] * u[i]
            nl += kappa[i] * a * a
    else:
        for i in range(n):
            nl += kappa[i] * pow(fabs(u[i]), q)
    return 0.5 * kin / h + 0.5 * h * mass - lam * h * nl / q


def grad_p2_1d(double[::1] u, double h, double lam, double q, double[::1] kappa):
    cdef Py_ssize_t i, n = u.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double left, mid, right, nl
    for i in range(n):
        mid = u[i]
        left = u[i - 1] if i > 0 else 0.0
        right = u[i + 1] if i < n - 1 else 0.0
        if q == 4.0:
            nl = kappa[i] * mid * mid * mid
        else:
            nl = kappa[i] * pow(fabs(mid), q - 2.0) * mid
        out[i] = (2.0 * mid - left - right) / h + h * (mid - lam * nl)
    return out_arr
