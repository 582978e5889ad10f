"""Numpy reference kernels.

Same call surface as the compiled extension `sympass._kernels`; the backend
module picks one of the two at import time. Everything here works on flat
float64 arrays and returns plain floats/arrays, no grid bookkeeping.
"""

import numpy as np

NAME = "numpy"


def pow_sum(x, p):
    """sum |x_i|^p"""
    if p == 2.0:
        return float(np.dot(x, x))
    return float(np.sum(np.abs(x) ** p))


def pow_sum_diff(x, y, p):
    """sum |x_i - y_i|^p without keeping the temporary alive"""
    d = x - y
    if p == 2.0:
        return float(np.dot(d, d))
    return float(np.sum(np.abs(d) ** p))


def polarize_values(w, in_h, mirror, valid):
    """Two-point rearrangement of |w|.

    in_h: uint8 mask of nodes on the H side; mirror: int64 mirrored flat
    index (clipped); valid: uint8 mask, 0 where the mirror left the grid
    (the reflected value is then the zero extension).
    """
    a = np.abs(w)
    b = np.where(valid.astype(bool), a[mirror], 0.0)
    return np.where(in_h.astype(bool), np.maximum(a, b), np.minimum(a, b))


def kinetic_sum_1d(u, p):
    """sum over all n+1 edges of the zero-extended line of |u_{i+1}-u_i|^p."""
    d = np.diff(u, prepend=0.0, append=0.0)
    if p == 2.0:
        return float(np.dot(d, d))
    return float(np.sum(np.abs(d) ** p))


def eval_p2_1d(u, h, lam, q, kappa):
    """f(lam; u) for the p=2 pure-power family on a 1D grid.

    0.5/h * sum d^2 + 0.5*h*sum u^2 - (lam*h/q) * sum kappa*|u|^q
    with d the zero-extended edge differences.
    """
    d = np.diff(u, prepend=0.0, append=0.0)
    kin = 0.5 * float(np.dot(d, d)) / h
    mass = 0.5 * h * float(np.dot(u, u))
    if q == 4.0:
        u2 = u * u
        nl = float(np.dot(kappa * u2, u2))
    else:
        nl = float(np.sum(kappa * np.abs(u) ** q))
    return kin + mass - lam * h * nl / q


def grad_p2_1d(u, h, lam, q, kappa):
    """Exact gradient of eval_p2_1d with respect to the node values."""
    d = np.diff(u, prepend=0.0, append=0.0)
    lap = (d[:-1] - d[1:]) / h
    if q == 4.0:
        nl = kappa * u * u * u
    else:
        nl = kappa * np.abs(u) ** (q - 2.0) * u
    return h * (lap / h + u - lam * nl)
