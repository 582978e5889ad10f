"""Independent reference implementations used to freeze expected values.

Everything here is deliberately written against the math, not against the
package internals: the shooting oracle integrates the continuum ODE with
scipy, the rearrangement oracles work by explicit geometry and sorting.
Tests compare package output to these, never the other way around.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def shooting_ground_energy(lam=1.0, half_width=8.0):
    """Ground-state level of the continuum functional on (-L, L).

    Solves -u'' + u = lam*u^3 with u(-L)=0 by shooting on the initial slope
    s, matching u'(0)=0 (the ground state is even). The first sign change of
    u'(0) along an ascending geometric slope grid brackets the low branch;
    anything past it belongs to excited states. Energy is
    int u'^2/2 + u^2/2 - lam*u^4/4 over (-L, 0), doubled.
    """
    L = float(half_width)

    def rhs(x, y):
        return [y[1], y[0] - lam * y[0] ** 3]

    def slope_at_zero(s):
        sol = solve_ivp(
            rhs, (-L, 0.0), [0.0, s], rtol=1e-12, atol=1e-14, dense_output=True
        )
        return sol.y[1, -1], sol

    grid = np.geomspace(1e-7, 10.0, 200)
    prev_s, (prev_v, _) = grid[0], slope_at_zero(grid[0])
    bracket = None
    for s in grid[1:]:
        v, _ = slope_at_zero(s)
        if prev_v * v < 0:
            bracket = (prev_s, s)
            break
        prev_s, prev_v = s, v
    if bracket is None:
        raise RuntimeError("no sign change found for the shooting slope")
    s_star = brentq(lambda s: slope_at_zero(s)[0], *bracket, xtol=1e-14)
    _, sol = slope_at_zero(s_star)

    xs = np.linspace(-L, 0.0, 20001)
    u = sol.sol(xs)[0]
    du = sol.sol(xs)[1]
    dens = 0.5 * du**2 + 0.5 * u**2 - 0.25 * lam * u**4
    return 2.0 * float(np.trapezoid(dens, xs))


def fd_gradient(fun, x, eps=1e-6):
    """Central finite differences of a scalar function of a flat array."""
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += eps
        xm[i] -= eps
        g[i] = (fun(xp) - fun(xm)) / (2.0 * eps)
    return g


def schwarz_oracle(domain, values):
    """Sorting-based Schwarz rearrangement reference.

    Shells are grouped by exact squared scaled radius; ranked |values| are
    dealt to shells in ascending radius order and each shell takes the mean
    of its share.
    """
    r2 = domain.radius_sq_scaled()
    ranked = np.sort(np.abs(np.asarray(values, dtype=np.float64)))[::-1]
    out = np.empty(r2.size, dtype=np.float64)
    pos = 0
    for r in np.unique(r2):
        idx = np.flatnonzero(r2 == r)
        out[idx] = ranked[pos : pos + idx.size].mean()
        pos += idx.size
    return out


def _node_coords(domain):
    ax = domain.axis()
    if domain.dimension == 1:
        return ax.reshape(-1, 1)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    return np.column_stack([X.ravel(), Y.ravel()])


def polarize_oracle(domain, values, H):
    """Geometric two-point rearrangement reference.

    Reflects every node through the hyperplane in physical coordinates,
    snaps the image back to the lattice, and applies max on the kept side /
    min on the other, with zero extension when the image leaves the box.
    """
    pts = _node_coords(domain)
    nrm = np.asarray(H.normal, dtype=np.float64)
    a = np.abs(np.asarray(values, dtype=np.float64))
    h = domain.spacing
    side = pts @ nrm - H.offset
    refl = pts - 2.0 * side[:, None] * nrm[None, :]

    ax = domain.axis()
    out = np.empty_like(a)
    for i in range(a.size):
        idx = np.rint((refl[i] - ax[0]) / h).astype(int)
        snapped = ax[0] + idx * h
        if np.max(np.abs(snapped - refl[i])) > 1e-6 * h:
            raise AssertionError("reflection not lattice-aligned")
        inside = np.all((idx >= 0) & (idx < domain.points_per_axis))
        if inside:
            flat = idx[0] if domain.dimension == 1 else idx[0] * domain.points_per_axis + idx[1]
            b = a[flat]
        else:
            b = 0.0
        if side[i] < -1e-12:
            out[i] = max(a[i], b)
        elif side[i] > 1e-12:
            out[i] = min(a[i], b)
        else:
            out[i] = a[i]
    return out


def pairable_profile(rng, n):
    """Symmetric-decreasing multiset scrambled by sign and permutation.

    The center carries the strict maximum; every other value appears an even
    number of times, so the Schwarz rearrangement is exactly attainable by
    polarizations alone.
    """
    half = (n - 1) // 2
    base = np.sort(rng.random(half))[::-1]
    prof = np.zeros(n)
    prof[half] = 1.5 * base[0]
    for k in range(1, half + 1):
        prof[half - k] = base[k - 1]
        prof[half + k] = base[k - 1]
    perm = rng.permutation(n)
    signs = rng.choice([-1.0, 1.0], size=n)
    return prof[perm] * signs
