"""Symmetric grids, grid functions, and discrete norms.

The ambient space is the centered cube [-L, L]^N (N = 1 or 2) sampled on an
odd number of nodes per axis, so the origin is a node and every reflection
through a coordinate hyperplane (or a diagonal, in 2D) maps nodes to nodes.
Functions carry a zero-trace convention: they are extended by 0 outside the
cube, and the forward-difference gradient runs over all edges of the
zero-extended lattice (both ghost edges in 1D). Quadrature is the midpoint
rule sum(.) * h^N, which is exactly permutation invariant - the rearrangement
operators in the rearrange module rely on that.

Scaled integer coordinates are used internally: node i on an axis sits at
X = 2i - (n-1), an even integer in units of h/2. Half-space offsets live on
the same lattice, which keeps reflections exact integer maps.
"""

from dataclasses import dataclass

import numpy as np

from . import backend


@dataclass(frozen=True)
class Domain:
    """Centered cube grid: [-L, L]^dimension with n nodes per axis, n odd."""

    dimension: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        n = self.points_per_axis
        if n < 3 or n % 2 == 0:
            raise ValueError("points_per_axis must be odd and >= 3")

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.points_per_axis - 1)

    @property
    def size(self):
        return self.points_per_axis ** self.dimension

    @property
    def cell(self):
        """Quadrature weight h^N."""
        return self.spacing ** self.dimension

    def axis(self):
        """Physical coordinates of one axis."""
        return np.linspace(-self.half_width, self.half_width, self.points_per_axis)

    def scaled_axis(self):
        """Integer coordinates 2i - (n-1); even, symmetric about 0."""
        n = self.points_per_axis
        return 2 * np.arange(n) - (n - 1)

    def node_radii(self):
        """Flat array of physical |x| per node."""
        x = self.axis()
        if self.dimension == 1:
            return np.abs(x)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        return np.sqrt(xx * xx + yy * yy).ravel()

    def radius_sq_scaled(self):
        """Flat array of X1^2 (+ X2^2), the integer shell label."""
        s = self.scaled_axis()
        if self.dimension == 1:
            return s * s
        xx, yy = np.meshgrid(s, s, indexing="ij")
        return (xx * xx + yy * yy).ravel()


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Node samples of a real function on a Domain, flat row-major storage."""

    domain: Domain
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        if v.size != self.domain.size:
            raise ValueError("values length does not match domain")
        object.__setattr__(self, "values", v)

    def with_values(self, values):
        return GridFunction(self.domain, values)


@dataclass(frozen=True)
class NormKind:
    """Tagged norm selector: Lp(p), SobolevSeminorm(p), SobolevFull(p), V(p, pstar)."""

    tag: str
    p: float
    pstar: float | None = None

    def __post_init__(self):
        if self.tag not in ("lp", "seminorm", "full", "v"):
            raise ValueError("unknown norm tag")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.tag == "v":
            if self.pstar is None or not self.pstar > self.p:
                raise ValueError("V norm needs pstar > p")

    @classmethod
    def lp(cls, p):
        return cls("lp", float(p))

    @classmethod
    def sobolev_seminorm(cls, p):
        return cls("seminorm", float(p))

    @classmethod
    def sobolev_full(cls, p):
        return cls("full", float(p))

    @classmethod
    def v(cls, p, pstar):
        return cls("v", float(p), float(pstar))

    def of(self, u):
        if self.tag == "lp":
            return lp_norm(u, self.p)
        if self.tag == "seminorm":
            return sobolev_seminorm(u, self.p)
        if self.tag == "full":
            return sobolev_full_norm(u, self.p)
        return v_norm(u, self.p, self.pstar)


def _require_finite(values):
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite input")


def lp_norm(u, p):
    """Discrete L^p norm, midpoint quadrature (sum |u_i|^p h^N)^(1/p)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    _require_finite(u.values)
    return (backend.pow_sum(u.values, float(p)) * u.domain.cell) ** (1.0 / p)


def v_norm(u, p, pstar):
    """Norm of V = L^p cap L^pstar, taken as the max of the two norms."""
    if not 1 <= p < pstar:
        raise ValueError("need 1 <= p < pstar")
    return max(lp_norm(u, p), lp_norm(u, pstar))


def _seminorm_values_1d(values, h, p):
    return (backend.kinetic_sum_1d(values, float(p)) * h ** (1.0 - p)) ** (1.0 / p)


def _grad_magnitude_2d(values, n, h):
    """|grad u| on the extended node set (n+1)^2, zero outside the cube."""
    a = np.zeros((n + 2, n + 2))
    a[1:-1, 1:-1] = values.reshape(n, n)
    dx = (a[1:, :] - a[:-1, :]) / h
    dy = (a[:, 1:] - a[:, :-1]) / h
    return np.sqrt(dx[:, :-1] ** 2 + dy[:-1, :] ** 2)


def sobolev_seminorm(u, p):
    """(sum |grad_h u|^p h^N)^(1/p) with forward differences and zero ghosts.

    The sum runs over the zero-extended node set, so both boundary ghost
    edges contribute in 1D; in 2D the low-side ghost layer is included.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    _require_finite(u.values)
    d = u.domain
    if d.dimension == 1:
        return _seminorm_values_1d(u.values, d.spacing, float(p))
    mag = _grad_magnitude_2d(u.values, d.points_per_axis, d.spacing)
    return (np.sum(mag ** p) * d.cell) ** (1.0 / p)


def sobolev_full_norm(u, p):
    """Full W^(1,p) norm: (seminorm^p + lp^p)^(1/p); the X norm."""
    return (sobolev_seminorm(u, p) ** p + lp_norm(u, p) ** p) ** (1.0 / p)


def reflect(x, H, domain):
    """Mirror a grid index across the boundary hyperplane of polarizer H.

    x is an int in 1D or an (i, j) pair in 2D. Involution; fixes exactly the
    nodes on the hyperplane. Raises "incompatible polarizer" when H is not
    grid aligned and "reflection leaves the grid" when the mirror falls
    outside the cube.
    """
    from .rearrange import _resolve_exact

    kind, axis, sign, k = _resolve_exact(domain, H)
    n = domain.points_per_axis
    if domain.dimension == 1:
        i = int(x)
        m = sign * k + (n - 1) - i
        if not 0 <= m < n:
            raise ValueError("reflection leaves the grid")
        return m
    i, j = int(x[0]), int(x[1])
    if kind == "axis":
        idx = [i, j]
        idx[axis] = sign * k + (n - 1) - idx[axis]
        if not 0 <= idx[axis] < n:
            raise ValueError("reflection leaves the grid")
        return (idx[0], idx[1])
    sx, sy = sign
    x1 = 2 * i - (n - 1)
    x2 = 2 * j - (n - 1)
    t = sx * x1 + sy * x2 - 2 * k
    # t is even because scaled node coordinates are even
    mi = i - (t // 2) * sx
    mj = j - (t // 2) * sy
    if not (0 <= mi < n and 0 <= mj < n):
        raise ValueError("reflection leaves the grid")
    return (mi, mj)


def embed_constant(domain, p, pstar, trials=1000, seed=0):
    """Empirical embedding constant K with ||u||_V <= K ||u||_X.

    Maximizes the ratio over random functions plus a few structured
    candidates (single nodes, the constant, a centered bump), then applies a
    safety factor 2. By construction K bounds the ratio for the sampled set.
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    candidates = []
    e = np.zeros(domain.size)
    e[domain.size // 2] = 1.0
    candidates.append(e)
    candidates.append(np.ones(domain.size))
    candidates.append(1.0 / np.cosh(domain.node_radii()))
    for _ in range(trials):
        candidates.append(rng.standard_normal(domain.size))
    for vals in candidates:
        u = GridFunction(domain, vals)
        xn = sobolev_full_norm(u, p)
        if xn == 0.0:
            continue
        best = max(best, v_norm(u, p, pstar) / xn)
    return 2.0 * best
