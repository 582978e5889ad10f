"""Polarization, Schwarz rearrangement, and greedy approximate symmetrization.

A polarizer is a closed half-space H = {x . normal <= offset} with offset
>= 0, so H always contains the origin-centered half of the cube. Polarizing
a grid function routes through its modulus: with w = |u| and sigma_H the
reflection across the boundary hyperplane,

    u^H(x) = max(w(x), w(sigma_H x)) for x in H,  min(...) otherwise,

where w is extended by 0 outside the cube. On the grids used here every
admissible hyperplane maps nodes to nodes, so polarization permutes the
multiset of |u| node values exactly; all rearrangement identities below are
exact in floating point, not approximate.

The greedy symmetrizer drives a function toward its Schwarz rearrangement by
repeatedly applying the best of a random batch of polarizers, falling back to
one exhaustive sweep of the pool before declaring a stall.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .grid import Domain, GridFunction

_SQ2 = np.sqrt(2.0)

_ACTION_CACHE = {}
_SHELL_CACHE = {}
_POOL_CACHE = {}


@dataclass(frozen=True)
class Polarizer:
    """Half-space {x . normal <= offset}; normal is a unit vector, offset >= 0."""

    normal: tuple
    offset: float

    def __post_init__(self):
        nv = tuple(float(c) for c in self.normal)
        if len(nv) not in (1, 2):
            raise ValueError("normal must have 1 or 2 components")
        if abs(sum(c * c for c in nv) - 1.0) > 1e-9:
            raise ValueError("normal must be a unit vector")
        if self.offset < 0:
            raise ValueError("offset must be nonnegative")
        object.__setattr__(self, "normal", nv)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dimension(self):
        return len(self.normal)

    @classmethod
    def axis(cls, dimension, axis=0, sign=1, offset=0.0):
        """Half-space bounded by a hyperplane orthogonal to a coordinate axis."""
        if not 0 <= axis < dimension:
            raise ValueError("axis out of range")
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        n = [0.0] * dimension
        n[axis] = float(sign)
        return cls(tuple(n), offset)

    @classmethod
    def diagonal(cls, sx, sy, offset=0.0):
        """2D half-space bounded by a diagonal hyperplane x*sx + y*sy = const."""
        if sx not in (1, -1) or sy not in (1, -1):
            raise ValueError("diagonal signs must be +1 or -1")
        return cls((sx / _SQ2, sy / _SQ2), offset)


def origin_polarizer(dimension):
    """The canonical polarizer through the origin, {x_1 <= 0}."""
    return Polarizer.axis(dimension, axis=0, sign=1, offset=0.0)


def _resolve_exact(domain, H):
    """Classify H against the grid; returns (kind, axis, sign, k).

    k is the hyperplane position on the half-spacing lattice: the boundary is
    {sign * X = k} in scaled coordinates for axis polarizers (k = 2*offset/h,
    node-aligned when even, midpoint when odd) and {sx*X1 + sy*X2 = 2k} for
    diagonals (offset = k*h/sqrt(2); only node-aligned diagonals keep the
    node-to-node reflection property, so midpoint diagonals are rejected).
    """
    if H.dimension != domain.dimension:
        raise ValueError("incompatible polarizer")
    h = domain.spacing
    nv = H.normal
    if domain.dimension == 1:
        sign = 1 if nv[0] > 0 else -1
        raw = 2.0 * H.offset / h
        k = round(raw)
        if abs(raw - k) > 1e-9 * (1.0 + abs(raw)):
            raise ValueError("incompatible polarizer")
        return ("axis", 0, sign, int(k))
    for axis in (0, 1):
        if abs(abs(nv[axis]) - 1.0) <= 1e-9:
            sign = 1 if nv[axis] > 0 else -1
            raw = 2.0 * H.offset / h
            k = round(raw)
            if abs(raw - k) > 1e-9 * (1.0 + abs(raw)):
                raise ValueError("incompatible polarizer")
            return ("axis", axis, sign, int(k))
    if abs(abs(nv[0]) - 1.0 / _SQ2) <= 1e-9 and abs(abs(nv[1]) - 1.0 / _SQ2) <= 1e-9:
        signs = (1 if nv[0] > 0 else -1, 1 if nv[1] > 0 else -1)
        raw = H.offset * _SQ2 / h
        k = round(raw)
        if abs(raw - k) > 1e-9 * (1.0 + abs(raw)):
            raise ValueError("incompatible polarizer")
        return ("diag", None, signs, int(k))
    raise ValueError("incompatible polarizer")


def _action(domain, H):
    """Cached node classification for polarize: (in_h, mirror, valid) arrays.

    in_h marks nodes inside the half-space, mirror holds the flat index of
    each node's reflection (clipped), valid marks mirrors that stay on the
    grid; off-grid mirrors read the zero extension.
    """
    key = (domain, H)
    out = _ACTION_CACHE.get(key)
    if out is not None:
        return out
    kind, axis, sign, k = _resolve_exact(domain, H)
    n = domain.points_per_axis
    s = domain.scaled_axis()
    if domain.dimension == 1:
        in_h = sign * s <= k
        mi = sign * k + (n - 1) - np.arange(n)
        valid = (mi >= 0) & (mi < n)
        mirror = np.clip(mi, 0, n - 1)
    elif kind == "axis":
        x1, x2 = np.meshgrid(s, s, indexing="ij")
        i1, i2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        coord = x1 if axis == 0 else x2
        in_h = (sign * coord <= k).ravel()
        m = sign * k + (n - 1) - (i1 if axis == 0 else i2)
        valid = ((m >= 0) & (m < n)).ravel()
        mc = np.clip(m, 0, n - 1)
        flat = (mc * n + i2) if axis == 0 else (i1 * n + mc)
        mirror = flat.ravel()
    else:
        sx, sy = sign
        x1, x2 = np.meshgrid(s, s, indexing="ij")
        i1, i2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        t = sx * x1 + sy * x2 - 2 * k
        in_h = (t <= 0).ravel()
        mi = i1 - (t // 2) * sx
        mj = i2 - (t // 2) * sy
        valid = ((mi >= 0) & (mi < n) & (mj >= 0) & (mj < n)).ravel()
        mirror = (np.clip(mi, 0, n - 1) * n + np.clip(mj, 0, n - 1)).ravel()
    out = (
        np.ascontiguousarray(in_h, dtype=np.uint8),
        np.ascontiguousarray(mirror, dtype=np.int64),
        np.ascontiguousarray(valid, dtype=np.uint8),
    )
    _ACTION_CACHE[key] = out
    return out


def polarizer_pool(domain):
    """All polarizers that act exactly on this grid, cached per domain.

    1D: both orientations, hyperplane positions k = 0 .. n-2 (node and
    midpoint). 2D adds both axes and the four node-aligned diagonal families.
    Positions with an empty complement are omitted; they act as the identity
    on |u|.
    """
    pool = _POOL_CACHE.get(domain)
    if pool is not None:
        return pool
    n = domain.points_per_axis
    h = domain.spacing
    items = []
    if domain.dimension == 1:
        for sign in (1, -1):
            for k in range(n - 1):
                items.append(Polarizer.axis(1, 0, sign, k * h / 2.0))
    else:
        for axis in (0, 1):
            for sign in (1, -1):
                for k in range(n - 1):
                    items.append(Polarizer.axis(2, axis, sign, k * h / 2.0))
        for sx in (1, -1):
            for sy in (1, -1):
                for k in range(n - 1):
                    items.append(Polarizer.diagonal(sx, sy, k * h / _SQ2))
    pool = tuple(items)
    _POOL_CACHE[domain] = pool
    return pool


def polarize_values(domain, values, H):
    """Raw-array polarization (always of the modulus)."""
    in_h, mirror, valid = _action(domain, H)
    return backend.polarize_values(values, in_h, mirror, valid)


def polarize(u, H):
    """Polarization u^H = |u|^H as a new GridFunction."""
    return u.with_values(polarize_values(u.domain, u.values, H))


def _shells(domain):
    """Node index groups by increasing distance from the origin."""
    sh = _SHELL_CACHE.get(domain)
    if sh is not None:
        return sh
    r2 = domain.radius_sq_scaled()
    order = []
    for rho in np.unique(r2):
        order.append(np.flatnonzero(r2 == rho))
    sh = tuple(order)
    _SHELL_CACHE[domain] = sh
    return sh


def schwarz_values(domain, values):
    """Raw-array Schwarz rearrangement; see schwarz()."""
    ranked = np.sort(np.abs(values))[::-1]
    out = np.empty(domain.size)
    pos = 0
    for idx in _shells(domain):
        c = idx.size
        out[idx] = ranked[pos:pos + c].mean()
        pos += c
    return out


def schwarz(u):
    """Discrete Schwarz rearrangement u*.

    Sorts the moduli in decreasing order and fills the radial shells from the
    center outward; a shell of cardinality c receives the mean of the next c
    values, so each shell is constant and the result is radially
    nonincreasing. On shells of size 1 this is the classical decreasing
    rearrangement; the mean on larger shells keeps u* radial.
    """
    return u.with_values(schwarz_values(u.domain, u.values))


def theta(u):
    """Modulus map theta(u) = |u|."""
    return u.with_values(np.abs(u.values))


@dataclass(frozen=True)
class PolarizerSequence:
    """A word of polarizers, applied left to right."""

    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def apply(self, u):
        for H in self.items:
            u = polarize(u, H)
        return u


@dataclass(frozen=True)
class SymmetrizationConfig:
    """Knobs for the greedy polarization loop.

    candidate_count polarizers are drawn per round; the best strictly
    improving one is applied. tolerance is the target V-distance to the
    Schwarz rearrangement, max_iterations caps the word length. p/pstar fix
    the V norm used for distances.
    """

    candidate_count: int = 32
    tolerance: float = 1e-3
    max_iterations: int = 500
    p: float = 2.0
    pstar: float = 4.0

    def __post_init__(self):
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 1 <= self.p < self.pstar:
            raise ValueError("need 1 <= p < pstar")


@dataclass(frozen=True)
class SymmetrizationResult:
    function: GridFunction
    word: PolarizerSequence
    distances: tuple
    reached: bool


def _vdist(cell, p, pstar, a, b):
    # V-distance between raw arrays under midpoint quadrature
    return max(
        (backend.pow_sum_diff(a, b, p) * cell) ** (1.0 / p),
        (backend.pow_sum_diff(a, b, pstar) * cell) ** (1.0 / pstar),
    )


def _greedy_improve(domain, state, dist_fn, apply_fn, cfg, rng):
    """Shared greedy core: repeatedly apply the best improving polarizer.

    state is mutated via apply_fn(state, H); dist_fn(state) is the objective.
    Returns (state, word, trace). A round first tries candidate_count random
    polarizers, then one exhaustive pool sweep; if nothing improves by more
    than 1e-15 the loop stalls and stops.
    """
    pool = polarizer_pool(domain)
    word = []
    d = dist_fn(state)
    trace = [d]
    for _ in range(cfg.max_iterations):
        if d <= cfg.tolerance:
            break
        draws = rng.integers(0, len(pool), size=cfg.candidate_count)
        best_h, best_d = None, d - 1e-15
        for ci in draws:
            Hc = pool[ci]
            dc = dist_fn(apply_fn(state, Hc, trial=True))
            if dc < best_d:
                best_h, best_d = Hc, dc
        if best_h is None:
            for Hc in pool:
                dc = dist_fn(apply_fn(state, Hc, trial=True))
                if dc < best_d:
                    best_h, best_d = Hc, dc
        if best_h is None:
            break
        state = apply_fn(state, best_h, trial=False)
        d = dist_fn(state)
        word.append(best_h)
        trace.append(d)
    return state, word, trace


def approximate_symmetrization(u, cfg=None, seed=0):
    """Drive u toward its Schwarz rearrangement by greedy polarization.

    Returns the polarized function, the word of applied polarizers, the
    V-distance trace, and whether the tolerance was reached. The distance
    sequence is nonincreasing by construction; the multiset of |u| values is
    preserved exactly at every step.
    """
    if cfg is None:
        cfg = SymmetrizationConfig()
    rng = np.random.default_rng(seed)
    domain = u.domain
    star = schwarz_values(domain, u.values)
    cell = domain.cell

    def dist_fn(w):
        return _vdist(cell, cfg.p, cfg.pstar, w, star)

    def apply_fn(w, H, trial):
        return polarize_values(domain, w, H)

    w0 = np.abs(u.values)
    w, word, trace = _greedy_improve(domain, w0, dist_fn, apply_fn, cfg, rng)
    return SymmetrizationResult(
        function=u.with_values(w),
        word=PolarizerSequence(tuple(word)),
        distances=tuple(trace),
        reached=trace[-1] <= cfg.tolerance,
    )


def approximate_curve(path, band_indices, H0, delta, cfg=None, seed=0):
    """Symmetrize a path of nonnegative functions with one shared word.

    Endpoints are polarized by H0 only; every interior node receives the same
    word, prefixed by H0, chosen greedily to bring all nodes listed in
    band_indices within V-distance delta of their individual Schwarz
    rearrangements. Returns a new Path; approx_failed is set when the target
    delta was not met. Energy levels along the path can only drop wherever
    the family satisfies the polarization inequality, which is what makes the
    shared word admissible.
    """
    from .minimax import Path

    if cfg is None:
        cfg = SymmetrizationConfig()
    nodes = [np.array(g.values, dtype=np.float64) for g in path.nodes]
    m = len(nodes)
    if m < 2:
        raise ValueError("path needs at least two nodes")
    for v in nodes:
        if v.min() < 0:
            raise ValueError("path nodes must be nonnegative")
    band = sorted(set(int(t) for t in band_indices))
    if not band:
        raise ValueError("band_indices must be nonempty")
    if band[0] < 1 or band[-1] > m - 2:
        raise ValueError("band_indices must be interior")
    domain = path.nodes[0].domain
    cell = domain.cell
    rng = np.random.default_rng(seed)

    nodes = [polarize_values(domain, v, H0) for v in nodes]
    stars = {t: schwarz_values(domain, nodes[t]) for t in band}
    interior = list(range(1, m - 1))

    def apply_fn(state, H, trial):
        if trial:
            # objective only looks at the band, so trials polarize just those
            out = dict(state)
            for t in band:
                out[t] = polarize_values(domain, state[t], H)
            return out
        out = dict(state)
        for t in interior:
            out[t] = polarize_values(domain, state[t], H)
        return out

    state = {t: nodes[t] for t in interior}

    def band_dist(st):
        return max(_vdist(cell, cfg.p, cfg.pstar, st[t], stars[t]) for t in band)

    run_cfg = cfg if cfg.tolerance == delta else SymmetrizationConfig(
        cfg.candidate_count, delta, cfg.max_iterations, cfg.p, cfg.pstar
    )
    state, word, trace = _greedy_improve(
        domain, state, band_dist, apply_fn, run_cfg, rng
    )
    failed = trace[-1] > delta
    out_nodes = [path.nodes[0].with_values(nodes[0])]
    for t in interior:
        out_nodes.append(path.nodes[0].with_values(state[t]))
    out_nodes.append(path.nodes[0].with_values(nodes[m - 1]))
    return (
        Path(
            nodes=tuple(out_nodes),
            family_tag=path.family_tag,
            approx_failed=failed,
        ),
        PolarizerSequence((H0,) + tuple(word)),
        tuple(trace),
    )
