"""Admissible paths and the descent-based minimax estimate.

A path joins the zero function to a point of negative energy; the mountain
pass level at parameter lambda is estimated by sweeping gradient descent over
the path nodes near the current maximum until the maximum stalls. Sweeps are
Jacobi-style: the band, the segment caps, and the neighbor geometry are all
frozen at the pre-sweep state, so node updates within a sweep are order
independent. The running maximum of the best path seen so far is
nonincreasing by construction.

Families enter through a small raw-array protocol (eval_raw, grad_raw,
xnorm_raw, bump_raw, ...) implemented by both the grid families in the energy
module and the scalar surrogate, so everything here is family agnostic.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class StepRule:
    """Backtracking line search: start at initial, shrink until the Armijo
    test f(x - t g) <= f(x) - sufficient_decrease * t * |g|^2 passes."""

    initial: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 40

    def __post_init__(self):
        if self.initial <= 0 or not 0 < self.shrink < 1:
            raise ValueError("bad step rule")
        if self.sufficient_decrease <= 0 or self.max_backtracks < 1:
            raise ValueError("bad step rule")


@dataclass(frozen=True)
class MinimaxConfig:
    """Path discretization and sweep control.

    m_nodes path nodes; each sweep runs descent_steps backtracking steps on
    every node whose energy is within band_width of the pre-sweep maximum. A
    node's displacement per sweep is capped at cap_fraction times its shorter
    adjacent pre-sweep segment (X norm). The run stops once the best maximum
    has not dropped by stall_tolerance for patience consecutive sweeps, or at
    max_sweeps. perturb sets the relative amplitude of the noise added to the
    interior of fresh initial paths.
    """

    m_nodes: int = 65
    descent_steps: int = 2
    step_rule: StepRule = StepRule()
    stall_tolerance: float = 1e-6
    max_sweeps: int = 2500
    patience: int = 40
    band_width: float = 0.05
    cap_fraction: float = 0.5
    perturb: float = 0.02

    def __post_init__(self):
        if self.m_nodes < 3:
            raise ValueError("m_nodes must be >= 3")
        if self.descent_steps < 1 or self.max_sweeps < 1 or self.patience < 1:
            raise ValueError("counts must be positive")
        if self.stall_tolerance <= 0 or self.band_width <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.cap_fraction <= 1:
            raise ValueError("cap_fraction must be in (0, 1]")
        if self.perturb < 0:
            raise ValueError("perturb must be nonnegative")


@dataclass(frozen=True)
class Path:
    """Immutable node sequence; nodes are GridFunctions (or bare arrays for
    the scalar surrogate). approx_failed marks a failed curve symmetrization."""

    nodes: tuple
    family_tag: str = "generic"
    approx_failed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 2:
            raise ValueError("path needs at least two nodes")

    def __len__(self):
        return len(self.nodes)

    def raw(self):
        return [
            np.array(getattr(u, "values", u), dtype=np.float64, copy=True)
            for u in self.nodes
        ]

    def rewrap(self, raws, approx_failed=None):
        t = self.nodes[0]
        if hasattr(t, "with_values"):
            new = tuple(t.with_values(v) for v in raws)
        else:
            new = tuple(np.asarray(v, dtype=np.float64) for v in raws)
        return Path(
            new,
            self.family_tag,
            self.approx_failed if approx_failed is None else approx_failed,
        )


@dataclass(frozen=True)
class MPEstimate:
    """Minimax estimate at one lambda. value is the maximum of f over the
    path nodes (the polyline between nodes can only exceed it by the segment
    sampling gap; scan_c reports that refinement separately)."""

    lam: float
    value: float
    argmax_index: int
    sweeps: int
    converged: bool
    path: Path
    restart_id: int = 0
    restart_values: tuple = ()

    CSV_HEADER = "lambda,value,argmax_index,sweeps,converged,restart_id"

    def csv_row(self):
        return "%.17g,%.17g,%d,%d,%s,%d" % (
            self.lam,
            self.value,
            self.argmax_index,
            self.sweeps,
            str(self.converged).lower(),
            self.restart_id,
        )

    @property
    def dispersion(self):
        if len(self.restart_values) < 2:
            return 0.0
        lo = min(self.restart_values)
        hi = max(self.restart_values)
        return (hi - lo) / max(abs(lo), 1e-300)


def make_initial_path(fam, lam, cfg, seed=0):
    """Straight segment from 0 to a scaled bump with negative energy.

    The bump is doubled until its energy at lam goes negative, tightened
    back down geometrically, then stretched by 1.1 for margin. Interior nodes
    get iid zero-mean noise of amplitude cfg.perturb * max|v|, which breaks
    the symmetry of the initial path without biasing it.
    """
    lam = fam.check_lambda(lam)
    v = fam.bump_raw()
    t = 1.0
    found = False
    for _ in range(60):
        if fam.eval_raw(lam, t * v) < 0:
            found = True
            break
        t *= 2.0
    if not found:
        raise RuntimeError("cannot find negative endpoint")
    while fam.eval_raw(lam, 0.55 * t * v) < 0:
        t *= 0.55
    v = 1.1 * t * v
    m = cfg.m_nodes
    raws = [s * v for s in np.linspace(0.0, 1.0, m)]
    if cfg.perturb > 0:
        rng = np.random.default_rng(seed)
        amp = cfg.perturb * float(np.max(np.abs(v)))
        for k in range(1, m - 1):
            raws[k] = raws[k] + amp * rng.standard_normal(v.size)
    if getattr(fam, "domain", None) is not None:
        from .grid import GridFunction

        nodes = tuple(GridFunction(fam.domain, x) for x in raws)
    else:
        nodes = tuple(raws)
    return Path(nodes, family_tag="negative-endpoint")


def path_max(fam, lam, path):
    """Maximum of f(lam; .) over the path nodes and the first index attaining it."""
    vals = [fam.eval_raw(lam, x) for x in path.raw()]
    arg = int(np.argmax(vals))
    return float(vals[arg]), arg


def polyline_max(fam, lam, path, probes=(0.25, 0.5, 0.75), refine_top=3):
    """Maximum of f along the piecewise-linear interpolant of the path.

    Every segment is probed at a few interior points; the most promising
    segments get a bounded scalar maximization. Never below the node maximum.
    """
    raws = path.raw()
    m = len(raws)
    vals = [fam.eval_raw(lam, x) for x in raws]
    segbest = []
    for i in range(m - 1):
        a, b = raws[i], raws[i + 1]
        best = max(vals[i], vals[i + 1])
        for t in probes:
            best = max(best, fam.eval_raw(lam, (1 - t) * a + t * b))
        segbest.append(best)
    out = max(vals)
    for i in np.argsort(segbest)[::-1][:refine_top]:
        a, b = raws[i], raws[i + 1]
        r = minimize_scalar(
            lambda t: -fam.eval_raw(lam, (1 - t) * a + t * b),
            bounds=(0.0, 1.0),
            method="bounded",
            options={"xatol": 1e-10},
        )
        out = max(out, -float(r.fun), segbest[i])
    return float(out)


def _redistribute(fam, raws):
    """Arc-length reparametrization (X norm); endpoints stay put."""
    m = len(raws)
    seg = np.array([fam.xnorm_raw(raws[i + 1] - raws[i]) for i in range(m - 1)])
    tot = float(seg.sum())
    if tot <= 0:
        return raws
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    out = [raws[0]]
    for t in np.linspace(0.0, tot, m)[1:-1]:
        j = min(max(int(np.searchsorted(cum, t, side="right")) - 1, 0), m - 2)
        w = (t - cum[j]) / max(seg[j], 1e-300)
        out.append((1 - w) * raws[j] + w * raws[j + 1])
    out.append(raws[-1])
    return out


@dataclass(frozen=True)
class DescentResult:
    path: Path
    value: float
    argmax_index: int
    converged: bool
    sweeps: int
    history: tuple


def descend_path(
    fam,
    lam,
    path,
    cfg,
    band_width=None,
    stall=None,
    max_sweeps=None,
    patience=None,
    cap_total=None,
    redistribute=None,
):
    """Monotone band descent of the path maximum.

    Per sweep, every interior node within band_width of the pre-sweep
    maximum takes cfg.descent_steps backtracking gradient steps, displaced at
    most cap_fraction times its shorter adjacent segment (and at most its
    remaining cap_total budget, when one is set). Unless disabled, nodes are
    then redistributed by arc length; redistribution defaults to off exactly
    when a total budget is in force, since it would spend the budgetless
    nodes' positions. Returns the best path seen, its node maximum, and
    whether the stall test converged before max_sweeps.
    """
    lam = fam.check_lambda(lam)
    band = cfg.band_width if band_width is None else float(band_width)
    stall = cfg.stall_tolerance if stall is None else float(stall)
    sweeps_cap = cfg.max_sweeps if max_sweeps is None else int(max_sweeps)
    patience = cfg.patience if patience is None else int(patience)
    if redistribute is None:
        redistribute = cap_total is None
    rule = cfg.step_rule

    raws = path.raw()
    m = len(raws)
    if float(np.max(np.abs(raws[0]))) != 0.0:
        raise RuntimeError("path must start at the zero function")
    if fam.eval_raw(lam, raws[-1]) >= 0:
        raise RuntimeError("path endpoint energy must be negative")

    en = np.array([fam.eval_raw(lam, u) for u in raws])
    best_raws = [u.copy() for u in raws]
    best_val = float(en.max())
    best_arg = int(en.argmax())
    history = [best_val]
    budget = None if cap_total is None else np.full(m, float(cap_total))
    flat = 0
    sweeps = 0
    converged = False
    while sweeps < sweeps_cap:
        sweeps += 1
        m0 = en.max()
        seg = np.array([fam.xnorm_raw(raws[i + 1] - raws[i]) for i in range(m - 1)])
        for k in range(1, m - 1):
            if en[k] < m0 - band:
                continue
            cap = cfg.cap_fraction * min(seg[k - 1], seg[k])
            if budget is not None:
                cap = min(cap, budget[k])
            if cap <= 0:
                continue
            u, fu = raws[k], en[k]
            disp = 0.0
            for _ in range(cfg.descent_steps):
                g = fam.grad_raw(lam, u)
                gn2 = float(g @ g)
                if gn2 == 0.0:
                    break
                gx = fam.xnorm_raw(g)
                t = min(rule.initial, (cap - disp) / gx) if gx > 0 else rule.initial
                if t <= 0:
                    break
                ok = False
                for _ in range(rule.max_backtracks):
                    cand = u - t * g
                    fc = fam.eval_raw(lam, cand)
                    if fc <= fu - rule.sufficient_decrease * t * gn2:
                        ok = True
                        break
                    t *= rule.shrink
                if not ok:
                    break
                disp += t * gx
                u, fu = cand, fc
            raws[k], en[k] = u, fu
            if budget is not None:
                budget[k] -= disp
        if redistribute:
            raws = _redistribute(fam, raws)
            en = np.array([fam.eval_raw(lam, u) for u in raws])
        cur = float(en.max())
        if cur < best_val - stall:
            best_raws = [u.copy() for u in raws]
            best_val, best_arg = cur, int(en.argmax())
            flat = 0
        else:
            if cur < best_val:
                best_raws = [u.copy() for u in raws]
                best_val, best_arg = cur, int(en.argmax())
            flat += 1
            if flat >= patience:
                converged = True
                break
        history.append(best_val)
    return DescentResult(
        path=path.rewrap(best_raws),
        value=best_val,
        argmax_index=best_arg,
        converged=converged,
        sweeps=sweeps,
        history=tuple(history),
    )


def mountain_pass_value(fam, lam, cfg, restarts=1, seed=0):
    """Best-of-restarts minimax estimate with independent initial paths."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(restarts)
    results = []
    for child in children:
        p = make_initial_path(fam, lam, cfg, seed=child)
        results.append(descend_path(fam, lam, p, cfg))
    values = tuple(r.value for r in results)
    best = int(np.argmin(values))
    r = results[best]
    return MPEstimate(
        lam=float(lam),
        value=r.value,
        argmax_index=r.argmax_index,
        sweeps=r.sweeps,
        converged=r.converged,
        path=r.path,
        restart_id=best,
        restart_values=values,
    )


def reparametrize_collapse(path, fam=None, lam=None):
    """Squeeze the parameter interval: theta(t) = clip((t - 1/4) / (1/2), 0, 1).

    Keeps the node count; node i of the result is node round(theta(t_i) *
    (m-1)) of the input, so the first and last quarters collapse onto the
    endpoints. When fam and lam are given, the input's argmax node is pinned
    into the output (replacing the nearest selected index) so the collapse
    never drops the maximum.
    """
    m = len(path)
    t = np.linspace(0.0, 1.0, m)
    idx = np.rint(np.clip((t - 0.25) / 0.5, 0.0, 1.0) * (m - 1)).astype(int)
    if fam is not None and lam is not None:
        _, arg = path_max(fam, lam, path)
        if arg not in idx:
            j = int(np.argmin(np.abs(idx - arg)))
            idx[j] = arg
            idx = np.sort(idx)
    return Path(
        tuple(path.nodes[i] for i in idx),
        family_tag=path.family_tag,
        approx_failed=path.approx_failed,
    )
