"""Lambda scans and bounded Palais-Smale sequences at monotonicity points.

The pipeline: scan_c estimates the minimax level c(lambda) on an increasing
grid with warm starts (the reported table is exactly nonincreasing, which the
affine lambda-dependence of the energy justifies); select_denjoy_points picks
grid points whose left difference quotients stay bounded; extract_sbps turns
the ladder of paths below such a point lambda0 into a sequence u_j with

    |f(lambda0; u_j) - c| <= 2/j,   ||u_j||_X <= M + 2,
    slope(u_j) -> 0,                ||u_j - u_j*||_V -> 0,

i.e. a bounded Palais-Smale sequence of almost symmetric functions; and
refine_to_critical polishes a harvested u_j into a discrete critical point.
corollary2_sequence chains these along lambda_j -> 1.
"""

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import check_h3
from .minimax import (
    MinimaxConfig,
    Path,
    descend_path,
    make_initial_path,
    path_max,
    polyline_max,
    reparametrize_collapse,
)
from .rearrange import (
    SymmetrizationConfig,
    approximate_curve,
    approximate_symmetrization,
    origin_polarizer,
    polarize_values,
)


@dataclass(frozen=True)
class ScanConfig:
    """Grid, quotient, and harness knobs shared by scan/trick runs.

    lambda_grid must be strictly increasing inside the family interval.
    quotient_window left neighbors with difference quotient at most
    quotient_cap qualify a grid point for extraction. path_perturb is the
    (larger) initial-path noise used for ladders so the symmetrization decay
    has dynamic range; plain scans keep the minimax config's own perturb.
    """

    lambda_grid: tuple = tuple(np.linspace(0.5, 1.0, 8))
    restarts: int = 1
    quotient_window: int = 2
    quotient_cap: float = 10.0
    j_max: int = 16
    rung_depth: int = 4
    path_perturb: float = 0.08
    sym_candidates: int = 32
    sym_max_iterations: int = 600
    minimax: MinimaxConfig = MinimaxConfig()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "lambda_grid", tuple(float(x) for x in self.lambda_grid)
        )
        if self.restarts < 1 or self.j_max < 1 or self.rung_depth < 1:
            raise ValueError("counts must be positive")
        if self.quotient_window < 1 or self.quotient_cap <= 0:
            raise ValueError("bad quotient settings")
        if self.sym_candidates < 1 or self.sym_max_iterations < 1:
            raise ValueError("bad symmetrization settings")
        if self.path_perturb < 0:
            raise ValueError("path_perturb must be nonnegative")


@dataclass(frozen=True)
class ScanRow:
    lam: float
    c: float
    node_value: float
    argmax_index: int
    sweeps: int
    converged: bool
    dispersion: float
    failed: bool = False
    message: str = ""


@dataclass(frozen=True)
class ScanResult:
    rows: tuple
    quotients: tuple
    paths: dict = field(repr=False)

    def table(self):
        return [(r.lam, r.c) for r in self.rows if not r.failed]


def scan_c(fam, cfg, seed=None):
    """Estimate c(lambda) over cfg.lambda_grid, ascending with warm starts.

    Each point descends the previous final path (warm) plus restarts-1 cold
    paths and keeps the best; the reported c is the polyline maximum, clipped
    by the incoming path's level and the previous c, so the table is exactly
    nonincreasing (c is nonincreasing in lambda because B >= 0 and f is
    affine in lambda). A failed point is recorded and the chain restarts
    cold. quotients holds the left difference-quotient table feeding
    select_denjoy_points.
    """
    grid = cfg.lambda_grid
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid not strictly increasing")
    for lam in grid:
        fam.check_lambda(lam)
    if seed is None:
        seed = cfg.seed
    mcfg = cfg.minimax
    children = np.random.SeedSequence(seed).spawn(len(grid))
    rows = []
    paths = {}
    warm = None
    prev_c = np.inf
    for i, lam in enumerate(grid):
        try:
            cold_seeds = children[i].spawn(max(cfg.restarts, 1))
            results = []
            incoming = None
            if warm is not None:
                incoming = polyline_max(fam, lam, warm)
                results.append(descend_path(fam, lam, warm, mcfg))
            n_cold = cfg.restarts - (1 if warm is not None else 0)
            for r in range(max(n_cold, 0)):
                p = make_initial_path(fam, lam, mcfg, seed=cold_seeds[r])
                results.append(descend_path(fam, lam, p, mcfg))
            values = [res.value for res in results]
            best = int(np.argmin(values))
            res = results[best]
            c = polyline_max(fam, lam, res.path)
            if incoming is not None:
                c = min(c, incoming)
            c = min(c, prev_c)
            disp = 0.0
            if len(values) > 1:
                disp = (max(values) - min(values)) / max(abs(min(values)), 1e-300)
            rows.append(
                ScanRow(
                    lam=float(lam),
                    c=float(c),
                    node_value=res.value,
                    argmax_index=res.argmax_index,
                    sweeps=res.sweeps,
                    converged=res.converged,
                    dispersion=float(disp),
                )
            )
            paths[float(lam)] = res.path
            warm = res.path
            prev_c = c
        except RuntimeError as exc:
            rows.append(
                ScanRow(
                    lam=float(lam),
                    c=float("nan"),
                    node_value=float("nan"),
                    argmax_index=-1,
                    sweeps=0,
                    converged=False,
                    dispersion=0.0,
                    failed=True,
                    message=str(exc),
                )
            )
            warm = None
    quotients = []
    for i in range(len(rows)):
        if rows[i].failed:
            continue
        for k in range(1, cfg.quotient_window + 1):
            j = i - k
            if j < 0 or rows[j].failed:
                continue
            q = (rows[j].c - rows[i].c) / (rows[i].lam - rows[j].lam)
            quotients.append((rows[i].lam, rows[j].lam, float(max(q, 0.0))))
    return ScanResult(rows=tuple(rows), quotients=tuple(quotients), paths=paths)


@dataclass(frozen=True)
class DenjoyPoint:
    lambda0: float
    quotient_witness: float


def select_denjoy_points(result, cfg):
    """Grid points whose quotient_window left neighbors all have difference
    quotients at most quotient_cap; the witness is the largest of them.

    Almost every lambda admits such bounded quotients (the level is monotone,
    hence differentiable almost everywhere); the scan exposes the ones
    witnessed on this grid.
    """
    rows = result.rows
    out = []
    for i in range(len(rows)):
        if rows[i].failed or i < cfg.quotient_window:
            continue
        qs = []
        for k in range(1, cfg.quotient_window + 1):
            j = i - k
            if rows[j].failed:
                qs = None
                break
            qs.append(
                max(0.0, (rows[j].c - rows[i].c) / (rows[i].lam - rows[j].lam))
            )
        if qs is None:
            continue
        witness = max(qs)
        if witness <= cfg.quotient_cap:
            out.append(DenjoyPoint(lambda0=rows[i].lam, quotient_witness=witness))
    return out


@dataclass(frozen=True)
class SBPSRow:
    j: int
    lambda_h: float
    delta: float
    band_size: int
    word_length: int
    curve_failed: bool
    energy: float
    energy_gap: float
    slope: float
    xnorm: float
    asymmetry: float
    u_hash: str
    energy_ok: bool
    norm_ok: bool
    slope_ok: bool


@dataclass(frozen=True)
class PSReport:
    lambda0: float
    c_estimate: float
    a0: float
    omega: float
    norm_bound: float
    rung_lambdas: tuple
    rows: tuple
    asym_exponent: object
    energies_ok: bool
    norms_ok: bool
    slopes_ok: bool
    asym_ok: bool
    seed: int
    params: dict
    harvests: list = field(repr=False)

    def to_json_dict(self):
        d = {
            "lambda0": self.lambda0,
            "c_estimate": self.c_estimate,
            "a0": self.a0,
            "omega": self.omega,
            "norm_bound": self.norm_bound,
            "rung_lambdas": list(self.rung_lambdas),
            "asym_exponent": self.asym_exponent,
            "energies_ok": self.energies_ok,
            "norms_ok": self.norms_ok,
            "slopes_ok": self.slopes_ok,
            "asym_ok": self.asym_ok,
            "seed": self.seed,
            "params": self.params,
            "rows": [
                {
                    "j": r.j,
                    "lambda_h": r.lambda_h,
                    "delta": r.delta,
                    "band_size": r.band_size,
                    "word_length": r.word_length,
                    "curve_failed": r.curve_failed,
                    "energy": r.energy,
                    "energy_gap": r.energy_gap,
                    "slope": r.slope,
                    "xnorm": r.xnorm,
                    "asymmetry": r.asymmetry,
                    "u_hash": r.u_hash,
                    "energy_ok": r.energy_ok,
                    "norm_ok": r.norm_ok,
                    "slope_ok": r.slope_ok,
                }
                for r in self.rows
            ],
        }
        return d


SBPS_CSV_HEADER = (
    "lambda0,j,lambda_h,delta,energy,slope,xnorm,asymmetry,"
    "word_length,curve_failed,energy_ok,norm_ok,slope_ok,u_hash"
)


def sbps_csv_row(lambda0, r):
    return (
        "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s,%s,%s,%s"
        % (
            lambda0,
            r.j,
            r.lambda_h,
            r.delta,
            r.energy,
            r.slope,
            r.xnorm,
            r.asymmetry,
            r.word_length,
            str(r.curve_failed).lower(),
            str(r.energy_ok).lower(),
            str(r.norm_ok).lower(),
            str(r.slope_ok).lower(),
        )
        + ",%s" % r.u_hash
    )


def _hash_values(x):
    return hashlib.sha256(np.ascontiguousarray(x, dtype=np.float64).tobytes()).hexdigest()[:16]


def _ladder(fam, order, mcfg, seed):
    """Warm-start descent chain over ascending lambdas; returns levels and paths."""
    chat, paths = {}, {}
    warm = None
    for lam in order:
        p = warm if warm is not None else make_initial_path(fam, lam, mcfg, seed=seed)
        res = descend_path(fam, lam, p, mcfg)
        chat[lam] = polyline_max(fam, lam, res.path)
        paths[lam] = res.path
        warm = res.path
    return chat, paths


def extract_sbps(fam, lambda0, rung_lambdas, cfg, seed=None):
    """Bounded almost-symmetric Palais-Smale sequence at lambda0.

    For each j: take the deepest rung lambda_h with lambda0 - lambda_h <=
    1/j, move its descended path through the modulus, collapse the parameter
    interval (pinning the maximum), symmetrize the band of nodes near the
    level with one shared polarizer word to V-accuracy lambda0 - lambda_h,
    then run a budgeted descent at lambda0 (band 1/j, displacement budget
    sqrt(1/j), no redistribution) and harvest the maximal node u_j. The
    returned rows carry the per-j certificates; harvests holds the raw u_j
    arrays in order.
    """
    lambda0 = fam.check_lambda(lambda0)
    rungs = tuple(float(x) for x in rung_lambdas)
    if any(b <= a for a, b in zip(rungs, rungs[1:])):
        raise ValueError("rung lambdas must be strictly increasing")
    if not rungs or rungs[-1] >= lambda0:
        raise ValueError("rungs must sit strictly below lambda0")
    for lam in rungs:
        fam.check_lambda(lam)
    if seed is None:
        seed = cfg.seed
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    ladder_seed, curve_parent, sym_parent = ss.spawn(3)
    curve_seeds = curve_parent.spawn(cfg.j_max)
    sym_seeds = sym_parent.spawn(cfg.j_max)

    mcfg = replace(cfg.minimax, perturb=cfg.path_perturb)
    order = list(rungs) + [lambda0]
    chat, paths = _ladder(fam, order, mcfg, ladder_seed)
    c0 = chat[lambda0]
    end_raw = paths[lambda0].raw()[-1]
    a0 = max(fam.eval_raw(lambda0, fam.zero_raw()), fam.eval_raw(lambda0, end_raw))
    omega = (c0 - a0) / 4.0
    lo, hi = c0 - 3.0 * omega, c0 + omega

    probes = []
    for lam in rungs:
        _, arg = path_max(fam, lam, paths[lam])
        probes.append((lam, paths[lam].raw()[arg]))
    h3 = check_h3(fam, lambda0, probes)
    m_bound = h3.norm_bound

    on_grid = getattr(fam, "domain", None) is not None
    h0 = origin_polarizer(fam.domain.dimension) if on_grid else None

    rows = []
    harvests = []
    for j in range(1, cfg.j_max + 1):
        dj = 1.0 / j
        eligible = [r for r in rungs if lambda0 - r <= dj]
        lam_h = eligible[0] if eligible else rungs[-1]
        delta = lambda0 - lam_h

        gam = paths[lam_h].rewrap([np.abs(x) for x in paths[lam_h].raw()])
        gam = reparametrize_collapse(gam, fam, lambda0)
        raws = gam.raw()
        en0 = [fam.eval_raw(lambda0, x) for x in raws]
        band = [
            k for k in range(1, len(raws) - 1) if lo <= en0[k] <= hi
        ]
        word_length = 0
        curve_failed = False
        if on_grid:
            if band:
                scfg = SymmetrizationConfig(
                    candidate_count=cfg.sym_candidates,
                    tolerance=delta,
                    max_iterations=cfg.sym_max_iterations,
                )
                gam, word, _ = approximate_curve(
                    gam, band, h0, delta, scfg, seed=curve_seeds[j - 1]
                )
                word_length = len(word)
                curve_failed = gam.approx_failed
            else:
                gam = gam.rewrap(
                    [polarize_values(fam.domain, x, h0) for x in gam.raw()]
                )
                word_length = 1

        res = descend_path(
            fam,
            lambda0,
            gam,
            mcfg,
            band_width=dj,
            stall=dj / 8.0,
            max_sweeps=40,
            patience=1,
            cap_total=np.sqrt(dj),
        )
        uj = res.path.raw()[res.argmax_index]
        e = fam.eval_raw(lambda0, uj)
        slope = fam.slope_raw(lambda0, uj)
        xn = fam.xnorm_raw(uj)
        if on_grid:
            from .grid import GridFunction

            sym = approximate_symmetrization(
                GridFunction(fam.domain, np.abs(uj)),
                SymmetrizationConfig(
                    candidate_count=cfg.sym_candidates,
                    tolerance=min(1e-4, 1.0 / (10.0 * np.sqrt(j))),
                    max_iterations=cfg.sym_max_iterations,
                ),
                seed=sym_seeds[j - 1],
            )
            asym = fam.vnorm_raw(uj - sym.function.values)
        else:
            asym = fam.vnorm_raw(uj - fam.star_raw(uj))
        gap = abs(e - c0)
        rows.append(
            SBPSRow(
                j=j,
                lambda_h=lam_h,
                delta=delta,
                band_size=len(band),
                word_length=word_length,
                curve_failed=bool(curve_failed),
                energy=float(e),
                energy_gap=float(gap),
                slope=float(slope),
                xnorm=float(xn),
                asymmetry=float(asym),
                u_hash=_hash_values(uj),
                energy_ok=bool(gap <= 2.0 * dj),
                norm_ok=bool(xn <= m_bound + 2.0),
                slope_ok=bool(slope <= 10.0 * np.sqrt(dj)),
            )
        )
        harvests.append(uj)

    js = np.array([r.j for r in rows], dtype=float)
    asyms = np.array([r.asymmetry for r in rows])
    mask = asyms > 1e-14
    exponent = None
    if mask.sum() >= 3:
        A = np.vstack([np.log(js[mask]), np.ones(int(mask.sum()))]).T
        exponent = float(
            np.linalg.lstsq(A, np.log(asyms[mask]), rcond=None)[0][0]
        )
    return PSReport(
        lambda0=lambda0,
        c_estimate=float(c0),
        a0=float(a0),
        omega=float(omega),
        norm_bound=float(m_bound),
        rung_lambdas=rungs,
        rows=tuple(rows),
        asym_exponent=exponent,
        energies_ok=all(r.energy_ok for r in rows),
        norms_ok=all(r.norm_ok for r in rows),
        slopes_ok=all(r.slope_ok for r in rows),
        asym_ok=exponent is not None and exponent <= -0.4,
        seed=int(seed) if np.isscalar(seed) else 0,
        params=fam.params(),
        harvests=harvests,
    )


@dataclass(frozen=True)
class CriticalPointRecord:
    lam: float
    energy: float
    slope: float
    asymmetry: float
    xnorm: float
    iterations: int
    ok: bool
    message: str
    values: np.ndarray = field(repr=False)

    CSV_HEADER = "lambda,energy,slope,asymmetry,xnorm,iterations,ok"

    def csv_row(self):
        return "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%s" % (
            self.lam,
            self.energy,
            self.slope,
            self.asymmetry,
            self.xnorm,
            self.iterations,
            str(self.ok).lower(),
        )


def _reflection_average(domain, x):
    """Project onto the exactly reflection-symmetric subspace.

    1D: average with the mirror image; 2D: average over the dihedral group
    of the square. Near the radial critical point this moves x by at most
    its asymmetry, and it kills the component along the soft translation
    mode of the Hessian, which otherwise slows Newton to a crawl.
    """
    n = domain.points_per_axis
    if domain.dimension == 1:
        return 0.5 * (x + x[::-1])
    a = x.reshape(n, n)
    acc = (
        a
        + a[::-1, :]
        + a[:, ::-1]
        + a[::-1, ::-1]
        + a.T
        + a.T[::-1, :]
        + a.T[:, ::-1]
        + a.T[::-1, ::-1]
    )
    return (acc / 8.0).ravel()


def refine_to_critical(
    fam, lam, u_values, slope_tol=1e-8, sym_tol=1e-3, max_iterations=60, seed=0
):
    """Polish a near-critical function into a discrete critical point.

    Symmetrizes first: greedy polarization preserves the value multiset and
    removes the translational quasi-solutions that plain Newton converges to
    from asymmetric seeds, and the reflection average then places the seed
    exactly on the symmetric subspace, where the Hessian has no soft mode.
    Damped Newton follows, falling back to damped gradient descent when no
    Hessian is available. Failure to converge is reported in the record,
    never raised.
    """
    lam = fam.check_lambda(lam)
    x = np.abs(np.asarray(u_values, dtype=np.float64))
    if getattr(fam, "domain", None) is not None:
        from .grid import GridFunction

        res = approximate_symmetrization(
            GridFunction(fam.domain, x),
            SymmetrizationConfig(tolerance=1e-10, max_iterations=2000),
            seed=seed,
        )
        x = _reflection_average(fam.domain, res.function.values)
    message = "converged"
    ok = True
    it = 0
    for it in range(1, max_iterations + 1):
        slope = fam.slope_raw(lam, x)
        if slope <= slope_tol:
            break
        g = fam.grad_raw(lam, x)
        try:
            step = fam.hessian_solve(lam, x, g)
        except (NotImplementedError, RuntimeError):
            step = g
        gn = float(np.linalg.norm(g))
        t = 1.0
        accepted = False
        for _ in range(30):
            xn = x - t * step
            if np.all(np.isfinite(xn)):
                if float(np.linalg.norm(fam.grad_raw(lam, xn))) < gn:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            message = "stalled: no descent step"
            ok = False
            break
        x = xn
        if fam.xnorm_raw(x) > 1e6:
            message = "diverged"
            ok = False
            break
    slope = fam.slope_raw(lam, x)
    if ok and slope > slope_tol:
        ok = False
        message = "slope tolerance not met"
    if getattr(fam, "domain", None) is not None:
        from .grid import GridFunction

        res = approximate_symmetrization(
            GridFunction(fam.domain, np.abs(x)),
            SymmetrizationConfig(
                tolerance=min(1e-6, sym_tol), max_iterations=2000
            ),
            seed=seed + 1,
        )
        asym = fam.vnorm_raw(x - res.function.values)
    else:
        asym = fam.vnorm_raw(x - fam.star_raw(x))
    if asym > sym_tol:
        ok = False
        if message == "converged":
            message = "asymmetry tolerance not met"
    return CriticalPointRecord(
        lam=lam,
        energy=float(fam.eval_raw(lam, x)),
        slope=float(slope),
        asymmetry=float(asym),
        xnorm=float(fam.xnorm_raw(x)),
        iterations=it,
        ok=ok,
        message=message,
        values=x,
    )


@dataclass(frozen=True)
class Corollary2Report:
    lambdas: tuple
    records: tuple
    chain: tuple
    sup_xnorm: float
    all_ok: bool


def corollary2_sequence(fam, cfg, sigma=0.5, count=6, j_max=4, seed=0):
    """Critical points along the dyadic parameter sequence lambda_j -> 1.

    lambda_j = 1 - sigma * 2^(1-j). Each lambda_j gets its own rung ladder
    (depths rho * 2^-h with rho = min(sigma/2, lambda_j - lambda_min)), a
    short PS extraction, and a refinement of the deepest harvest. The chain
    rows certify ||u_j - u_j*||_V <= 2 ||u_j - v_j||_V with v_j the raw
    harvest, the discrete form of the symmetry-chaining estimate.
    """
    lam_min = fam.lambda_interval[0]
    lambdas = [1.0 - sigma * 2.0 ** (1 - j) for j in range(1, count + 1)]
    for lam in lambdas:
        fam.check_lambda(lam)
        if lam <= lam_min:
            raise ValueError("sequence leaves the lambda interval")
    children = np.random.SeedSequence(seed).spawn(count)
    records = []
    chain = []
    run_cfg = replace(cfg, j_max=j_max)
    for lam, child in zip(lambdas, children):
        rho = min(sigma / 2.0, lam - lam_min)
        rungs = [lam - rho * 2.0 ** (-h) for h in range(1, cfg.rung_depth + 1)]
        report = extract_sbps(fam, lam, rungs, run_cfg, seed=child)
        harvest = report.harvests[-1]
        rec = refine_to_critical(fam, lam, harvest, seed=int(child.entropy) % (2**31))
        records.append(rec)
        rhs = 2.0 * fam.vnorm_raw(rec.values - harvest)
        chain.append((lam, rec.asymmetry, rhs, rec.asymmetry <= rhs + 1e-9))
    sup_xnorm = max(r.xnorm for r in records)
    return Corollary2Report(
        lambdas=tuple(lambdas),
        records=tuple(records),
        chain=tuple(chain),
        sup_xnorm=float(sup_xnorm),
        all_ok=all(r.ok for r in records) and all(c[3] for c in chain),
    )
