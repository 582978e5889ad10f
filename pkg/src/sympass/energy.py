"""Parametrized energy functionals on symmetric grids.

A family is the map lambda -> f(lambda; u) = A(u) - lambda * B(u), affine in
lambda by construction, with

    A(u) = sum_E j(u, |grad_h u|) h^N  +  (1/p) sum |u|^p h^N,
    B(u) = (1/q) sum kappa(|x|) |u|^q h^N,

where the kinetic sum runs over the zero-extended node set E (both ghost
edges in 1D, the low-side ghost layer in 2D) and j is either the pure power
t^p / p or a weighted power omega(|s|) t^p / p with alpha0 <= omega <= alpha1.
kappa is a radial weight; it must be nonincreasing for the polarization
inequality (H4) to hold, which check_h4 verifies empirically rather than by
construction. Gradients are analytic; the weak slope uses the Riesz
representative in the discrete H^1 inner product when p = 2 and falls back to
the Euclidean gradient norm otherwise (see slope_metric).

The model problem is p = 2, q = 4, kappa = 1: the discrete -u'' + u =
lambda u^3 with zero boundary trace.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded, solveh_banded

from . import backend
from .grid import Domain, GridFunction


@dataclass(frozen=True)
class PurePower:
    """Kinetic integrand j(s, t) = t^p / p."""


@dataclass(frozen=True)
class WeightedPower:
    """Kinetic integrand j(s, t) = omega(|s|) t^p / p.

    omega and omega_prime take the nonnegative argument r = |s|; omega must
    stay within [alpha0, alpha1] with alpha0 > 0 (checked on the node radii
    at family construction) and should be nonincreasing, like kappa.
    """

    omega: object
    omega_prime: object
    alpha0: float
    alpha1: float

    def __post_init__(self):
        if not 0 < self.alpha0 <= self.alpha1:
            raise ValueError("need 0 < alpha0 <= alpha1")


@dataclass(frozen=True)
class EnergySpec:
    """Exponents, lambda window, kinetic kind, and the weight kappa.

    Requires p >= 2 and q > p; for the grid dimensions supported here
    (N <= 2 <= p) every q > p is subcritical, so no upper bound on q is
    enforced. kappa is a callable of the radius or None for the constant 1.
    """

    p: float = 2.0
    q: float = 4.0
    lambda_interval: tuple = (0.25, 1.5)
    j_kind: object = PurePower()
    kappa: object = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be at least 2")
        if not self.q > self.p:
            raise ValueError("need q > p")
        lo, hi = self.lambda_interval
        if not 0 < lo < hi:
            raise ValueError("lambda_interval must be 0 < lo < hi")
        if not isinstance(self.j_kind, (PurePower, WeightedPower)):
            raise ValueError("j_kind must be PurePower or WeightedPower")
        object.__setattr__(self, "lambda_interval", (float(lo), float(hi)))


class LambdaFamily:
    """f(lambda; .) on a fixed Domain, for lambda inside EnergySpec.lambda_interval."""

    def __init__(self, spec, domain):
        self.spec = spec
        self.domain = domain
        radii = domain.node_radii()
        if spec.kappa is None:
            self.kappa_values = np.ones(domain.size)
        else:
            kv = np.asarray(spec.kappa(radii), dtype=np.float64)
            kv = np.broadcast_to(kv, (domain.size,)).copy()
            if not np.all(np.isfinite(kv)) or kv.min() <= 0:
                raise ValueError("kappa must be positive and finite")
            self.kappa_values = kv
        jk = spec.j_kind
        if isinstance(jk, WeightedPower):
            probe = np.unique(np.concatenate([radii, [0.0]]))
            wv = np.asarray(jk.omega(probe), dtype=np.float64)
            if wv.min() < jk.alpha0 - 1e-12 or wv.max() > jk.alpha1 + 1e-12:
                raise ValueError("omega out of [alpha0, alpha1]")
        self._fast = (
            spec.p == 2.0
            and isinstance(jk, PurePower)
            and domain.dimension == 1
        )
        self._riesz_1d = None
        self._riesz_2d = None

    # -- lambda bookkeeping ------------------------------------------------

    @property
    def lambda_interval(self):
        return self.spec.lambda_interval

    def check_lambda(self, lam):
        lo, hi = self.spec.lambda_interval
        if not (lo - 1e-12 <= lam <= hi + 1e-12):
            raise ValueError("lambda out of range")
        return float(lam)

    # -- kinetic geometry on the zero-extended node set ---------------------

    def _edges_1d(self, x):
        h = self.domain.spacing
        ext = np.zeros(x.size + 2)
        ext[1:-1] = x
        d = np.diff(ext)
        return ext[:-1], np.abs(d) / h, d

    def _edges_2d(self, x):
        n = self.domain.points_per_axis
        h = self.domain.spacing
        a = np.zeros((n + 2, n + 2))
        a[1:-1, 1:-1] = x.reshape(n, n)
        dxx = (a[1:, :] - a[:-1, :])[:, :-1] / h
        dyy = (a[:, 1:] - a[:, :-1])[:-1, :] / h
        mag = np.sqrt(dxx * dxx + dyy * dyy)
        return a[:-1, :-1], mag, dxx, dyy

    def _omega_at(self, s_abs):
        jk = self.spec.j_kind
        if isinstance(jk, PurePower):
            return None
        return np.asarray(jk.omega(s_abs), dtype=np.float64)

    # -- raw-array interface -------------------------------------------------

    def a_raw(self, x):
        p = self.spec.p
        cell = self.domain.cell
        if self._fast:
            h = self.domain.spacing
            return 0.5 * backend.kinetic_sum_1d(x, 2.0) / h + 0.5 * h * float(x @ x)
        if self.domain.dimension == 1:
            s, t, _ = self._edges_1d(x)
            w = self._omega_at(np.abs(s))
            tp = t ** p
            kin = np.sum(tp) if w is None else np.sum(w * tp)
            kin *= self.domain.spacing / p
        else:
            s, mag, _, _ = self._edges_2d(x)
            w = self._omega_at(np.abs(s))
            tp = mag ** p
            kin = np.sum(tp) if w is None else np.sum(w * tp)
            kin *= cell / p
        return kin + cell / p * backend.pow_sum(x, p)

    def b_raw(self, x):
        q = self.spec.q
        return self.domain.cell / q * float(np.sum(self.kappa_values * np.abs(x) ** q))

    def eval_raw(self, lam, x):
        lam = self.check_lambda(lam)
        if self._fast:
            return backend.eval_p2_1d(
                x, self.domain.spacing, lam, self.spec.q, self.kappa_values
            )
        return self.a_raw(x) - lam * self.b_raw(x)

    def grad_raw(self, lam, x):
        lam = self.check_lambda(lam)
        if self._fast:
            return backend.grad_p2_1d(
                x, self.domain.spacing, lam, self.spec.q, self.kappa_values
            )
        p, q = self.spec.p, self.spec.q
        jk = self.spec.j_kind
        h = self.domain.spacing
        cell = self.domain.cell
        if self.domain.dimension == 1:
            s, t, d = self._edges_1d(x)
            w = self._omega_at(np.abs(s))
            phi = t ** (p - 1.0) * np.sign(d)
            if w is not None:
                phi = w * phi
            g = phi[:-1] - phi[1:]
            if w is not None:
                wp = np.asarray(jk.omega_prime(np.abs(x)), dtype=np.float64)
                g = g + (h / p) * wp * np.sign(x) * t[1:] ** p
        else:
            s, mag, dxx, dyy = self._edges_2d(x)
            w = self._omega_at(np.abs(s))
            big = mag ** (p - 2.0) if p != 2.0 else 1.0
            W = big if w is None else w * big
            fx = W * dxx
            fy = W * dyy
            g = h * (fx[:-1, 1:] - fx[1:, 1:] + fy[1:, :-1] - fy[1:, 1:])
            if w is not None:
                wp = np.asarray(
                    jk.omega_prime(np.abs(x)), dtype=np.float64
                ).reshape(g.shape)
                xs = x.reshape(g.shape)
                g = g + (cell / p) * wp * np.sign(xs) * mag[1:, 1:] ** p
            g = g.ravel()
        mass = cell * np.abs(x) ** (p - 2.0) * x if p != 2.0 else cell * x
        nonlin = lam * cell * self.kappa_values * np.abs(x) ** (q - 2.0) * x
        return g + mass - nonlin

    # -- weak slope ----------------------------------------------------------

    @property
    def slope_metric(self):
        """"riesz-h1" when the slope is the dual norm in discrete H^1 (p = 2);
        "euclidean" otherwise, where it is only a crude surrogate."""
        return "riesz-h1" if self.spec.p == 2.0 else "euclidean"

    def _riesz_solve(self, g):
        n = self.domain.points_per_axis
        h = self.domain.spacing
        if self.domain.dimension == 1:
            if self._riesz_1d is None:
                ab = np.zeros((2, n))
                ab[0, 1:] = -1.0 / h
                ab[1, :] = 2.0 / h + h
                self._riesz_1d = ab
            return solveh_banded(self._riesz_1d, g)
        if self._riesz_2d is None:
            from scipy.sparse import identity, kron
            from scipy.sparse import diags
            from scipy.sparse.linalg import factorized

            one = diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
            eye = identity(n)
            lap = kron(one, eye) + kron(eye, one)
            A = (lap + (h * h) * identity(n * n)).tocsc()
            self._riesz_2d = factorized(A)
        return self._riesz_2d(g)

    def slope_raw(self, lam, x):
        g = self.grad_raw(lam, x)
        if self.spec.p != 2.0:
            return float(np.linalg.norm(g))
        z = self._riesz_solve(g)
        return float(np.sqrt(max(float(g @ z), 0.0)))

    def hessian_solve(self, lam, x, rhs):
        """Solve (d^2 f) delta = rhs; p = 2 with PurePower only."""
        lam = self.check_lambda(lam)
        if self.spec.p != 2.0 or not isinstance(self.spec.j_kind, PurePower):
            raise NotImplementedError("hessian available for p = 2 pure power")
        n = self.domain.points_per_axis
        h = self.domain.spacing
        q = self.spec.q
        diag_nl = lam * (q - 1.0) * self.kappa_values * np.abs(x) ** (q - 2.0)
        if self.domain.dimension == 1:
            ab = np.zeros((3, n))
            ab[0, 1:] = -1.0 / h
            ab[2, :-1] = -1.0 / h
            ab[1, :] = 2.0 / h + h * (1.0 - diag_nl)
            return solve_banded((1, 1), ab, rhs)
        from scipy.sparse import diags, identity, kron
        from scipy.sparse.linalg import spsolve

        one = diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
        eye = identity(n)
        lap = (kron(one, eye) + kron(eye, one)) / (h * h)
        H = ((lap + identity(n * n) - diags(diag_nl)) * (h * h)).tocsc()
        return spsolve(H, rhs)

    # -- norms and seed profiles ----------------------------------------------

    def xnorm_raw(self, x):
        from .grid import sobolev_full_norm

        return sobolev_full_norm(GridFunction(self.domain, x), self.spec.p)

    def vnorm_raw(self, x):
        p = self.spec.p
        ps = self.spec.q
        cell = self.domain.cell
        return max(
            (backend.pow_sum(x, p) * cell) ** (1.0 / p),
            (backend.pow_sum(x, ps) * cell) ** (1.0 / ps),
        )

    def star_raw(self, x):
        from .rearrange import schwarz_values

        return schwarz_values(self.domain, x)

    def bump_raw(self):
        return 1.0 / np.cosh(self.domain.node_radii())

    def zero_raw(self):
        return np.zeros(self.domain.size)

    # -- GridFunction-facing wrappers ------------------------------------------

    def _vals(self, u):
        if u.domain != self.domain:
            raise ValueError("function lives on a different domain")
        if not np.all(np.isfinite(u.values)):
            raise ValueError("non-finite input")
        return u.values

    def evaluate(self, lam, u):
        return self.eval_raw(lam, self._vals(u))

    def a_part(self, u):
        return self.a_raw(self._vals(u))

    def b_part(self, u):
        return self.b_raw(self._vals(u))

    def gradient(self, lam, u):
        return u.with_values(self.grad_raw(lam, self._vals(u)))

    def weak_slope(self, lam, u):
        return self.slope_raw(lam, self._vals(u))

    def params(self):
        jk = self.spec.j_kind
        return {
            "p": self.spec.p,
            "q": self.spec.q,
            "lambda_interval": list(self.spec.lambda_interval),
            "j_kind": type(jk).__name__,
            "weighted_kappa": self.spec.kappa is not None,
            "dimension": self.domain.dimension,
            "points_per_axis": self.domain.points_per_axis,
            "half_width": self.domain.half_width,
            "slope_metric": self.slope_metric,
        }


class Surrogate:
    """Scalar polynomial stand-in family: f(lambda; x) = x^2/2 - lambda x^4/4.

    Shares the raw-array protocol of LambdaFamily on arrays of length 1, so
    the minimax and scan machinery runs unchanged; the mountain pass level is
    exactly 1/(4 lambda), which makes it the calibration family.
    """

    def __init__(self, lambda_interval=(0.1, 4.0)):
        lo, hi = lambda_interval
        if not 0 < lo < hi:
            raise ValueError("lambda_interval must be 0 < lo < hi")
        self._interval = (float(lo), float(hi))
        self.domain = None
        self.spec = None

    @property
    def lambda_interval(self):
        return self._interval

    @property
    def slope_metric(self):
        return "euclidean"

    def check_lambda(self, lam):
        lo, hi = self._interval
        if not (lo - 1e-12 <= lam <= hi + 1e-12):
            raise ValueError("lambda out of range")
        return float(lam)

    def a_raw(self, x):
        return 0.5 * float(x[0]) ** 2

    def b_raw(self, x):
        return 0.25 * float(x[0]) ** 4

    def eval_raw(self, lam, x):
        lam = self.check_lambda(lam)
        return self.a_raw(x) - lam * self.b_raw(x)

    def grad_raw(self, lam, x):
        lam = self.check_lambda(lam)
        v = float(x[0])
        return np.array([v - lam * v ** 3])

    def slope_raw(self, lam, x):
        return float(np.abs(self.grad_raw(lam, x)[0]))

    def hessian_solve(self, lam, x, rhs):
        lam = self.check_lambda(lam)
        d = 1.0 - 3.0 * lam * float(x[0]) ** 2
        if abs(d) < 1e-14:
            raise RuntimeError("singular hessian")
        return rhs / d

    def xnorm_raw(self, x):
        return float(np.abs(x[0]))

    def vnorm_raw(self, x):
        return float(np.abs(x[0]))

    def star_raw(self, x):
        return np.abs(x)

    def bump_raw(self):
        return np.array([1.0])

    def zero_raw(self):
        return np.array([0.0])

    def exact_c(self, lam):
        return 1.0 / (4.0 * self.check_lambda(lam))

    def params(self):
        return {
            "surrogate": True,
            "lambda_interval": list(self._interval),
            "slope_metric": self.slope_metric,
        }


@dataclass(frozen=True)
class H4Report:
    trials: int
    theta_trials: int
    max_excess: float
    violations: tuple
    passed: bool


def check_h4(fam, trials=10000, seed=0, tol=1e-9):
    """Empirical polarization inequality check.

    Draws nonnegative functions, admissible polarizers, and lambdas, and
    verifies f(lambda; u^H) <= f(lambda; u) + tol; also checks the modulus
    inequality f(lambda; |u|) <= f(lambda; u) on signed draws. Families with
    a radially increasing kappa fail this check, which is the intended way
    to detect them.
    """
    from .rearrange import polarize_values, polarizer_pool

    rng = np.random.default_rng(seed)
    pool = polarizer_pool(fam.domain)
    lo, hi = fam.lambda_interval
    worst = 0.0
    violations = []
    for trial in range(trials):
        u = np.abs(rng.standard_normal(fam.domain.size))
        H = pool[rng.integers(0, len(pool))]
        lam = rng.uniform(lo, hi)
        before = fam.eval_raw(lam, u)
        after = fam.eval_raw(lam, polarize_values(fam.domain, u, H))
        excess = after - before
        worst = max(worst, excess)
        if excess > tol:
            violations.append((trial, float(excess)))
    theta_trials = max(1, trials // 10)
    for trial in range(theta_trials):
        u = rng.standard_normal(fam.domain.size)
        lam = rng.uniform(lo, hi)
        excess = fam.eval_raw(lam, np.abs(u)) - fam.eval_raw(lam, u)
        worst = max(worst, excess)
        if excess > tol:
            violations.append((trials + trial, float(excess)))
    return H4Report(
        trials=trials,
        theta_trials=theta_trials,
        max_excess=float(worst),
        violations=tuple(violations[:32]),
        passed=not violations,
    )


@dataclass(frozen=True)
class H3Report:
    rows: tuple
    quotient_max_error: float
    quotient_ok: bool
    b_bound: float
    f_max: float
    norm_bound: float


def check_h3(fam, lam0, probes, tol=1e-9):
    """Affinity-in-lambda identity and a witnessed norm bound.

    probes is a list of (lambda_h, x) pairs, typically near-maximizers from
    a ladder of parameters below lam0. The difference quotient
    (f(lambda_h; x) - f(lam0; x)) / (lam0 - lambda_h) must equal B(x)
    exactly (up to roundoff tol) because f is affine in lambda. The returned
    norm_bound M is the coercivity bound [p (f_max + lam0 C) / min(alpha0,
    1)]^(1/p) with C = max B(x); any Palais-Smale sequence at levels below
    f_max stays inside the X-ball of radius M.
    """
    lam0 = fam.check_lambda(lam0)
    rows = []
    worst = 0.0
    c_bound = 0.0
    f_max = 0.0
    for lam_h, x in probes:
        lam_h = fam.check_lambda(lam_h)
        if lam_h == lam0:
            raise ValueError("probe lambda must differ from lam0")
        b = fam.b_raw(x)
        quot = (fam.eval_raw(lam_h, x) - fam.eval_raw(lam0, x)) / (lam0 - lam_h)
        err = abs(quot - b) / max(1.0, abs(b))
        worst = max(worst, err)
        c_bound = max(c_bound, b)
        f_max = max(f_max, fam.eval_raw(lam_h, x))
        rows.append((float(lam_h), float(b), float(quot), float(err)))
    spec = fam.spec
    if spec is None:
        p, alpha0 = 2.0, 1.0
    else:
        p = spec.p
        jk = spec.j_kind
        alpha0 = jk.alpha0 if isinstance(jk, WeightedPower) else 1.0
    m = (p * (f_max + lam0 * c_bound) / min(alpha0, 1.0)) ** (1.0 / p)
    return H3Report(
        rows=tuple(rows),
        quotient_max_error=float(worst),
        quotient_ok=worst <= tol,
        b_bound=float(c_bound),
        f_max=float(f_max),
        norm_bound=float(m),
    )
