"""Command line entry points.

Subcommands: symmetrize (greedy polarization of a grid function from CSV),
scan (c(lambda) table), trick (full scan -> monotonicity points -> PS
extraction -> critical point refinement), check (validator and property
sweep). Configuration is a strict JSON file: unknown keys are rejected,
missing keys take defaults. All runs are deterministic for a fixed seed; CSV
floats are written with %.17g so repeated runs are byte identical.

Exit codes: 0 success, 2 configuration or input error, 3 internal failure
(a validator or run that did not reach its contract).
"""

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .energy import EnergySpec, LambdaFamily, PurePower, Surrogate, check_h3, check_h4
from .grid import Domain, GridFunction, embed_constant, lp_norm, sobolev_seminorm
from .minimax import MinimaxConfig, StepRule, descend_path, make_initial_path
from .rearrange import (
    SymmetrizationConfig,
    approximate_symmetrization,
    polarize,
    polarizer_pool,
    schwarz,
)
from .trick import (
    SBPS_CSV_HEADER,
    CriticalPointRecord,
    ScanConfig,
    corollary2_sequence,
    extract_sbps,
    refine_to_critical,
    sbps_csv_row,
    scan_c,
    select_denjoy_points,
)


class ConfigError(Exception):
    pass


DEFAULTS = {
    "seed": 0,
    "output_dir": "sympass_out",
    "domain": {"dimension": 1, "half_width": 8.0, "points_per_axis": 129},
    "energy": {"p": 2.0, "q": 4.0, "lambda_interval": [0.25, 1.5]},
    "minimax": {
        "m_nodes": 65,
        "descent_steps": 2,
        "stall_tolerance": 1e-6,
        "max_sweeps": 2500,
        "patience": 40,
        "band_width": 0.05,
        "cap_fraction": 0.5,
        "perturb": 0.02,
        "step_rule": {
            "initial": 1.0,
            "shrink": 0.5,
            "sufficient_decrease": 1e-4,
            "max_backtracks": 40,
        },
    },
    "symmetrize": {
        "candidate_count": 32,
        "tolerance": 1e-3,
        "max_iterations": 500,
    },
    "scan": {
        "lambda_grid": [float(x) for x in np.linspace(0.5, 1.0, 8)],
        "restarts": 1,
        "quotient_window": 2,
        "quotient_cap": 10.0,
        "j_max": 16,
        "rung_depth": 4,
        "path_perturb": 0.08,
        "sym_candidates": 32,
        "sym_max_iterations": 600,
    },
}


def _merge_strict(base, override, prefix=""):
    for key, val in override.items():
        if key not in base:
            raise ConfigError("unknown config key: %s%s" % (prefix, key))
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError("config key %s%s must be an object" % (prefix, key))
            _merge_strict(base[key], val, prefix + key + ".")
        else:
            base[key] = val


def load_config(path):
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config: %s" % exc)
        if not isinstance(user, dict):
            raise ConfigError("config root must be an object")
        _merge_strict(cfg, user)
    return cfg


def build_domain(cfg):
    d = cfg["domain"]
    try:
        return Domain(int(d["dimension"]), float(d["half_width"]), int(d["points_per_axis"]))
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_family(cfg, surrogate=False):
    if surrogate:
        return Surrogate()
    e = cfg["energy"]
    try:
        spec = EnergySpec(
            p=float(e["p"]),
            q=float(e["q"]),
            lambda_interval=tuple(e["lambda_interval"]),
        )
        return LambdaFamily(spec, build_domain(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_minimax(cfg):
    m = cfg["minimax"]
    s = m["step_rule"]
    try:
        return MinimaxConfig(
            m_nodes=int(m["m_nodes"]),
            descent_steps=int(m["descent_steps"]),
            step_rule=StepRule(
                initial=float(s["initial"]),
                shrink=float(s["shrink"]),
                sufficient_decrease=float(s["sufficient_decrease"]),
                max_backtracks=int(s["max_backtracks"]),
            ),
            stall_tolerance=float(m["stall_tolerance"]),
            max_sweeps=int(m["max_sweeps"]),
            patience=int(m["patience"]),
            band_width=float(m["band_width"]),
            cap_fraction=float(m["cap_fraction"]),
            perturb=float(m["perturb"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_scan(cfg):
    s = cfg["scan"]
    try:
        return ScanConfig(
            lambda_grid=tuple(s["lambda_grid"]),
            restarts=int(s["restarts"]),
            quotient_window=int(s["quotient_window"]),
            quotient_cap=float(s["quotient_cap"]),
            j_max=int(s["j_max"]),
            rung_depth=int(s["rung_depth"]),
            path_perturb=float(s["path_perturb"]),
            sym_candidates=int(s["sym_candidates"]),
            sym_max_iterations=int(s["sym_max_iterations"]),
            minimax=build_minimax(cfg),
            seed=int(cfg["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def build_sym(cfg):
    s = cfg["symmetrize"]
    try:
        return SymmetrizationConfig(
            candidate_count=int(s["candidate_count"]),
            tolerance=float(s["tolerance"]),
            max_iterations=int(s["max_iterations"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def resolve_outdir(cfg):
    out = os.environ.get("SYMPASS_OUTPUT") or cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    return out


def write_lines(path, lines):
    with open(path, "w") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def write_grid_csv(path, u):
    d = u.domain
    lines = [
        "dimension,%d" % d.dimension,
        "n,%d" % d.points_per_axis,
        "L,%.17g" % d.half_width,
    ]
    lines.extend("%.17g" % v for v in u.values)
    write_lines(path, lines)


def read_grid_csv(path):
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise ConfigError("cannot read grid function: %s" % exc)
    meta = {}
    for ln in lines[:3]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ConfigError("bad grid csv header line: %r" % ln)
        meta[parts[0]] = parts[1]
    for key in ("dimension", "n", "L"):
        if key not in meta:
            raise ConfigError("grid csv missing header key %r" % key)
    try:
        dom = Domain(int(meta["dimension"]), float(meta["L"]), int(meta["n"]))
        vals = np.array([float(x) for x in lines[3:]])
        return GridFunction(dom, vals)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _fmt_polarizer(step, H):
    comps = ",".join("%.17g" % c for c in H.normal)
    return "%d,%s,%.17g" % (step, comps, H.offset)


def cmd_symmetrize(args, cfg):
    u = read_grid_csv(args.input)
    scfg = build_sym(cfg)
    seed = cfg["seed"] if args.seed is None else args.seed
    res = approximate_symmetrization(u, scfg, seed=seed)
    out = resolve_outdir(cfg)
    write_grid_csv(os.path.join(out, "u_star.csv"), res.function)
    if u.domain.dimension == 1:
        head = "step,n1,offset"
    else:
        head = "step,n1,n2,offset"
    write_lines(
        os.path.join(out, "word.csv"),
        [head] + [_fmt_polarizer(i, H) for i, H in enumerate(res.word)],
    )
    write_lines(
        os.path.join(out, "trace.csv"),
        ["step,distance"]
        + ["%d,%.17g" % (i, d) for i, d in enumerate(res.distances)],
    )
    print(
        "symmetrize: reached=%s steps=%d distance=%.6g -> %s"
        % (str(res.reached).lower(), len(res.word), res.distances[-1], out)
    )
    return 0


SCAN_CSV_HEADER = (
    "lambda,c,node_value,argmax_index,sweeps,converged,dispersion,failed"
)


def _scan_rows(result):
    rows = []
    for r in result.rows:
        rows.append(
            "%.17g,%.17g,%.17g,%d,%d,%s,%.17g,%s"
            % (
                r.lam,
                r.c,
                r.node_value,
                r.argmax_index,
                r.sweeps,
                str(r.converged).lower(),
                r.dispersion,
                str(r.failed).lower(),
            )
        )
    return rows


def cmd_scan(args, cfg):
    fam = build_family(cfg, surrogate=args.surrogate)
    scfg = build_scan(cfg)
    seed = scfg.seed if args.seed is None else args.seed
    result = scan_c(fam, scfg, seed=seed)
    out = resolve_outdir(cfg)
    write_lines(
        os.path.join(out, "c_of_lambda.csv"), [SCAN_CSV_HEADER] + _scan_rows(result)
    )
    dat = ["# lambda c"]
    for lam, c in result.table():
        dat.append("%.17g %.17g" % (lam, c))
    write_lines(os.path.join(out, "c_of_lambda.dat"), dat)
    write_lines(
        os.path.join(out, "quotients.csv"),
        ["lambda,lambda_left,quotient"]
        + ["%.17g,%.17g,%.17g" % q for q in result.quotients],
    )
    n_fail = sum(1 for r in result.rows if r.failed)
    print(
        "scan: %d points, %d failed -> %s"
        % (len(result.rows), n_fail, out)
    )
    if n_fail == len(result.rows):
        return 3
    return 0


def _trick_rungs(lambda0, lam_min, depth):
    rho = min(0.25, lambda0 - lam_min)
    return [lambda0 - rho * 2.0 ** (-h) for h in range(1, depth + 1)]


def _trick_one(payload):
    cfg, surrogate, lambda0, seed = payload
    fam = build_family(cfg, surrogate=surrogate)
    scfg = build_scan(cfg)
    rungs = _trick_rungs(lambda0, fam.lambda_interval[0], scfg.rung_depth)
    report = extract_sbps(fam, lambda0, rungs, scfg, seed=seed)
    best = int(np.argmin([r.energy_gap for r in report.rows]))
    record = refine_to_critical(
        fam, lambda0, report.harvests[best], seed=seed + 1
    )
    return report, record


def cmd_trick(args, cfg):
    fam = build_family(cfg, surrogate=args.surrogate)
    scfg = build_scan(cfg)
    seed = scfg.seed if args.seed is None else args.seed
    result = scan_c(fam, scfg, seed=seed)
    points = select_denjoy_points(result, scfg)
    out = resolve_outdir(cfg)
    write_lines(
        os.path.join(out, "c_of_lambda.csv"), [SCAN_CSV_HEADER] + _scan_rows(result)
    )
    payloads = [
        (cfg, args.surrogate, p.lambda0, seed * 1000003 + 17 * i)
        for i, p in enumerate(points)
    ]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            outcomes = list(ex.map(_trick_one, payloads))
    else:
        outcomes = [_trick_one(p) for p in payloads]
    sbps_rows = []
    crit_rows = []
    summary = []
    all_ok = True
    for point, (report, record) in zip(points, outcomes):
        lam0 = point.lambda0
        with open(os.path.join(out, "psreport_%.6f.json" % lam0), "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        sbps_rows.extend(sbps_csv_row(lam0, r) for r in report.rows)
        crit_rows.append(record.csv_row())
        write_grid_csv_or_scalar(
            os.path.join(out, "critical_point_%.6f.csv" % lam0), fam, record.values
        )
        ok = (
            report.energies_ok
            and report.norms_ok
            and report.slopes_ok
            and record.ok
        )
        all_ok = all_ok and ok
        summary.append(
            "lambda0=%.6f quotient=%.4g energies=%s norms=%s slopes=%s "
            "asym_exponent=%s refine=%s"
            % (
                lam0,
                point.quotient_witness,
                report.energies_ok,
                report.norms_ok,
                report.slopes_ok,
                "%.3f" % report.asym_exponent
                if report.asym_exponent is not None
                else "n/a",
                record.ok,
            )
        )
    write_lines(os.path.join(out, "sbps.csv"), [SBPS_CSV_HEADER] + sbps_rows)
    write_lines(
        os.path.join(out, "critical_points.csv"),
        [CriticalPointRecord.CSV_HEADER] + crit_rows,
    )
    if not summary:
        summary = ["no monotonicity points selected"]
    write_lines(os.path.join(out, "summary.txt"), summary)
    for line in summary:
        print(line)
    print("trick: %d points -> %s" % (len(points), out))
    return 0


def write_grid_csv_or_scalar(path, fam, values):
    if getattr(fam, "domain", None) is not None:
        write_grid_csv(path, GridFunction(fam.domain, values))
    else:
        write_lines(path, ["dimension,0", "n,1", "L,0"] + ["%.17g" % values[0]])


def cmd_check(args, cfg):
    fam = build_family(cfg, surrogate=False)
    dom = fam.domain
    seed = cfg["seed"] if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    pool = polarizer_pool(dom)
    lines = []
    ok_all = True

    def report(name, ok, detail):
        nonlocal ok_all
        ok_all = ok_all and ok
        lines.append("%s %s: %s" % ("PASS" if ok else "FAIL", name, detail))

    p, q = fam.spec.p, fam.spec.q
    k_embed = embed_constant(dom, p, q, trials=200, seed=seed)
    worst = 0.0
    for _ in range(200):
        u = GridFunction(dom, rng.standard_normal(dom.size))
        from .grid import sobolev_full_norm, v_norm

        xn = sobolev_full_norm(u, p)
        if xn > 0:
            worst = max(worst, v_norm(u, p, q) / xn)
    report("H1 embedding", worst <= k_embed, "K=%.4g, worst ratio %.4g" % (k_embed, worst))

    lam_mid = 0.5 * sum(fam.lambda_interval)
    mcfg = build_minimax(cfg)
    path = make_initial_path(fam, lam_mid, mcfg, seed=seed)
    res = descend_path(fam, lam_mid, path, mcfg, max_sweeps=300)
    a0 = max(
        fam.eval_raw(lam_mid, fam.zero_raw()),
        fam.eval_raw(lam_mid, path.raw()[-1]),
    )
    report(
        "H2 geometry",
        res.value > a0 + 1e-6,
        "c~%.4g > endpoints %.4g at lambda=%.3g" % (res.value, a0, lam_mid),
    )

    lo, hi = fam.lambda_interval
    probes = []
    for _ in range(100):
        x = rng.standard_normal(dom.size)
        lam_h = rng.uniform(lo, lam_mid - 1e-6)
        probes.append((lam_h, x))
    h3 = check_h3(fam, lam_mid, probes)
    report(
        "H3 affine quotient",
        h3.quotient_ok,
        "max rel err %.3g, witnessed M=%.4g" % (h3.quotient_max_error, h3.norm_bound),
    )

    h4 = check_h4(fam, trials=2000, seed=seed)
    report(
        "H4 polarization",
        h4.passed,
        "max excess %.3g over %d trials" % (h4.max_excess, h4.trials),
    )

    worst = 0.0
    for _ in range(500):
        u = rng.standard_normal(dom.size)
        v = rng.standard_normal(dom.size)
        H = pool[rng.integers(0, len(pool))]
        pu = polarize(GridFunction(dom, u), H)
        pv = polarize(GridFunction(dom, v), H)
        for pp in (p, q):
            d_after = lp_norm(GridFunction(dom, pu.values - pv.values), pp)
            d_before = lp_norm(GridFunction(dom, np.abs(u) - np.abs(v)), pp)
            worst = max(worst, d_after - d_before)
    report("contractivity", worst <= 1e-12, "max excess %.3g over 500 pairs" % worst)

    bad = 0
    for _ in range(500):
        u = rng.standard_normal(dom.size)
        H = pool[rng.integers(0, len(pool))]
        pu = polarize(GridFunction(dom, u), H)
        if not np.array_equal(np.sort(pu.values), np.sort(np.abs(u))):
            bad += 1
    report("multiset", bad == 0, "%d mismatches in 500 trials" % bad)

    bad = 0
    for _ in range(300):
        u = GridFunction(dom, rng.standard_normal(dom.size))
        H = pool[rng.integers(0, len(pool))]
        once = polarize(u, H)
        if not np.array_equal(polarize(once, H).values, once.values):
            bad += 1
        if not np.array_equal(schwarz(once).values, schwarz(u).values):
            bad += 1
    report("idempotence+schwarz", bad == 0, "%d violations in 300 trials" % bad)

    worst = 0.0
    for _ in range(300):
        u = GridFunction(dom, rng.standard_normal(dom.size))
        H = pool[rng.integers(0, len(pool))]
        worst = max(
            worst, sobolev_seminorm(polarize(u, H), p) - sobolev_seminorm(u, p)
        )
    report("seminorm inequality", worst <= 1e-9, "max excess %.3g" % worst)

    out = resolve_outdir(cfg)
    write_lines(os.path.join(out, "check.txt"), lines)
    for line in lines:
        print(line)
    return 0 if ok_all else 3


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sympass",
        description="Symmetric minimax runs on centered grids.",
    )
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for trick")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sym = sub.add_parser("symmetrize", help="greedy symmetrization of a grid function")
    p_sym.add_argument("input", help="grid function CSV")

    p_scan = sub.add_parser("scan", help="estimate c(lambda) over the grid")
    p_scan.add_argument("--surrogate", action="store_true")

    p_trick = sub.add_parser("trick", help="scan, select points, extract PS data")
    p_trick.add_argument("--surrogate", action="store_true")

    sub.add_parser("check", help="run the validators and property suites")

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "symmetrize":
            return cmd_symmetrize(args, cfg)
        if args.command == "scan":
            return cmd_scan(args, cfg)
        if args.command == "trick":
            return cmd_trick(args, cfg)
        return cmd_check(args, cfg)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure contract
        print("internal error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
