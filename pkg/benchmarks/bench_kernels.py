"""Compare the compiled kernels against the numpy reference implementations.

Runs every kernel on both backends at a few grid sizes and reports the
speedup. Import of the compiled module is direct, so this works regardless
of which backend the package itself selected. An end-to-end descent timing
at the default scan settings closes the table.

    python3 benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from sympass import Domain, EnergySpec, LambdaFamily, MinimaxConfig
from sympass import _kernels_py as ref
from sympass.minimax import descend_path, make_initial_path
from sympass.rearrange import _action, polarizer_pool

try:
    from sympass import _kernels as ext
except ImportError:
    ext = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeats):
    rows = []
    for n in (65, 129, 257, 1025):
        rng = np.random.default_rng(n)
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        kappa = np.ones(n)
        dom = Domain(1, 8.0, n)
        H = polarizer_pool(dom)[3]
        in_h, mirror, valid = _action(dom, H)
        cases = [
            ("pow_sum p=4", lambda m: m.pow_sum(u, 4.0)),
            ("pow_sum_diff p=2", lambda m: m.pow_sum_diff(u, v, 2.0)),
            ("kinetic_sum_1d p=2", lambda m: m.kinetic_sum_1d(u, 2.0)),
            ("eval_p2_1d", lambda m: m.eval_p2_1d(u, 0.125, 1.0, 4.0, kappa)),
            ("grad_p2_1d", lambda m: m.grad_p2_1d(u, 0.125, 1.0, 4.0, kappa)),
            ("polarize_values", lambda m: m.polarize_values(u, in_h, mirror, valid)),
        ]
        for name, call in cases:
            t_ref = best_of(lambda: call(ref), repeats)
            t_ext = best_of(lambda: call(ext), repeats) if ext else float("nan")
            rows.append((name, n, 1e6 * t_ref, 1e6 * t_ext))
    return rows


def bench_descent():
    out = []
    fam = LambdaFamily(EnergySpec(), Domain(1, 8.0, 129))
    cfg = MinimaxConfig()
    path = make_initial_path(fam, 1.0, cfg, seed=0)
    t0 = time.perf_counter()
    res = descend_path(fam, 1.0, path, cfg)
    out.append(("descend_path n=129 (selected backend)", time.perf_counter() - t0, res.sweeps))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=200)
    args = ap.parse_args()

    print("compiled extension:", "present" if ext else "NOT BUILT (numpy only)")
    print()
    print("%-22s %6s %12s %12s %9s" % ("kernel", "n", "numpy [us]", "cython [us]", "speedup"))
    for name, n, t_ref, t_ext in bench_kernels(args.repeats):
        speed = t_ref / t_ext if ext else float("nan")
        print("%-22s %6d %12.2f %12.2f %8.1fx" % (name, n, t_ref, t_ext, speed))
    print()
    for label, dt, sweeps in bench_descent():
        print("%s: %.2fs (%d sweeps)" % (label, dt, sweeps))


if __name__ == "__main__":
    main()
