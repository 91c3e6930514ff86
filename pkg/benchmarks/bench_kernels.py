"""Throughput of the compiled run loop against the pure-Python steps.

    python benchmarks/bench_kernels.py [--evaluations N] [--repeat K]

Each case runs one optimizer on a fixed budget (no early stop: the start is
a local optimum the budget cannot escape, or the function is large) and
reports evaluations per second for both backends plus the speedup. The two
backends are also checked to return the same outcome.
"""
import argparse
import time

import numpy as np

from sdfea.algorithms import AlgorithmSpec, compiled_available, run_optimizer
from sdfea.fitness import Jump, LeadingOnes, OneMax

CASES = [
    ("sd-fea", OneMax(2000)),
    ("sd-fea", LeadingOnes(1000)),
    ("sd-fea", Jump(100, 8, 4)),
    ("oea", Jump(100, 8, 4)),
    ("fea", Jump(100, 8, 4)),
    ("sd-oea", Jump(100, 8, 4)),
    ("sd-rls-r", Jump(100, 8, 4)),
]


def timed(alg, f, budget, backend, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = run_optimizer(alg, f, budget, 7, backend=backend)
        best = min(best, time.perf_counter() - t)
    return out, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--evaluations", type=int, default=20000,
                    help="budget per Python run; compiled runs get 50x")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not compiled_available():
        raise SystemExit("compiled extension not built; reinstall without SDFEA_NO_EXTENSION")

    print(f"{'algorithm':<10} {'function':<24} {'python ev/s':>12} {'compiled ev/s':>14} {'speedup':>8}")
    for name, f in CASES:
        alg = AlgorithmSpec(name).build(f.n)
        py_out, py_t = timed(alg, f, args.evaluations, "python", args.repeat)
        c_out, _ = timed(alg, f, args.evaluations, "compiled", 1)
        assert (c_out.evaluations, c_out.final_fitness) == (py_out.evaluations, py_out.final_fitness)
        assert np.array_equal(c_out.final_point, py_out.final_point)
        big = 50 * args.evaluations
        c_big, c_t = timed(alg, f, big, "compiled", args.repeat)
        py_rate = py_out.evaluations / py_t
        c_rate = c_big.evaluations / c_t
        print(f"{name:<10} {f!r:<24} {py_rate:>12,.0f} {c_rate:>14,.0f} {c_rate / py_rate:>7.0f}x")


if __name__ == "__main__":
    main()
