"""Timing harness for the hot kernels: compiled backend vs plain numpy.

Runs the multistep recurrence and the RK4 reference integrator on random
SPD quadratics at a few sizes and reports the per-call median over several
repeats.  Useful for checking that the compiled path actually pays off on
a given machine before trusting GRADFLOW_BACKEND=auto.

    python3 benchmarks/bench_kernels.py --dims 4,16,64 --steps 2000
"""

import argparse
import statistics
import time

import numpy as np

from gradflow import kernels


def spd(dim, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    return M @ M.T + dim * np.eye(dim), rng.standard_normal(dim)


def median_time(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def bench_lmm(dim, steps, repeats):
    A, b = spd(dim, 0)
    h = 0.5 / np.linalg.eigvalsh(A).max()
    rho = np.array([0.25, -1.25, 1.0])
    sigma = np.array([0.0, 0.75])
    starts = np.random.default_rng(1).standard_normal((2, dim))
    args = (rho, sigma, h, A, b, starts, steps, 1e100)
    compiled = median_time(lambda: kernels.lmm_quadratic(*args), repeats)
    plain = median_time(lambda: kernels.lmm_quadratic_numpy(*args), repeats)
    return compiled, plain


def bench_rk4(dim, steps, repeats):
    A, b = spd(dim, 2)
    h = 0.25 / np.linalg.eigvalsh(A).max()
    x0 = np.random.default_rng(3).standard_normal(dim)
    compiled = median_time(lambda: kernels.rk4_quadratic(A, b, x0, h, steps), repeats)
    plain = median_time(
        lambda: kernels.rk4_quadratic_numpy(A, b, x0, h, steps), repeats
    )
    return compiled, plain


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="4,16,64", help="comma-separated problem sizes")
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args()
    dims = [int(s) for s in args.dims.split(",") if s.strip()]

    print(f"backend: {kernels.backend()}")
    kernels.warm_up()

    header = f"{'kernel':<6} {'dim':>5} {'steps':>7} {'backend ms':>11} {'numpy ms':>9} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, bench in (("lmm", bench_lmm), ("rk4", bench_rk4)):
        for dim in dims:
            compiled, plain = bench(dim, args.steps, args.repeats)
            print(
                f"{name:<6} {dim:>5} {args.steps:>7} "
                f"{1e3 * compiled:>11.3f} {1e3 * plain:>9.3f} "
                f"{plain / compiled:>7.1f}x"
            )


if __name__ == "__main__":
    main()
