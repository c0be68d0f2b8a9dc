"""Timing comparison of the compiled and pure-Python kernel backends.

Runs the three hot kernels (flat and row-indexed categorical sampling,
greedy coincidence matching) on both backends over a range of sizes and
prints per-call times with the compiled speedup.  Outputs are also
cross-checked, so a benchmark run doubles as an equivalence smoke test.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 1e4,1e5,1e6] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from eraserlab._kernels import pure

try:
    from eraserlab._kernels import _core
except ImportError:
    _core = None


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(name: str, make_args, run, sizes, repeats: int) -> None:
    print(f"\n{name}")
    print(f"  {'n':>10} {'python':>12} {'cython':>12} {'speedup':>9}")
    for n in sizes:
        args = make_args(n)
        t_py = best_of(lambda: run(pure, *args), repeats)
        if _core is None:
            print(f"  {n:>10} {t_py * 1e3:>10.3f}ms {'—':>12} {'—':>9}")
            continue
        t_cy = best_of(lambda: run(_core, *args), repeats)
        out_py = run(pure, *args)
        out_cy = run(_core, *args)
        for a, b in zip(np.atleast_1d(out_py), np.atleast_1d(out_cy)):
            np.testing.assert_array_equal(a, b)
        print(f"  {n:>10} {t_py * 1e3:>10.3f}ms {t_cy * 1e3:>10.3f}ms"
              f" {t_py / t_cy:>8.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1e4,1e5,1e6",
                        help="comma-separated input sizes")
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many timings")
    args = parser.parse_args()
    sizes = [int(float(s)) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if _core is None:
        print("compiled extension not built; timing the pure backend only")

    def cat_args(n):
        cdf = np.cumsum(rng.dirichlet(np.ones(5)))
        cdf[-1] = 1.0
        return cdf, rng.random(n)

    def rows_args(n):
        cdf_rows = np.cumsum(rng.dirichlet(np.ones(5), size=4), axis=1)
        cdf_rows[:, -1] = 1.0
        return cdf_rows, rng.integers(0, 4, size=n), rng.random(n)

    def match_args(n):
        # two click streams at mean rate 1/s with a 0.25 s pairing window
        return (np.sort(rng.random(n) * n), np.sort(rng.random(n) * n), 0.25)

    bench_case("categorical_sample (5 outcomes)", cat_args,
               lambda impl, cdf, u: impl.categorical_sample(cdf, u),
               sizes, args.repeats)
    bench_case("categorical_sample_rows (4x5 table)", rows_args,
               lambda impl, c, r, u: impl.categorical_sample_rows(c, r, u),
               sizes, args.repeats)
    bench_case("match_nearest (dense streams)", match_args,
               lambda impl, tu, tl, w: impl.match_nearest(tu, tl, w),
               sizes, args.repeats)


if __name__ == "__main__":
    main()
