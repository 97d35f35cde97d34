"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_backends.py [--sizes 16 32 64 128] [--repeat 200]

Prints one row per (routine, N) with the median time per call for each
backend and their ratio. Also times the naive kernel estimator, which is the
baseline the matrix path replaces during training.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from meelab import _fallback, entropy

try:
    from meelab import _kernels
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None


def median_time(fn, repeat: int) -> float:
    fn()  # warm-up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128])
    parser.add_argument("--dim", type=int, default=1)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")

    print(f"{'routine':<18}{'N':>5}{'numpy us':>12}{'compiled us':>14}{'ratio':>8}")
    rng = np.random.default_rng(0)
    for n in args.sizes:
        e = np.ascontiguousarray(rng.standard_normal((n, args.dim)))
        sigma = entropy.median_bandwidth(e)
        cases = {
            "pairwise_sq_dists": (lambda m: lambda: m.pairwise_sq_dists(e)),
            "gram_matrix": (lambda m: lambda: m.gram_matrix(e, sigma)),
            "matrix_mee": (lambda m: lambda: m.matrix_mee(e, sigma)),
        }
        for name, make in cases.items():
            t_np = median_time(make(_fallback), args.repeat)
            if _kernels is None:
                print(f"{name:<18}{n:>5}{t_np * 1e6:>12.1f}{'-':>14}{'-':>8}")
                continue
            t_c = median_time(make(_kernels), args.repeat)
            print(f"{name:<18}{n:>5}{t_np * 1e6:>12.1f}{t_c * 1e6:>14.1f}{t_np / t_c:>8.2f}")
        t_k = median_time(lambda: entropy.kernel_mee(e, sigma), max(1, args.repeat // 10))
        print(f"{'kernel_mee (loop)':<18}{n:>5}{t_k * 1e6:>12.1f}{'-':>14}{'-':>8}")


if __name__ == "__main__":
    main()
