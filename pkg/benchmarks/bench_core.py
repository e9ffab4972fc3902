"""Compare the compiled kernel core against the numpy fallback.

    python benchmarks/bench_core.py [--sizes 250 500 1000 2000] [--d 10] [--repeat 5]

Times ``rbf_aggregates`` (Gram matrix plus derivative sums) and the full
``stein_hessian_diag`` for each backend and reports the best of ``--repeat``.
"""
import argparse
import time

import numpy as np

from score_dag import kernel, stein


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--d", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"] + (["compiled"] if kernel._core is not None else [])
    if len(backends) == 1:
        print("compiled core not built; timing the numpy fallback only")
    print(f"{'n':>6} {'backend':>9} {'aggregates ms':>14} {'hessian ms':>11} {'max |diff|':>11}")
    rng = np.random.default_rng(0)
    for n in args.sizes:
        X = rng.standard_normal((n, args.d))
        s = kernel.median_bandwidth(X)
        ref = kernel.rbf_aggregates(X, s, "numpy")
        for b in backends:
            t_agg = best_time(lambda: kernel.rbf_aggregates(X, s, b), args.repeat)
            out = kernel.rbf_aggregates(X, s, b)
            diff = max(float(np.max(np.abs(a - r))) for a, r in zip(out, ref))
            saved = kernel.BACKEND
            kernel.BACKEND = b
            try:
                t_hess = best_time(lambda: stein.stein_hessian_diag(X), args.repeat)
            finally:
                kernel.BACKEND = saved
            print(f"{n:>6} {b:>9} {1e3 * t_agg:>14.1f} {1e3 * t_hess:>11.1f} {diff:>11.1e}")


if __name__ == "__main__":
    main()
