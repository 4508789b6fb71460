"""Compare the compiled and numpy triple-correlation kernels.

    python3 benchmarks/bench_scan.py [--sizes 4096 65536 262144] [--threads 1 8] [--repeat 3]

Prints one row per (N, backend, threads) with the best wall time and the
speedup over numpy. Both backends are checked for identical counts.
"""

import argparse
import time

import numpy as np

from recurlab import kernels


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[4096, 65536, 1 << 18])
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 8])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'N':>8} {'backend':>9} {'threads':>7} {'seconds':>9} {'speedup':>8}")
    for n in args.sizes:
        mask = rng.random(n) < 0.5
        words, shifted = kernels.shifted_tables(mask)
        t_np, ref = best_time(lambda: kernels.scan_counts(words, shifted, n, 1, 2, backend="numpy"), args.repeat)
        print(f"{n:>8} {'numpy':>9} {1:>7} {t_np:>9.4f} {1.0:>8.1f}")
        if kernels.BACKEND != "compiled":
            continue
        for th in args.threads:
            t_c, got = best_time(
                lambda: kernels.scan_counts(words, shifted, n, 1, 2, threads=th, backend="compiled"), args.repeat)
            if not np.array_equal(got, ref):
                raise SystemExit(f"backend mismatch at N={n}, threads={th}")
            print(f"{n:>8} {'compiled':>9} {th:>7} {t_c:>9.4f} {t_np / t_c:>8.1f}")


if __name__ == "__main__":
    main()
