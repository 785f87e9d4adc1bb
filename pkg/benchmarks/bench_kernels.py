#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call (compilation, or cache load) is reported separately.
"""

import argparse
import time

import numpy as np

from divheight import kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    p = kernels.primes_below_2_31(1)[0]
    mat = rng.integers(0, p, size=(120, 120), dtype=np.int64)
    yield "det_mod_p 120x120", lambda: kernels.det_mod_p_numba(mat, p), lambda: kernels.det_mod_p_numpy(mat, p)

    rows = rng.normal(size=(4096, 9)) + 1j * rng.normal(size=(4096, 9))
    yield "jensen_rows 4096 x deg 8", lambda: kernels.jensen_rows_numba(rows), lambda: kernels.jensen_rows_numpy(rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"numba active: {kernels.USE_NUMBA}")
    print(f"{'kernel':<26} {'first numba':>12} {'numba':>10} {'numpy':>10} {'speedup':>8}  agree")
    for name, fast, slow in cases(rng):
        t0 = time.perf_counter()
        fast()
        first = time.perf_counter() - t0
        tf, a = best_of(fast, args.repeat)
        ts, b = best_of(slow, args.repeat)
        agree = np.allclose(a, b, rtol=1e-9, atol=1e-9)
        print(f"{name:<26} {first:12.4f} {tf:10.5f} {ts:10.5f} {ts / tf:8.1f}  {agree}")


if __name__ == "__main__":
    main()
