#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot kernels (pairwise squared distances, Gaussian kernel sums)
on sized workloads plus an end-to-end k-means fit under each backend, and
prints a table with per-case speedups. Run from an installed environment:

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from rnad.kernels import numpy_backend

try:
    from rnad.kernels import _ckernels
except ImportError:
    _ckernels = None


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _bench_kernels(repeat):
    rng = np.random.default_rng(0)
    cases = []

    for n, m, d in ((20000, 8, 16), (50000, 16, 8), (5000, 64, 64)):
        x = np.ascontiguousarray(rng.normal(size=(n, d)))
        c = np.ascontiguousarray(rng.normal(size=(m, d)))
        cases.append((f"pairwise n={n} m={m} d={d}",
                      lambda x=x, c=c: numpy_backend.pairwise_sq_dists(x, c),
                      (lambda x=x, c=c: _ckernels.pairwise_sq_dists(x, c))
                      if _ckernels else None))

    for q, s, d in ((2000, 2000, 8), (1000, 10000, 4)):
        qs = np.ascontiguousarray(rng.normal(size=(q, d)))
        ss = np.ascontiguousarray(rng.normal(size=(s, d)))
        cases.append((f"kde sums q={q} s={s} d={d}",
                      lambda qs=qs, ss=ss: numpy_backend.gaussian_kernel_sums(
                          qs, ss, 0.7),
                      (lambda qs=qs, ss=ss: _ckernels.gaussian_kernel_sums(
                          qs, ss, 0.7)) if _ckernels else None))

    print(f"{'case':<32} {'numpy':>10} {'cython':>10} {'speedup':>9}")
    for name, numpy_fn, cy_fn in cases:
        t_np = _best_of(numpy_fn, repeat)
        if cy_fn is None:
            print(f"{name:<32} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>9}")
            continue
        t_cy = _best_of(cy_fn, repeat)
        print(f"{name:<32} {t_np * 1e3:>8.2f}ms {t_cy * 1e3:>8.2f}ms "
              f"{t_np / t_cy:>8.2f}x")


def _bench_kmeans_subprocess(backend, n=30000, d=12, m=8):
    """Full kmeans_fit timed in a fresh interpreter pinned to one backend."""
    code = (
        "import time, numpy as np\n"
        "from rnad import kmeans_fit\n"
        f"x = np.random.default_rng(0).normal(size=({n}, {d}))\n"
        "t0 = time.perf_counter()\n"
        f"kmeans_fit(x, m={m}, seed=0)\n"
        "print(time.perf_counter() - t0)\n"
    )
    env = dict(os.environ, RNAD_KERNELS=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled extension not available; numpy-only timings\n")
    _bench_kernels(args.repeat)

    print()
    t_np = _bench_kmeans_subprocess("numpy")
    if _ckernels is not None:
        t_cy = _bench_kmeans_subprocess("cython")
        print(f"{'kmeans_fit n=30000 d=12 m=8':<32} {t_np * 1e3:>8.2f}ms "
              f"{t_cy * 1e3:>8.2f}ms {t_np / t_cy:>8.2f}x")
    else:
        print(f"{'kmeans_fit n=30000 d=12 m=8':<32} {t_np * 1e3:>8.2f}ms")


if __name__ == "__main__":
    main()
