"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage:
    python benchmarks/bench_kernels.py [--n 400] [--repeat 5]

Run with INCMINE_NO_NUMBA=1 to confirm the dispatch itself switches paths;
this script always times both implementations explicitly.
"""

import argparse
import itertools
from time import perf_counter

import numpy as np

from incmine import _kernels
from incmine.clustering import pairwise_distances


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up (and JIT compile for the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = perf_counter()
        fn(*args)
        best = min(best, perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=400, help="points for PAM")
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.USE_NUMBA:
        print("note: numba path inactive (not installed or INCMINE_NO_NUMBA set);"
              " timing the loop fallback in pure Python would be misleading,"
              " so only the numpy path is shown where that happens.\n")

    rng = np.random.default_rng(0)
    pts = rng.normal(size=(args.n, 6))
    dist = pairwise_distances(pts, "euclidean")
    presence = rng.random(size=(20_000, 40)) < 0.25
    cands = np.array(list(itertools.combinations(range(40), 3))[:2000],
                     dtype=np.int64)

    impls = _kernels.implementations()
    rows = []

    active, fallback = impls["pam_build"]
    rows.append(("pam_build", timeit(active, dist, args.k, repeat=args.repeat),
                 timeit(fallback, dist, args.k, repeat=args.repeat)))

    build = fallback(dist, args.k)
    active, fallback = impls["pam_swap"]
    rows.append(("pam_swap",
                 timeit(active, dist, build.copy(), 100, repeat=args.repeat),
                 timeit(fallback, dist, build.copy(), 100, repeat=args.repeat)))

    medoids, _ = fallback(dist, build.copy(), 100)
    labels, _ = impls["assign_to_medoids"][1](dist, np.sort(medoids))
    active, fallback = impls["silhouette_samples"]
    rows.append(("silhouette",
                 timeit(active, dist, labels, args.k, repeat=args.repeat),
                 timeit(fallback, dist, labels, args.k, repeat=args.repeat)))

    active, fallback = impls["support_counts"]
    rows.append(("support_counts",
                 timeit(active, presence, cands, repeat=args.repeat),
                 timeit(fallback, presence, cands, repeat=args.repeat)))

    header = f"{'kernel':<16} {'active':>10} {'numpy':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, t_active, t_numpy in rows:
        print(f"{name:<16} {t_active * 1e3:>8.2f}ms {t_numpy * 1e3:>8.2f}ms "
              f"{t_numpy / t_active:>7.2f}x")
    print(f"\nnumba path active: {_kernels.USE_NUMBA} "
          f"(n={args.n}, k={args.k}, best of {args.repeat})")


if __name__ == "__main__":
    main()
