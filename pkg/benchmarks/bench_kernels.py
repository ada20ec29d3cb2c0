"""Time the numba kernels against their numpy twins.

Usage: python benchmarks/bench_kernels.py [--rows 2000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from diverse_ensembles import kernels
from diverse_ensembles._jit import USE_NUMBA
from diverse_ensembles.tree_ensemble import ForestConfig, train_forest


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--features", type=int, default=20)
    parser.add_argument("--classes", type=int, default=7)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    X = rng.standard_normal((args.rows, args.features))
    y = rng.integers(0, args.classes, args.rows)
    feats = np.arange(args.features)
    votes = rng.integers(0, args.classes, (args.rows * 10, 15))

    # warm up the jit so compile time is not measured
    kernels.best_split_numba(X[:10], y[:10], args.classes, feats)
    kernels.majority_vote_numba(votes[:10], args.classes)

    assert kernels.best_split_numba(X, y, args.classes, feats) == kernels.best_split_numpy(X, y, args.classes, feats)
    assert np.array_equal(kernels.majority_vote_numba(votes, args.classes),
                          kernels.majority_vote_numpy(votes, args.classes))

    rows = [
        ("best_split", lambda: kernels.best_split_numba(X, y, args.classes, feats),
         lambda: kernels.best_split_numpy(X, y, args.classes, feats)),
        ("majority_vote", lambda: kernels.majority_vote_numba(votes, args.classes),
         lambda: kernels.majority_vote_numpy(votes, args.classes)),
    ]
    print(f"numba active: {USE_NUMBA}  rows={args.rows} features={args.features} classes={args.classes}")
    loop = "numba" if USE_NUMBA else "py-loop"
    print(f"{'kernel':15s} {loop + ' [ms]':>12s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, fast, slow in rows:
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:15s} {tf * 1e3:12.2f} {ts * 1e3:11.2f} {ts / tf:8.1f}x")

    cfg = ForestConfig(variant="original", seed=0)
    t = best_of(lambda: train_forest(cfg, X, y, args.classes), 1)
    print(f"5-tree forest with the active kernel: {t:.2f} s")


if __name__ == "__main__":
    main()
