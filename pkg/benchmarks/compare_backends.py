"""Timing comparison of the compiled and pure-Python simulation kernels.

Runs the same workloads through both lanes, asserts the outputs are
bit-identical (the lanes implement one algorithm, so any divergence is a
bug, not noise), and reports wall times and speedups.

Usage: python3 benchmarks/compare_backends.py [--paths N] [--depth N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cantorjump import Params, SplitStream
from cantorjump import _pykernels as pure

try:
    from cantorjump import _ckernels as compiled
except ImportError:
    compiled = None


def _time(fn, repeats: int = 3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def _assert_equal(label: str, a, b) -> None:
    flat_a = a if isinstance(a, tuple) else (a,)
    flat_b = b if isinstance(b, tuple) else (b,)
    for x, y in zip(flat_a, flat_b):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            assert np.array_equal(np.asarray(x), np.asarray(y)), f"{label}: lanes diverged"
        else:
            assert x == y, f"{label}: lanes diverged"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=2000, help="paths per batch workload")
    parser.add_argument("--depth", type=int, default=12, help="working depth")
    parser.add_argument("--t", type=float, default=0.3, help="time horizon")
    args = parser.parse_args()

    if compiled is None:
        print("compiled backend not built; nothing to compare")
        return

    params = Params(1.0, 2.0)
    depth, t, paths = args.depth, args.t, args.paths
    rates = np.array(params.rates(depth), dtype=np.float64)
    key = SplitStream.from_seed(1234).key

    single_reps = 200
    workloads = [
        (
            f"run_path x{single_reps} (depth {depth}, t {t})",
            lambda mod: [mod.run_path(0, depth, t, rates, k) for k in range(single_reps)][-1],
        ),
        (
            f"batch_prefix_counts ({paths} paths, resolution 4)",
            lambda mod: mod.batch_prefix_counts(0, depth, 4, t, paths, rates, key),
        ),
        (
            f"batch_level_counts ({paths} paths)",
            lambda mod: mod.batch_level_counts(0, depth, t, paths, rates, key),
        ),
        (
            f"endpoint_histograms ({paths} paths, resolution 4)",
            lambda mod: mod.endpoint_histograms(0, depth, 4, t, paths, rates, key),
        ),
        (
            f"batch_confined_prefix_counts ({paths // 4} accepted)",
            lambda mod: mod.batch_confined_prefix_counts(
                0, depth, 1, 4, t, paths // 4, rates, key, 100 * paths
            ),
        ),
    ]

    name_width = max(len(name) for name, _ in workloads)
    print(f"{'workload':<{name_width}}  {'pure (s)':>10}  {'compiled (s)':>12}  {'speedup':>8}")
    for name, fn in workloads:
        t_pure, r_pure = _time(lambda: fn(pure), repeats=1)
        t_comp, r_comp = _time(lambda: fn(compiled), repeats=3)
        _assert_equal(name, r_pure, r_comp)
        print(f"{name:<{name_width}}  {t_pure:>10.4f}  {t_comp:>12.4f}  {t_pure / t_comp:>7.1f}x")
    print("all workloads produced bit-identical results on both lanes")


if __name__ == "__main__":
    main()
