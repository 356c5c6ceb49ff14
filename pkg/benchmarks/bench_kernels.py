"""Time the compiled and pure-Python search kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one line per (kernel, input) with the best wall time of each backend
and the speedup; results from the two backends are checked to agree.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from blockycover import kernels
from blockycover.families import nested_blocky_difference, staircase_pattern
from blockycover.gamma2 import GroupFunction, group_lift, half_graph
from blockycover.matcore import BooleanMatrix


def _inputs():
    rng = np.random.default_rng(0)
    yield "half_graph(24)", half_graph(24)
    yield "staircase 40x40 d=12", staircase_pattern(40, 40, 12, seed=1).matrix
    yield "random 16x16 p=0.5", BooleanMatrix.from_array((rng.random((16, 16)) < 0.5).astype(int))
    yield "random 20x20 p=0.3", BooleanMatrix.from_array((rng.random((20, 20)) < 0.3).astype(int))
    yield "nested 32x32", nested_blocky_difference(32, 32, seed=3).matrix
    yield "lift k=5", group_lift(GroupFunction.random(5, 0.5, seed=2))[0]


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels._compiled is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':<10} {'input':<22} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, A in _inputs():
        jobs = {
            "td": lambda b: kernels.td_search(A.rows, A.cols, A.m, A.n, 0, b),
            "max_rect": lambda b: kernels.max_rect_search(A.rows, A.n, b),
        }
        if min(A.m, A.n) > 20:
            jobs.pop("max_rect")  # exact rectangle search is exponential in the short side
        for kernel, job in jobs.items():
            tp, rp = _best(lambda: job("python"), args.repeat)
            tc, rc = _best(lambda: job("cython"), args.repeat)
            if rp != rc:
                raise SystemExit(f"backends disagree on {kernel} / {name}")
            print(f"{kernel:<10} {name:<22} {tp:>10.4f} {tc:>10.4f} {tp / max(tc, 1e-9):>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
