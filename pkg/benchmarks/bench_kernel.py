#!/usr/bin/env python3
"""Time the pure-Python kernel against the compiled one.

Usage: python3 benchmarks/bench_kernel.py [--points N] [--repeats R]

Evaluates log phi+/- with gradients over a fixed batch of escaping points
(basilica polynomial, a = 0.05) with each backend and prints per-call
timings.  Results are medians over R repeats.
"""

import argparse
import cmath
import random
import time

from henonlocus._kernel import reference

try:
    from henonlocus._kernel import _fastkernel
except ImportError:
    _fastkernel = None

COEFFS = (-1 + 0j, 0j, 1 + 0j)
A = 0.05 + 0j
ALPHA = 3.0
CAP = 200
K = 48


def sample_points(n, seed=20240817):
    rng = random.Random(seed)
    plus, minus = [], []
    for _ in range(n):
        ray = cmath.exp(2j * cmath.pi * rng.random())
        x = rng.uniform(1.2, 40.0) * ray
        y = rng.uniform(0.0, 0.9) * abs(x) * cmath.exp(2j * cmath.pi * rng.random())
        plus.append((x, y))
        minus.append((y, x))
    return plus, minus


def run_batch(fn, pts):
    start = time.perf_counter()
    for x, y in pts:
        fn(COEFFS, A, x, y, K, ALPHA, CAP)
    return time.perf_counter() - start


def bench(name, fn, pts, repeats):
    per_call = min(run_batch(fn, pts) for _ in range(repeats)) / len(pts)
    print(f"  {name:<28s} {per_call * 1e6:8.2f} us/call")
    return per_call


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    plus, minus = sample_points(args.points)
    print(f"batch: {args.points} points, best of {args.repeats}")
    print("phi_plus_eval")
    ref_p = bench("reference", reference.phi_plus_eval, plus, args.repeats)
    if _fastkernel is not None:
        fast_p = bench("compiled", _fastkernel.phi_plus_eval, plus, args.repeats)
        print(f"  speedup {ref_p / fast_p:28.1f}x")
    print("phi_minus_eval")
    ref_m = bench("reference", reference.phi_minus_eval, minus, args.repeats)
    if _fastkernel is not None:
        fast_m = bench("compiled", _fastkernel.phi_minus_eval, minus, args.repeats)
        print(f"  speedup {ref_m / fast_m:28.1f}x")
    if _fastkernel is None:
        print("compiled kernel not built; only the reference backend was timed")


if __name__ == "__main__":
    main()
