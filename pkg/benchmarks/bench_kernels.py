#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]

Sizes mirror the registration pipeline's hot spots (840x525 canvas,
20 spline controls, boundary sets of a few thousand points).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from limbreg import _kernels_numpy as knp
from limbreg.accel import HAVE_NUMBA


def time_call(fn, *args, repeats: int) -> float:
    fn(*args)  # warm-up (and JIT compile on the numba side)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def build_cases(rng):
    h, w = 525, 840
    img = rng.integers(0, 256, (h, w)).astype(np.uint8)
    mask = rng.random((h, w)) < 0.5
    kernel = rng.random((5, 5))
    kernel /= kernel.sum()
    matrix = np.array([[0.97, -0.12, 8.0], [0.12, 0.97, -5.0]])
    sx, sy = knp.affine_coords(matrix, h, w)
    controls = rng.uniform(0, 800, (20, 2))
    weights = rng.normal(0, 0.05, (20, 2))
    boundary_a = rng.uniform(0, 800, (4000, 2))
    boundary_b = rng.uniform(0, 800, (3500, 2))
    xs = rng.uniform(0, w, 60000)
    ys = rng.uniform(0, h, 60000)
    angles = np.radians(np.arange(0.0, 180.0, 1.0))
    return [
        ("convolve5_replicate", (img, kernel)),
        ("erode_box", (mask, 2)),
        ("dilate_box", (mask, 2)),
        ("affine_coords", (matrix, h, w)),
        ("tps_coords", (controls, weights, matrix, h, w)),
        ("sample_bilinear_u8", (img, sx, sy)),
        ("sample_nearest_bool", (mask, sx, sy)),
        ("min_sq_dists", (boundary_a, boundary_b)),
        ("projection_extents", (xs, ys, np.cos(angles), np.sin(angles))),
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not HAVE_NUMBA:
        print("numba unavailable (or LIMBREG_NO_NUMBA set); nothing to compare")
        return 1
    from limbreg import _kernels_numba as knb

    rng = np.random.default_rng(0)
    cases = build_cases(rng)
    print(f"{'kernel':<22} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, call_args in cases:
        t_np = time_call(getattr(knp, name), *call_args, repeats=args.repeats)
        t_nb = time_call(getattr(knb, name), *call_args, repeats=args.repeats)
        print(f"{name:<22} {t_np * 1e3:>12.2f} {t_nb * 1e3:>12.2f} {t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
