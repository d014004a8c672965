"""How exact is the inverse, and how cheap can it get?

Inverts one warp three ways: the per-axis solver for separable warps, the
general tile sweep, and coarse pyramid levels that are upsampled from the
full-resolution field. Reports the round-trip error of each and the cost
of the sweep as the target grows.
"""

import time
from pathlib import Path

import numpy as np

from zoomwarp import (
    AttractionKernel,
    Box2D,
    GridSpec,
    KdeParams,
    forward_warp,
    invert_nonseparable,
    invert_separable,
    kde_saliency,
    lz_warp,
    lz_warp_separable,
    make_grid,
    pyramid_inverse,
    pyramid_inverse_error,
    separable_to_grid,
)

DIMS = (600, 960)


def composition_error(grid, field, target) -> float:
    goal = make_grid(target)
    back = forward_warp(grid, field.points)
    return float(np.hypot(back[..., 0] - goal[..., 0], back[..., 1] - goal[..., 1]).max())


def main() -> None:
    boxes = [Box2D(0.5, 0.45, 0.15, 0.15), Box2D(0.2, 0.7, 0.1, 0.1)]
    saliency = kde_saliency(boxes, KdeParams(amplitude=2.0, bandwidth=96.0), (31, 51), (1200, 1920))
    kernel = AttractionKernel()

    sep = lz_warp_separable(saliency, kernel)
    grid = separable_to_grid(sep)
    target = GridSpec(*DIMS)

    t0 = time.perf_counter()
    axis_field = invert_separable(sep, target)
    t_axis = time.perf_counter() - t0
    t0 = time.perf_counter()
    sweep_field = invert_nonseparable(grid, target)
    t_sweep = time.perf_counter() - t0

    print(f"target {DIMS[0]}x{DIMS[1]}, warp grid 31x51")
    print(f"  axis solver: {1e3 * t_axis:7.1f} ms  "
          f"round-trip err {composition_error(grid, axis_field, target):.2e}")
    print(f"  tile sweep:  {1e3 * t_sweep:7.1f} ms  "
          f"round-trip err {composition_error(grid, sweep_field, target):.2e}")
    print(f"  solver disagreement: {np.abs(axis_field.points - sweep_field.points).max():.2e}")

    # A genuinely non-separable warp has only the sweep.
    full_grid = lz_warp(saliency, kernel)
    field = invert_nonseparable(full_grid, target)
    print(f"  non-separable warp, tile sweep round-trip err "
          f"{composition_error(full_grid, field, target):.2e}")

    # Cheap alternative: invert once at full resolution, then downsample the
    # field instead of re-solving at every pyramid level.
    divisors = [2, 4, 8]
    print("pyramid levels (error in pixels at each level's own resolution):")
    for d, approx in zip(divisors, pyramid_inverse(axis_field, divisors)):
        level = GridSpec(-(-DIMS[0] // d), -(-DIMS[1] // d))
        exact = invert_separable(sep, level)
        err = pyramid_inverse_error(approx, exact, (DIMS[0] // d, DIMS[1] // d))
        print(f"  1/{d}: {level.rows:3d}x{level.cols}  err {err:.2e} px")

    # Sweep cost versus target size, same warp.
    print("tile sweep cost vs target size:")
    for rows, cols in [(150, 240), (300, 480), (600, 960), (1200, 960)]:
        t0 = time.perf_counter()
        invert_nonseparable(grid, (rows, cols))
        print(f"  {rows:5d}x{cols:<5d} {1e3 * (time.perf_counter() - t0):7.1f} ms")


if __name__ == "__main__":
    main()
