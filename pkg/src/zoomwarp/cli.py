"""Command-line interface.

Subcommands:

    saliency kde|boundary|load   generate or validate saliency files
    warp                         zoom an image through a saliency warp
    unwarp                       pull a warped image back through the inverse
    roundtrip                    forward-inverse composition diagnostics
    pyramid-error                inverse-field downsampling error table
    bench                        latency table for the core operations
    magnification                per-tile magnification heatmap + stats

Exit codes: 0 success, 2 validation failure, 3 numerical-structure failure
(foldover or injectivity violation). Failures print one machine-readable
line to stderr: "error: validation: ..." or "error: structure: ...".
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import io
from .core import GridSpec, make_grid, resample, upsample_grid
from .errors import FoldoverError, InjectivityError
from .saliency import (
    KdeParams,
    boundary_saliency,
    kde_saliency,
    load_boxes,
    load_saliency,
    save_saliency,
)
from .unzoom import (
    WarpConfig,
    build_warp,
    forward_warp,
    invert_nonseparable,
    invert_separable,
    invert_warp,
    pyramid_inverse,
    pyramid_inverse_error,
)
from .zoom import (
    AttractionKernel,
    SaliencyMap,
    SeparableWarp,
    WarpGrid,
    lz_warp,
    lz_warp_separable,
    magnification_map,
)


def _hw(text: str) -> tuple[int, int]:
    try:
        h, w = text.lower().split("x")
        return (int(h), int(w))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected HxW, got {text!r}") from None


def _divisor_list(text: str) -> list[int]:
    try:
        vals = [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("divisor list is empty")
    return vals


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of warp parameters plus run-level knobs."""

    warp: WarpConfig
    dims: tuple[int, int]
    seed: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        GridSpec(*self.dims)
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    @classmethod
    def from_args(cls, args, dims=None) -> "RunConfig":
        warp = WarpConfig(
            grid=args.grid,
            fwhm=args.fwhm,
            scale=args.scale,
            separable=args.separable,
            anti_cropping=args.anti_crop,
            marginalize=args.marginalize,
        )
        return cls(
            warp=warp,
            dims=dims if dims is not None else args.dims,
            seed=args.seed,
            threads=args.threads,
        )


def _add_warp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=_hw, default=(31, 51), metavar="HxW",
                   help="control grid size (default 31x51)")
    p.add_argument("--fwhm", type=float, default=22.0,
                   help="attraction kernel width in saliency cells (default 22)")
    p.add_argument("--scale", type=float, default=0.5,
                   help="zoomed-image scale factor (default 0.5)")
    sep = p.add_mutually_exclusive_group()
    sep.add_argument("--separable", dest="separable", action="store_true", default=True,
                     help="axis-factored warp (default)")
    sep.add_argument("--nonseparable", dest="separable", action="store_false",
                     help="full 2-D warp")
    crop = p.add_mutually_exclusive_group()
    crop.add_argument("--anti-crop", dest="anti_crop", action="store_true", default=True,
                      help="pin warp to cover the full image (default)")
    crop.add_argument("--no-anti-crop", dest="anti_crop", action="store_false")
    p.add_argument("--marginalize", choices=("max", "mean"), default="max",
                   help="axis reduction for separable warps (default max)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")
    p.add_argument("--threads", type=int, default=1, help="worker cap for resampling")


def _print_saliency_summary(s: SaliencyMap) -> None:
    v = s.values
    print(f"saliency {v.shape[0]}x{v.shape[1]} min={v.min():.6g} "
          f"max={v.max():.6g} mean={v.mean():.6g}")


def cmd_saliency(args) -> int:
    if args.kind == "kde":
        boxes = load_boxes(args.boxes)
        if not boxes:
            print("warning: box list is empty; saliency is uniform", file=sys.stderr)
        params = KdeParams(amplitude=args.amplitude, bandwidth=args.bandwidth)
        s = kde_saliency(boxes, params, GridSpec(*args.grid), args.ref)
    elif args.kind == "boundary":
        labels = io.load_labels(args.labels)
        s = boundary_saliency(labels, args.boundary_value, args.background_value,
                              GridSpec(*args.grid))
    else:
        s = load_saliency(args.infile)
    save_saliency(s, args.out)
    _print_saliency_summary(s)
    return 0


def _load_grid_file(path) -> WarpGrid:
    arr = io.load_array(path)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"{path}: warp grid file must be rank-3 (h, w, 2), got {arr.shape}")
    return WarpGrid(arr.astype(np.float64))


def _extract_separable(grid: WarpGrid, tol: float = 1e-12) -> SeparableWarp:
    pts = grid.points
    xs = pts[0, :, 0]
    ys = pts[:, 0, 1]
    drift = max(
        float(np.abs(pts[..., 0] - xs[None, :]).max()),
        float(np.abs(pts[..., 1] - ys[:, None]).max()),
    )
    if drift > tol:
        raise ValueError(
            f"warp grid is not separable (axis drift {drift:.3e}); rerun with --nonseparable"
        )
    return SeparableWarp(xs=xs, ys=ys, anti_cropping=grid.anti_cropping)


def cmd_warp(args) -> int:
    image = io.load_image(args.image)
    cfg = RunConfig.from_args(args, dims=(image.shape[0], image.shape[1]))
    if args.warp_grid:
        grid = _load_grid_file(args.warp_grid)
    else:
        grid, _ = build_warp(load_saliency(args.saliency), cfg.warp)
    out_dims = args.out_dims or cfg.warp.zoomed_dims(cfg.dims)
    fwd = upsample_grid(grid.points, GridSpec(*out_dims))
    zoomed = resample(image, fwd, threads=cfg.threads)
    io.save_image(args.out, zoomed)
    if args.grid_out:
        io.save_array(args.grid_out, grid.points)
    if args.field_out:
        io.save_array(args.field_out, fwd)
    print(f"warped {cfg.dims[0]}x{cfg.dims[1]} -> {out_dims[0]}x{out_dims[1]} "
          f"(grid {grid.shape[0]}x{grid.shape[1]})")
    return 0


def cmd_unwarp(args) -> int:
    image = io.load_image(args.image)
    grid = _load_grid_file(args.warp_grid)
    target = GridSpec(*args.dims)
    if args.separable:
        inv = invert_separable(_extract_separable(grid), target)
    else:
        inv = invert_nonseparable(grid, target)
    out = resample(image, inv, threads=args.threads)
    io.save_image(args.out, out)
    if args.field_out:
        io.save_array(args.field_out, inv.to_array())
    print(f"unwarped {image.shape[0]}x{image.shape[1]} -> {target.rows}x{target.cols} "
          f"coverage={inv.coverage:.4f}")
    return 0


def cmd_roundtrip(args) -> int:
    cfg = RunConfig.from_args(args)
    grid, sep = build_warp(load_saliency(args.saliency), cfg.warp)
    inv = invert_warp(grid, sep, GridSpec(*cfg.dims))
    target = make_grid(GridSpec(*cfg.dims))
    err = 0.0
    if inv.valid.any():
        back = forward_warp(grid, inv.points[inv.valid])
        err = float(np.abs(back - target[inv.valid]).max())
    print(f"max_composition_error={err:.3e} coverage={inv.coverage:.6f} "
          f"({'separable' if sep is not None else 'nonseparable'})")
    if err > args.tolerance:
        raise FoldoverError(
            f"composition error {err:.3e} exceeds tolerance {args.tolerance:.1e}"
        )
    return 0


def cmd_pyramid_error(args) -> int:
    cfg = RunConfig.from_args(args)
    grid, sep = build_warp(load_saliency(args.saliency), cfg.warp)
    full = invert_warp(grid, sep, GridSpec(*cfg.dims))
    approx = pyramid_inverse(full, args.divisors)
    # error_px converts at the full field resolution; error_px_level at the
    # level's own resolution (one pixel there is d full-res pixels wide),
    # which is the scale the level-d field is consumed at.
    print("divisor  error_px   error_px_level")
    for d, ap in zip(args.divisors, approx):
        spec = GridSpec(math.ceil(cfg.dims[0] / d), math.ceil(cfg.dims[1] / d))
        exact = invert_warp(grid, sep, spec)
        err = pyramid_inverse_error(ap, exact, cfg.dims)
        err_level = pyramid_inverse_error(ap, exact, (cfg.dims[0] // d, cfg.dims[1] // d))
        print(f"{d:7d}  {err:.6f}   {err_level:.6f}")
    return 0


def _smooth_random_saliency(spec: GridSpec, rng: np.random.Generator) -> SaliencyMap:
    coarse = rng.uniform(0.5, 2.0, size=(5, 7))
    vals = upsample_grid(
        np.stack([coarse, np.zeros_like(coarse)], axis=-1), spec
    )[..., 0]
    return SaliencyMap(vals)


def _time_ms(fn, repetitions: int, warmup: int = 3) -> np.ndarray:
    for _ in range(warmup):
        fn()
    out = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter()
        fn()
        out[i] = (time.perf_counter() - t0) * 1e3
    return out


def cmd_bench(args) -> int:
    if args.repetitions < 10:
        raise ValueError(f"repetitions must be >= 10, got {args.repetitions}")
    cfg = RunConfig.from_args(args)
    rng = np.random.default_rng(cfg.seed)
    s = _smooth_random_saliency(GridSpec(*cfg.warp.grid), rng)
    kernel = AttractionKernel(fwhm=cfg.warp.fwhm)
    spec = GridSpec(*cfg.warp.grid)
    target = GridSpec(*cfg.dims)
    sep = lz_warp_separable(s, kernel, spec)
    grid = lz_warp(s, kernel, spec)
    inv = invert_separable(sep, target)
    image = rng.uniform(0.0, 255.0, size=(cfg.dims[0], cfg.dims[1], 3))

    ops = [
        ("forward_grid", lambda: lz_warp(s, kernel, spec)),
        ("grid_upsample", lambda: upsample_grid(grid.points, target)),
        ("separable_inversion", lambda: invert_separable(sep, target)),
        ("nonseparable_inversion", lambda: invert_nonseparable(grid, target)),
        ("resample", lambda: resample(image, inv, threads=cfg.threads)),
    ]
    print(f"workload: {spec.rows}x{spec.cols} grid -> {target.rows}x{target.cols} field, "
          f"{args.repetitions} repetitions")
    print(f"{'op':<24}{'median_ms':>12}{'p95_ms':>12}")
    for name, fn in ops:
        times = _time_ms(fn, args.repetitions)
        med = float(np.median(times))
        p95 = float(np.percentile(times, 95))
        print(f"{name:<24}{med:>12.3f}{p95:>12.3f}")
    return 0


def cmd_magnification(args) -> int:
    cfg = WarpConfig(
        grid=args.grid,
        fwhm=args.fwhm,
        scale=args.scale,
        separable=args.separable,
        anti_cropping=args.anti_crop,
        marginalize=args.marginalize,
    )
    grid, _ = build_warp(load_saliency(args.saliency), cfg)
    mag = magnification_map(grid)
    rows, cols = mag.shape
    io.save_heatmap(args.out, mag, cmap=args.cmap)
    tile_area = 1.0 / (rows * cols)
    inv_sum = float(np.sum(tile_area / mag))
    center = float(mag[rows // 2, cols // 2])
    corner = float(mag[0, 0])
    print(f"center_ratio={center:.6f} corner_ratio={corner:.6f} "
          f"area_weighted_inverse_sum={inv_sum:.9f}")
    print(f"magnification min={mag.min():.4f} max={mag.max():.4f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoomwarp",
        description="Saliency-guided zoom warps and their piecewise-bilinear inverses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("saliency", help="generate or validate saliency files")
    pskind = ps.add_subparsers(dest="kind", required=True)
    kde = pskind.add_parser("kde", help="density of box centers")
    kde.add_argument("--boxes", required=True, help="text file: cx cy w h per line")
    kde.add_argument("--grid", type=_hw, default=(31, 51), metavar="HxW")
    kde.add_argument("--ref", type=_hw, default=(1200, 1920), metavar="HxW",
                     help="resolution whose pixels the bandwidth is measured in")
    kde.add_argument("--amplitude", type=float, default=1.0)
    kde.add_argument("--bandwidth", type=float, default=64.0)
    kde.add_argument("--out", required=True)
    kde.set_defaults(run=cmd_saliency)
    bnd = pskind.add_parser("boundary", help="label-boundary saliency")
    bnd.add_argument("--labels", required=True, help="single-channel PNG label map")
    bnd.add_argument("--grid", type=_hw, default=(45, 45), metavar="HxW")
    bnd.add_argument("--boundary-value", type=float, default=200.0)
    bnd.add_argument("--background-value", type=float, default=1.0)
    bnd.add_argument("--out", required=True)
    bnd.set_defaults(run=cmd_saliency)
    lod = pskind.add_parser("load", help="validate and rewrite a saliency file")
    lod.add_argument("--in", dest="infile", required=True)
    lod.add_argument("--out", required=True)
    lod.set_defaults(run=cmd_saliency)

    pw = sub.add_parser("warp", help="zoom an image")
    src = pw.add_mutually_exclusive_group(required=True)
    src.add_argument("--saliency", help="saliency dense-array file")
    src.add_argument("--warp-grid", help="precomputed warp grid file")
    pw.add_argument("--image", required=True)
    pw.add_argument("--out", required=True)
    pw.add_argument("--out-dims", type=_hw, default=None, metavar="HxW",
                    help="zoomed dims (default: scale * input dims)")
    pw.add_argument("--grid-out", help="write the warp grid (h, w, 2)")
    pw.add_argument("--field-out", help="write the dense forward field (H', W', 2)")
    _add_warp_flags(pw)
    pw.set_defaults(run=cmd_warp)

    pu = sub.add_parser("unwarp", help="invert a zoom on an image")
    pu.add_argument("--image", required=True)
    pu.add_argument("--warp-grid", required=True)
    pu.add_argument("--dims", type=_hw, required=True, metavar="HxW",
                    help="output (original) resolution")
    pu.add_argument("--out", required=True)
    pu.add_argument("--field-out", help="write the inverse field (H, W, 3)")
    _add_warp_flags(pu)
    pu.set_defaults(run=cmd_unwarp)

    pr = sub.add_parser("roundtrip", help="forward-inverse composition check")
    pr.add_argument("--saliency", required=True)
    pr.add_argument("--dims", type=_hw, default=(600, 960), metavar="HxW")
    pr.add_argument("--tolerance", type=float, default=1e-6)
    _add_warp_flags(pr)
    pr.set_defaults(run=cmd_roundtrip)

    pp = sub.add_parser("pyramid-error", help="inverse downsampling error table")
    pp.add_argument("--saliency", required=True)
    pp.add_argument("--dims", type=_hw, default=(600, 960), metavar="HxW")
    pp.add_argument("--divisors", type=_divisor_list, default=[2, 4, 8])
    _add_warp_flags(pp)
    pp.set_defaults(run=cmd_pyramid_error)

    pb = sub.add_parser("bench", help="latency table")
    pb.add_argument("--repetitions", type=int, default=30)
    pb.add_argument("--dims", type=_hw, default=(600, 960), metavar="HxW")
    _add_warp_flags(pb)
    pb.set_defaults(run=cmd_bench)

    pm = sub.add_parser("magnification", help="magnification heatmap and stats")
    pm.add_argument("--saliency", required=True)
    pm.add_argument("--out", required=True, help="false-color PNG path")
    pm.add_argument("--cmap", default="viridis")
    _add_warp_flags(pm)
    pm.set_defaults(run=cmd_magnification)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (FoldoverError, InjectivityError) as exc:
        print(f"error: structure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
