"""Normalized-coordinate grids, images, and bilinear interpolation primitives.

Conventions used throughout the package:

* Coordinates are ``(x, y)`` pairs in ``[0, 1]``; ``x`` runs along image
  width, ``y`` along height.
* A length-``D`` axis places sample ``d`` at ``d / (D - 1)``, so endpoints are
  exactly 0 and 1 and grid points coincide with pixel centers.
* Images are ``(H, W, C)`` arrays; coordinate fields are ``(rows, cols, 2)``
  with the x component first.

All coordinate math is done in float64. Image payloads may be float32 and are
returned in their input dtype.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

# Sample coordinates within this distance (in index units) of a pixel center
# are snapped onto it. Round-tripping j/(D-1) through *(D-1) is off by ~1 ulp
# for most D (a few 1e-13 in index units for D up to ~10^4), and
# exact-at-grid-point behavior is part of the contract. Kept well below any
# geometric tolerance so snapping never masks real displacement.
SNAP_TOL = 1e-11


@dataclass(frozen=True)
class GridSpec:
    """Dimensions of a uniform normalized grid (both axes need >= 2 samples)."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise ValueError("grid dimensions must be integers")
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid dimensions must be >= 2, got {(self.rows, self.cols)}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)


def _as_spec(spec) -> GridSpec:
    if isinstance(spec, GridSpec):
        return spec
    rows, cols = spec
    return GridSpec(int(rows), int(cols))


def grid_axis(n: int) -> np.ndarray:
    """Return the n uniform axis samples d/(n-1), with exact 0 and 1 endpoints."""
    if n < 2:
        raise ValueError(f"axis needs >= 2 samples, got {n}")
    return np.arange(n, dtype=np.float64) / (n - 1)


def make_grid(spec) -> np.ndarray:
    """Build the uniform coordinate grid as a (rows, cols, 2) array of (x, y).

    Row-major: element [i, j] is (j/(cols-1), i/(rows-1)). The first point is
    (0, 0) and the last is (1, 1) exactly.
    """
    spec = _as_spec(spec)
    xs = grid_axis(spec.cols)
    ys = grid_axis(spec.rows)
    out = np.empty((spec.rows, spec.cols, 2), dtype=np.float64)
    out[..., 0] = xs[None, :]
    out[..., 1] = ys[:, None]
    return out


def as_image(img) -> np.ndarray:
    """Validate and shape an image array as (H, W, C).

    Accepts (H, W) or (H, W, C) numeric input. float32 payloads are kept,
    anything else is converted to float64. Values must be finite.
    """
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValueError(f"image must be (H, W) or (H, W, C), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ValueError(f"image dimensions must be positive, got {arr.shape}")
    if arr.dtype != np.float32:
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("image values must be finite")
    return arr


def axis_locate(coords: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map normalized axis coordinates to (base index, fractional offset).

    Coordinates are clamped to the axis (border clamp), scaled to index units,
    and snapped to the nearest integer when within SNAP_TOL of it. The base
    index is clipped to [0, n-2] so the fraction stays in [0, 1].
    """
    coords = np.asarray(coords, dtype=np.float64)
    if n == 1:
        idx = np.zeros(coords.shape, dtype=np.intp)
        return idx, np.zeros_like(coords)
    s = np.clip(coords * (n - 1), 0.0, float(n - 1))
    r = np.rint(s)
    s = np.where(np.abs(s - r) <= SNAP_TOL, r, s)
    base = np.minimum(s.astype(np.intp), n - 2)
    return base, s - base


def bilinear_sample(values, points) -> np.ndarray:
    """Bilinearly interpolate a gridded array at normalized points.

    Parameters
    ----------
    values : (h, w) or (h, w, K) array
        Per-grid-point data; grid point [i, j] sits at (j/(w-1), i/(h-1)).
    points : (..., 2) array
        Query coordinates (x, y). Points outside [0, 1] clamp to the border.

    Returns
    -------
    (..., K) array of interpolated values (K axis dropped if input was 2-D).
    """
    vals = np.asarray(values)
    squeeze = vals.ndim == 2
    if squeeze:
        vals = vals[:, :, None]
    if vals.ndim != 3:
        raise ValueError(f"values must be (h, w) or (h, w, K), got shape {vals.shape}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    h, w = vals.shape[:2]
    jx, tx = axis_locate(pts[..., 0], w)
    iy, ty = axis_locate(pts[..., 1], h)
    jx1 = np.minimum(jx + 1, w - 1)
    iy1 = np.minimum(iy + 1, h - 1)
    v = vals.astype(np.float64, copy=False)
    tx = tx[..., None]
    ty = ty[..., None]
    out = (1.0 - ty) * ((1.0 - tx) * v[iy, jx] + tx * v[iy, jx1]) + ty * (
        (1.0 - tx) * v[iy1, jx] + tx * v[iy1, jx1]
    )
    return out[..., 0] if squeeze else out


def _field_parts(field) -> tuple[np.ndarray, np.ndarray | None]:
    points = getattr(field, "points", None)
    valid = getattr(field, "valid", None)
    if points is None:
        points = np.asarray(field, dtype=np.float64)
    if points.ndim != 3 or points.shape[-1] != 2:
        raise ValueError(f"field must be (rows, cols, 2), got shape {points.shape}")
    return points, valid


def resample(img, field, threads: int = 1) -> np.ndarray:
    """Resample an image through a coordinate field: out[i, j] = img(field[i, j]).

    ``field`` is either a bare (rows, cols, 2) array of source coordinates or
    an object with ``points`` and a boolean ``valid`` mask; points flagged
    invalid produce zeros in all channels. With ``threads > 1`` output rows
    are computed in parallel chunks; results are identical to threads=1.
    Output rank matches the input: (H, W) images come back without a
    channel axis.
    """
    squeeze = np.ndim(img) == 2
    image = as_image(img)
    points, valid = _field_parts(field)
    rows = points.shape[0]
    if threads < 1:
        raise ValueError("threads must be >= 1")

    def run(chunk: slice) -> np.ndarray:
        return bilinear_sample(image, points[chunk])

    if threads == 1 or rows < 2 * threads:
        out = run(slice(None))
    else:
        bounds = np.linspace(0, rows, threads + 1, dtype=int)
        chunks = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        out = np.empty((rows, points.shape[1], image.shape[2]), dtype=np.float64)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for chunk, part in zip(chunks, pool.map(run, chunks)):
                out[chunk] = part
    if valid is not None:
        valid = np.asarray(valid, dtype=bool)
        if valid.shape != points.shape[:2]:
            raise ValueError("validity mask shape does not match field")
        out[~valid] = 0.0
    if squeeze:
        out = out[..., 0]
    if image.dtype == np.float32:
        return out.astype(np.float32)
    return out


def upsample_grid(coarse, target) -> np.ndarray:
    """Bilinearly upsample a coarse (h, w, 2) control-point field to a dense grid.

    Evaluating at a location that coincides with a coarse grid point
    reproduces the coarse value to machine precision (exactly when the
    location snaps onto it).
    """
    points, _ = _field_parts(coarse)
    if points.shape[0] < 2 or points.shape[1] < 2:
        raise ValueError(f"coarse grid must be at least 2x2, got {points.shape[:2]}")
    target = _as_spec(target)
    return bilinear_sample(points, make_grid(target))


def psnr(a, b, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio (dB) between two arrays of equal shape."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)
