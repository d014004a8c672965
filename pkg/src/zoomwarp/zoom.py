"""Saliency-guided zoom warps.

A saliency map S >= 0 on a uniform grid induces a warp

    T(x) = sum_i S_i k(x, x_i) x_i  /  sum_i S_i k(x, x_i)

where k is a truncated Gaussian attraction kernel and x_i are the saliency
sample locations. T pulls sample positions toward salient regions; resampling
an image through the densified T magnifies those regions. Because T is a
quotient, scaling S by any positive constant leaves it unchanged.

Two variants are provided:

* ``lz_warp`` evaluates the full 2-D quotient on a control grid. The kernel
  is a product of per-axis truncated Gaussian factors, so the double sums
  factor into three small matrix products.
* ``lz_warp_separable`` marginalizes S per axis and warps each axis
  independently, giving a Cartesian-product warp that admits an exact
  piecewise-linear inverse.

Anti-cropping keeps image corners fixed: the saliency is extended by mirror
reflection across each boundary (so boundary samples see a symmetric
neighborhood and stay put) and each axis is renormalized to span [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import GridSpec, grid_axis, make_grid, _as_spec
from .errors import DegenerateSaliencyError, FoldoverError

# FWHM of a Gaussian is sigma * 2*sqrt(2*ln 2).
_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def kernel_sigma(fwhm: float) -> float:
    """Convert a full-width-at-half-maximum to the Gaussian sigma."""
    if not fwhm > 0:
        raise ValueError(f"fwhm must be positive, got {fwhm}")
    return fwhm / _FWHM_PER_SIGMA


@dataclass(frozen=True)
class AttractionKernel:
    """Truncated Gaussian attraction kernel.

    ``fwhm`` and the truncation are expressed in saliency grid cells; the
    kernel is cut off beyond ``truncation_radius`` sigmas independently per
    axis, which keeps the 2-D kernel an exact product of its axis factors.
    """

    fwhm: float = 22.0
    truncation_radius: float = 4.0
    kind: str = "gaussian"

    def __post_init__(self) -> None:
        if not self.fwhm > 0:
            raise ValueError(f"fwhm must be positive, got {self.fwhm}")
        if not self.truncation_radius > 0:
            raise ValueError(f"truncation_radius must be positive, got {self.truncation_radius}")
        if self.kind != "gaussian":
            raise ValueError(f"unsupported kernel kind {self.kind!r}")

    @property
    def sigma(self) -> float:
        return kernel_sigma(self.fwhm)

    @property
    def radius_cells(self) -> float:
        """Support radius in saliency cells."""
        return self.truncation_radius * self.sigma


@dataclass(frozen=True)
class SaliencyMap:
    """Nonnegative 2-D saliency values on a uniform grid, not all zero."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError(f"saliency must be 2-D, got shape {vals.shape}")
        if vals.shape[0] < 2 or vals.shape[1] < 2:
            raise ValueError(f"saliency grid must be at least 2x2, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("saliency values must be finite")
        if np.any(vals < 0):
            raise ValueError("saliency values must be nonnegative")
        if not np.any(vals > 0):
            raise ValueError("saliency map must have positive mass somewhere")
        object.__setattr__(self, "values", vals)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def marginal(self, axis: str, how: str = "max") -> np.ndarray:
        """Collapse to a 1-D saliency along 'x' or 'y'.

        ``max`` keeps a small salient object influential across its whole
        row/column band and is the default; ``mean`` dilutes small objects
        on large grids.
        """
        if axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
        reduce_axis = 0 if axis == "x" else 1
        if how == "max":
            return self.values.max(axis=reduce_axis)
        if how == "mean":
            return self.values.mean(axis=reduce_axis)
        raise ValueError(f"marginalization must be 'max' or 'mean', got {how!r}")


@dataclass(frozen=True)
class WarpGrid:
    """Warped control-point positions T over a uniform domain grid.

    ``points[i, j]`` is T of domain point (j/(cols-1), i/(rows-1)). Grids are
    validated to be fold-free: x must strictly increase along rows and y along
    columns.
    """

    points: np.ndarray
    anti_cropping: bool = True
    separable: bool = False

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[2] != 2:
            raise ValueError(f"warp grid must be (rows, cols, 2), got shape {pts.shape}")
        if pts.shape[0] < 2 or pts.shape[1] < 2:
            raise ValueError(f"warp grid must be at least 2x2, got {pts.shape[:2]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("warp grid values must be finite")
        validate_no_foldover(pts)
        object.__setattr__(self, "points", pts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape[:2]


def validate_no_foldover(points: np.ndarray) -> None:
    """Reject grids whose sample lines cross (non-invertible warps)."""
    if np.any(np.diff(points[..., 0], axis=1) <= 0):
        raise FoldoverError("warp grid folds over: x not strictly increasing along rows")
    if np.any(np.diff(points[..., 1], axis=0) <= 0):
        raise FoldoverError("warp grid folds over: y not strictly increasing along columns")


@dataclass(frozen=True)
class SeparableWarp:
    """Axis-factored warp: T(x, y) = (tx(x), ty(y)) given by per-axis samples."""

    xs: np.ndarray
    ys: np.ndarray
    anti_cropping: bool = True

    def __post_init__(self) -> None:
        for name, arr in (("xs", self.xs), ("ys", self.ys)):
            a = np.asarray(arr, dtype=np.float64)
            if a.ndim != 1 or a.size < 2:
                raise ValueError(f"{name} must be a 1-D array of length >= 2")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} must be finite")
            if np.any(np.diff(a) <= 0):
                raise FoldoverError(f"axis warp {name} is not strictly increasing")
            object.__setattr__(self, name, a)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ys.size, self.xs.size)


def _reflect_indices(idx: np.ndarray, n: int) -> np.ndarray:
    # Mirror about both edge samples: ..., 2, 1, 0, 1, ..., n-1, n-2, ...
    period = 2 * (n - 1)
    m = np.mod(idx, period)
    return np.where(m > n - 1, period - m, m)


def _axis_system(n_sal: int, kernel: AttractionKernel, ctrl_cells: np.ndarray, extend: bool):
    """Per-axis kernel weights against (possibly reflect-extended) samples.

    Returns (weights, positions, source) where weights is
    (n_ctrl, n_support), positions are the support sample coordinates in
    normalized units, and source maps support samples to saliency indices.
    """
    sigma = kernel.sigma
    radius = kernel.radius_cells
    if extend:
        pad = int(math.ceil(radius))
        idx = np.arange(-pad, n_sal + pad)
    else:
        idx = np.arange(n_sal)
    d = ctrl_cells[:, None] - idx[None, :]
    w = np.exp(-0.5 * (d / sigma) ** 2)
    w[np.abs(d) > radius] = 0.0
    pos = idx / (n_sal - 1)
    src = _reflect_indices(idx, n_sal) if extend else idx
    return w, pos, src


def _renormalize_axis(t: np.ndarray) -> np.ndarray:
    span = t[-1] - t[0]
    if not span > 0:
        raise FoldoverError("warp collapsed: axis endpoints do not span a positive range")
    t = (t - t[0]) / span
    t[0] = 0.0
    t[-1] = 1.0
    return t


def warp_axis(saliency_1d, kernel: AttractionKernel, n_out: int | None = None,
              anti_cropping: bool = True) -> np.ndarray:
    """Warp one axis by a 1-D saliency. Returns n_out strictly increasing samples.

    With anti-cropping the result spans [0, 1] exactly; otherwise raw kernel
    averages are returned, which pull away from the boundary.
    """
    s = np.asarray(saliency_1d, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise ValueError("axis saliency must be a 1-D array of length >= 2")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("axis saliency must be finite and nonnegative")
    if not np.any(s > 0):
        raise ValueError("axis saliency must have positive mass somewhere")
    n = s.size
    if n_out is None:
        n_out = n
    ctrl = grid_axis(n_out) * (n - 1)
    w, pos, src = _axis_system(n, kernel, ctrl, extend=anti_cropping)
    sal = s[src]
    den = w @ sal
    if not np.all(den > 0) or not np.all(np.isfinite(den)):
        raise DegenerateSaliencyError(
            "kernel-weighted saliency mass vanished at some sample; "
            "increase fwhm or truncation_radius, or fill the saliency map"
        )
    t = (w @ (sal * pos)) / den
    if anti_cropping:
        t = _renormalize_axis(t)
    if np.any(np.diff(t) <= 0):
        raise FoldoverError("axis warp is not strictly increasing (saliency too concentrated)")
    return t


def lz_warp(saliency: SaliencyMap, kernel: AttractionKernel, spec=None,
            anti_cropping: bool = True) -> WarpGrid:
    """Evaluate the full 2-D attraction warp on a control grid.

    The kernel factors per axis, so with control points forming a grid the
    quotient reduces to matrix products: denominator WY @ S @ WX^T and
    numerators with position-weighted WX (resp. WY). Cost is
    O(rows*cols*support) instead of O(rows*cols * saliency size).

    Parameters
    ----------
    spec : GridSpec or (rows, cols), optional
        Control grid dimensions; defaults to the saliency dimensions.
    """
    h_sal, w_sal = saliency.shape
    spec = _as_spec(spec) if spec is not None else GridSpec(h_sal, w_sal)
    ctrl_y = grid_axis(spec.rows) * (h_sal - 1)
    ctrl_x = grid_axis(spec.cols) * (w_sal - 1)
    wy, pos_y, src_y = _axis_system(h_sal, kernel, ctrl_y, extend=anti_cropping)
    wx, pos_x, src_x = _axis_system(w_sal, kernel, ctrl_x, extend=anti_cropping)
    sal = saliency.values[np.ix_(src_y, src_x)]

    den = wy @ sal @ wx.T
    if not np.all(den > 0) or not np.all(np.isfinite(den)):
        raise DegenerateSaliencyError(
            "kernel-weighted saliency mass vanished at some control point"
        )
    tx = (wy @ sal @ (wx * pos_x[None, :]).T) / den
    ty = ((wy * pos_y[None, :]) @ sal @ wx.T) / den

    if anti_cropping:
        for t in (tx, ty):
            span = t.max() - t.min()
            if not span > 0:
                raise FoldoverError("warp collapsed: control points span no area")
        tx = (tx - tx.min()) / (tx.max() - tx.min())
        ty = (ty - ty.min()) / (ty.max() - ty.min())
        # Mirror extension makes boundary control points exact fixed points
        # of the raw warp; after renormalization they are 0/1 up to rounding,
        # so pin them.
        tx[:, 0] = 0.0
        tx[:, -1] = 1.0
        ty[0, :] = 0.0
        ty[-1, :] = 1.0

    points = np.stack([tx, ty], axis=-1)
    return WarpGrid(points, anti_cropping=anti_cropping, separable=False)


def lz_warp_separable(saliency: SaliencyMap, kernel: AttractionKernel, spec=None,
                      anti_cropping: bool = True, marginalize: str = "max") -> SeparableWarp:
    """Axis-factored warp from per-axis saliency marginals."""
    h_sal, w_sal = saliency.shape
    spec = _as_spec(spec) if spec is not None else GridSpec(h_sal, w_sal)
    xs = warp_axis(saliency.marginal("x", marginalize), kernel, spec.cols, anti_cropping)
    ys = warp_axis(saliency.marginal("y", marginalize), kernel, spec.rows, anti_cropping)
    return SeparableWarp(xs=xs, ys=ys, anti_cropping=anti_cropping)


def separable_to_grid(warp: SeparableWarp) -> WarpGrid:
    """Expand a separable warp to its Cartesian-product WarpGrid."""
    points = np.empty((warp.ys.size, warp.xs.size, 2), dtype=np.float64)
    points[..., 0] = warp.xs[None, :]
    points[..., 1] = warp.ys[:, None]
    return WarpGrid(points, anti_cropping=warp.anti_cropping, separable=True)


def magnification_map(grid: WarpGrid) -> np.ndarray:
    """Per-tile magnification: domain tile area / warped tile area.

    Values above 1 mean the warp compresses that tile in the output, so
    resampling through the densified warp renders it larger (zoomed in).
    Raises FoldoverError if any warped tile is degenerate or flipped.
    """
    pts = grid.points
    rows, cols = pts.shape[:2]
    bl = pts[:-1, :-1]
    br = pts[:-1, 1:]
    tr = pts[1:, 1:]
    tl = pts[1:, :-1]
    # Shoelace over the cycle bl -> br -> tr -> tl; positive for tiles that
    # preserve the domain orientation.
    area = 0.5 * (
        bl[..., 0] * br[..., 1] - br[..., 0] * bl[..., 1]
        + br[..., 0] * tr[..., 1] - tr[..., 0] * br[..., 1]
        + tr[..., 0] * tl[..., 1] - tl[..., 0] * tr[..., 1]
        + tl[..., 0] * bl[..., 1] - bl[..., 0] * tl[..., 1]
    )
    if np.any(area <= 0):
        raise FoldoverError("warped tile is degenerate or flipped")
    domain_area = 1.0 / ((rows - 1) * (cols - 1))
    return domain_area / area
