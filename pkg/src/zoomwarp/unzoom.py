"""Warp inversion via piecewise-bilinear tiles.

A WarpGrid restricted to one grid cell is a bilinear map from that rectangle
onto a quadrilateral. Each such map is inverted in closed form: writing the
forward map as

    f(u, v) = (a0 + a1 u + a2 v + a3 u v,  b0 + b1 u + b2 v + b3 u v)

on the unit square, eliminating u yields the quadratic

    c2 v^2 + c1 v + c0 = 0

with c0 = a1 (b0 - y) + b1 (x - a0),
     c1 = a3 (b0 - y) + b3 (x - a0) + a1 b2 - a2 b1,
     c2 = a3 b2 - a2 b3,

then u = (x - a0 - a2 v)/(a1 + a3 v). Sweeping all tiles and committing the
solutions that land inside each tile's cell inverts the whole warp on a dense
output grid. Separable warps skip the quadratic entirely: each axis is a
piecewise-linear monotone map, inverted by binary search.

The sampled inverse is a left inverse of the piecewise interpolation of the
grid, not of the underlying smooth warp; composing the interpolated forward
map with it reproduces the identity to solver precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GridSpec, _as_spec, as_image, axis_locate, bilinear_sample, grid_axis, resample, upsample_grid
from .errors import EmptyDomainError, FoldoverError, InjectivityError
from .zoom import (
    AttractionKernel,
    SaliencyMap,
    SeparableWarp,
    WarpGrid,
    lz_warp,
    lz_warp_separable,
    separable_to_grid,
)

# Below this magnitude the quadratic's leading coefficient (or an interpolation
# denominator) is treated as zero and the degenerate branch is used.
_LINEAR_EPS = 1e-12
# Acceptance band around the unit square for inverse solutions; points on
# shared tile edges must be claimable by both tiles.
_UNIT_BAND = 1e-9
# Two tiles committing the same output point must agree to this tolerance
# (normalized units) or the grid is not injective.
_COMMIT_TOL = 1e-6


@dataclass(frozen=True)
class BilinearTile:
    """One warp tile: a grid cell and the quadrilateral it maps onto.

    ``bl``, ``br``, ``tl``, ``tr`` are the images of the cell's corners
    (bottom = smaller y). The cell itself is ``x_range`` x ``y_range``.
    """

    bl: np.ndarray
    br: np.ndarray
    tl: np.ndarray
    tr: np.ndarray
    x_range: tuple[float, float] = (0.0, 1.0)
    y_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("bl", "br", "tl", "tr"):
            c = np.asarray(getattr(self, name), dtype=np.float64)
            if c.shape != (2,) or not np.all(np.isfinite(c)):
                raise ValueError(f"corner {name} must be a finite 2-vector")
            object.__setattr__(self, name, c)
        if not (self.x_range[1] > self.x_range[0] and self.y_range[1] > self.y_range[0]):
            raise ValueError("tile domain rectangle is empty")
        # Shoelace area of bl -> br -> tr -> tl; zero means the quadrilateral
        # collapsed and the map has no inverse.
        quad = np.stack([self.bl, self.br, self.tr, self.tl])
        nxt = np.roll(quad, -1, axis=0)
        area = 0.5 * np.sum(quad[:, 0] * nxt[:, 1] - nxt[:, 0] * quad[:, 1])
        if area == 0.0:
            raise ValueError("degenerate tile: source quadrilateral has zero area")

    def forward(self, u, v) -> np.ndarray:
        """Evaluate the bilinear map at unit-square coordinates (u, v)."""
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        out = (
            self.bl * ((1 - u) * (1 - v))[..., None]
            + self.br * (u * (1 - v))[..., None]
            + self.tl * ((1 - u) * v)[..., None]
            + self.tr * (u * v)[..., None]
        )
        return out


@dataclass(frozen=True)
class InverseCoeffs:
    """Polynomial coefficients of a tile's bilinear map, x and y parts."""

    a: np.ndarray
    b: np.ndarray


def tile_coefficients(tile: BilinearTile) -> InverseCoeffs:
    a, b = _corner_coeffs(tile.bl[None], tile.br[None], tile.tl[None], tile.tr[None])
    return InverseCoeffs(a=a[0], b=b[0])


def _corner_coeffs(bl, br, tl, tr) -> tuple[np.ndarray, np.ndarray]:
    # Coefficient order: constant, u, v, uv.
    def one(k):
        return np.stack(
            [bl[..., k], br[..., k] - bl[..., k], tl[..., k] - bl[..., k],
             tr[..., k] - br[..., k] - tl[..., k] + bl[..., k]],
            axis=-1,
        )

    return one(0), one(1)


def _solve_unit_square(a, b, px, py):
    """Solve f(u, v) = (px, py) for all broadcasted tiles/points at once.

    ``a``/``b`` carry the four coefficients in a trailing axis. Returns
    (u, v, ok) where ok marks solutions inside the unit square (with an
    epsilon band); u and v are clipped into [0, 1] where ok.
    """
    a0, a1, a2, a3 = (a[..., k] for k in range(4))
    b0, b1, b2, b3 = (b[..., k] for k in range(4))
    dx = px - a0
    dy = py - b0
    c0 = -a1 * dy + b1 * dx
    c1 = -a3 * dy + b3 * dx + a1 * b2 - a2 * b1
    c2 = a3 * b2 - a2 * b3

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        quad = np.abs(c2) >= _LINEAR_EPS
        disc = c1 * c1 - 4.0 * c2 * c0
        # Cancellation can push an exactly-zero discriminant slightly
        # negative; forgive only that.
        scale = c1 * c1 + np.abs(4.0 * c2 * c0)
        disc = np.where((disc < 0) & (disc >= -1e-12 * scale), 0.0, disc)
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (c1 + np.where(c1 >= 0, 1.0, -1.0) * root)
        v1 = np.where(quad, q / c2, -c0 / c1)
        v2 = np.where(quad & (q != 0), c0 / q, np.nan)

        def u_of(v):
            den = a1 + a3 * v
            primary = np.abs(den) >= _LINEAR_EPS
            alt = b1 + b3 * v
            return np.where(
                primary,
                (dx - a2 * v) / np.where(primary, den, 1.0),
                (dy - b2 * v) / np.where(primary, 1.0, alt),
            )

        def admissible(u, v):
            return (
                np.isfinite(u) & np.isfinite(v)
                & (u >= -_UNIT_BAND) & (u <= 1.0 + _UNIT_BAND)
                & (v >= -_UNIT_BAND) & (v <= 1.0 + _UNIT_BAND)
            )

        def residual(u, v):
            rx = a0 + a1 * u + a2 * v + a3 * u * v - px
            ry = b0 + b1 * u + b2 * v + b3 * u * v - py
            return rx * rx + ry * ry

        u1 = u_of(v1)
        u2 = u_of(v2)
        ok1 = admissible(u1, v1)
        ok2 = admissible(u2, v2)
        # Both roots admissible only for (near-)degenerate tiles; keep the one
        # that better reproduces the query point.
        take2 = ok2 & (~ok1 | (residual(u2, v2) < residual(u1, v1)))
        u = np.where(take2, u2, u1)
        v = np.where(take2, v2, v1)
        ok = ok1 | ok2
        u = np.where(ok, np.clip(u, 0.0, 1.0), 0.0)
        v = np.where(ok, np.clip(v, 0.0, 1.0), 0.0)
    return u, v, ok


def inverse_bilinear(tile: BilinearTile, point) -> np.ndarray | None:
    """Invert one tile at one point.

    Returns the preimage in the tile's domain rectangle, or None when the
    point lies outside the tile's quadrilateral.
    """
    p = np.asarray(point, dtype=np.float64)
    if p.shape != (2,):
        raise ValueError("point must be a 2-vector")
    coeffs = tile_coefficients(tile)
    u, v, ok = _solve_unit_square(coeffs.a, coeffs.b, p[0], p[1])
    if not ok:
        return None
    x0, x1 = tile.x_range
    y0, y1 = tile.y_range
    return np.array([x0 + float(u) * (x1 - x0), y0 + float(v) * (y1 - y0)])


@dataclass(frozen=True)
class InverseWarpField:
    """Sampled left inverse on a uniform output grid.

    ``points[i, j]`` is the warp-domain preimage of output grid point (i, j);
    ``valid`` marks points inside the warp's range. Invalid points hold (0, 0)
    so the field can be consumed without masking.
    """

    points: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        val = np.asarray(self.valid, dtype=bool)
        if pts.ndim != 3 or pts.shape[2] != 2:
            raise ValueError(f"field points must be (rows, cols, 2), got {pts.shape}")
        if val.shape != pts.shape[:2]:
            raise ValueError("validity mask shape does not match points")
        if np.any(pts[val] < 0) or np.any(pts[val] > 1):
            raise ValueError("valid inverse points must lie in [0,1]^2")
        if np.any(pts[~val] != 0):
            raise ValueError("invalid inverse points must hold (0,0)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "valid", val)

    @property
    def shape(self) -> tuple[int, int]:
        return self.points.shape[:2]

    @property
    def coverage(self) -> float:
        """Fraction of output grid points with a defined preimage."""
        return float(np.count_nonzero(self.valid)) / self.valid.size

    def to_array(self) -> np.ndarray:
        """Pack as (rows, cols, 3): x, y, validity in {0, 1}."""
        out = np.empty(self.points.shape[:2] + (3,), dtype=np.float64)
        out[..., :2] = self.points
        out[..., 2] = self.valid
        return out

    @classmethod
    def from_array(cls, arr) -> "InverseWarpField":
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim != 3 or a.shape[2] != 3:
            raise ValueError(f"packed field must be (rows, cols, 3), got {a.shape}")
        valid = a[..., 2] != 0
        points = a[..., :2].copy()
        points[~valid] = 0.0
        return cls(points=points, valid=valid)


def forward_warp(grid: WarpGrid, points) -> np.ndarray:
    """Piecewise-bilinear forward evaluation of a warp grid at domain points."""
    return bilinear_sample(grid.points, points)


def invert_separable_axis(samples, queries) -> tuple[np.ndarray, np.ndarray]:
    """Invert a strictly increasing piecewise-linear axis map.

    ``samples`` are the warped positions of the n uniform axis points.
    Returns (values, valid): for in-range queries the unique preimage in
    [0, 1], zero and invalid outside [samples[0], samples[-1]].
    """
    t = np.asarray(samples, dtype=np.float64)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("samples must be a 1-D array of length >= 2")
    if np.any(np.diff(t) <= 0):
        raise FoldoverError("axis samples are not strictly increasing")
    q = np.asarray(queries, dtype=np.float64)
    n = t.size
    seg = np.clip(np.searchsorted(t, q, side="right") - 1, 0, n - 2)
    theta = (q - t[seg]) / (t[seg + 1] - t[seg])
    values = np.clip((seg + theta) / (n - 1), 0.0, 1.0)
    valid = (q >= t[0]) & (q <= t[-1])
    return np.where(valid, values, 0.0), valid


def invert_separable(warp: SeparableWarp, target) -> InverseWarpField:
    """Invert a separable warp onto a uniform output grid (axis-wise, exact)."""
    target = _as_spec(target)
    ux, okx = invert_separable_axis(warp.xs, grid_axis(target.cols))
    uy, oky = invert_separable_axis(warp.ys, grid_axis(target.rows))
    valid = oky[:, None] & okx[None, :]
    points = np.zeros((target.rows, target.cols, 2), dtype=np.float64)
    points[..., 0] = np.where(valid, ux[None, :], 0.0)
    points[..., 1] = np.where(valid, uy[:, None], 0.0)
    return InverseWarpField(points=points, valid=valid)


def _chunk_bounds(nx: np.ndarray, ny: np.ndarray, budget: int) -> list[tuple[int, int]]:
    # Tiles are padded to the chunk's max candidate-box size, so bound
    # chunk_len * max(nx) * max(ny) by the cell budget.
    bounds = []
    nt = nx.size
    start = 0
    while start < nt:
        end = start + 1
        mx, my = int(nx[start]), int(ny[start])
        while end < nt:
            cx = max(mx, int(nx[end]))
            cy = max(my, int(ny[end]))
            if (end - start + 1) * cx * cy > budget:
                break
            mx, my = cx, cy
            end += 1
        bounds.append((start, end))
        start = end
    return bounds


def invert_nonseparable(grid: WarpGrid, target, budget: int = 2_000_000) -> InverseWarpField:
    """Invert a general warp grid by sweeping its bilinear tiles.

    For each tile, output grid points inside the tile quadrilateral's bounding
    box are candidate preimages; the closed-form tile inverse keeps exactly
    those inside the unit square (epsilon-inclusive on shared edges). Each
    output point is committed once, in row-major tile order; a second tile
    claiming a point with a materially different preimage means the grid is
    not injective and raises InjectivityError.

    Tiles are processed in batches whose padded candidate arrays stay under
    ``budget`` cells, so memory is bounded regardless of warp strength.
    """
    target = _as_spec(target)
    T = grid.points
    h, w = T.shape[:2]
    H, W = target.rows, target.cols

    bl = T[:-1, :-1].reshape(-1, 2)
    br = T[:-1, 1:].reshape(-1, 2)
    tl = T[1:, :-1].reshape(-1, 2)
    tr = T[1:, 1:].reshape(-1, 2)
    a, b = _corner_coeffs(bl, br, tl, tr)
    nt = bl.shape[0]
    tile_i, tile_j = np.divmod(np.arange(nt), w - 1)

    cx = np.stack([bl[:, 0], br[:, 0], tl[:, 0], tr[:, 0]], axis=1)
    cy = np.stack([bl[:, 1], br[:, 1], tl[:, 1], tr[:, 1]], axis=1)
    # Candidate index windows; the 1e-6 index-unit slack keeps boundary grid
    # points candidates, the unit-square band does the real acceptance test.
    jx_lo = np.clip(np.ceil(cx.min(1) * (W - 1) - 1e-6).astype(np.int64), 0, W - 1)
    jx_hi = np.clip(np.floor(cx.max(1) * (W - 1) + 1e-6).astype(np.int64), 0, W - 1)
    iy_lo = np.clip(np.ceil(cy.min(1) * (H - 1) - 1e-6).astype(np.int64), 0, H - 1)
    iy_hi = np.clip(np.floor(cy.max(1) * (H - 1) + 1e-6).astype(np.int64), 0, H - 1)
    nx = np.maximum(jx_hi - jx_lo + 1, 0)
    ny = np.maximum(iy_hi - iy_lo + 1, 0)

    claim_idx: list[np.ndarray] = []
    claim_pts: list[np.ndarray] = []
    for start, end in _chunk_bounds(nx, ny, budget):
        sl = slice(start, end)
        bx = int(nx[sl].max(initial=0))
        by = int(ny[sl].max(initial=0))
        if bx == 0 or by == 0:
            continue
        jj = jx_lo[sl, None] + np.arange(bx)[None, :]
        ii = iy_lo[sl, None] + np.arange(by)[None, :]
        in_win = (jj <= jx_hi[sl, None])[:, None, :] & (ii <= iy_hi[sl, None])[:, :, None]
        jj = np.minimum(jj, W - 1)
        ii = np.minimum(ii, H - 1)
        px = (jj / (W - 1))[:, None, :]
        py = (ii / (H - 1))[:, :, None]
        u, v, ok = _solve_unit_square(a[sl, None, None, :], b[sl, None, None, :], px, py)
        ok &= in_win
        if not ok.any():
            continue
        c, yy, xx = np.nonzero(ok)
        flat = ii[c, yy] * W + jj[c, xx]
        dom = np.empty((flat.size, 2), dtype=np.float64)
        dom[:, 0] = (tile_j[start + c] + u[c, yy, xx]) / (w - 1)
        dom[:, 1] = (tile_i[start + c] + v[c, yy, xx]) / (h - 1)
        claim_idx.append(flat)
        claim_pts.append(dom)

    points = np.zeros((H * W, 2), dtype=np.float64)
    valid = np.zeros(H * W, dtype=bool)
    if claim_idx:
        idx = np.concatenate(claim_idx)
        pts = np.concatenate(claim_pts)
        order = np.argsort(idx, kind="stable")
        idx = idx[order]
        pts = pts[order]
        first = np.ones(idx.size, dtype=bool)
        first[1:] = idx[1:] != idx[:-1]
        owner = np.maximum.accumulate(np.where(first, np.arange(idx.size), 0))
        dup = ~first
        if np.any(dup):
            drift = np.abs(pts[dup] - pts[owner[dup]]).max()
            if drift > _COMMIT_TOL:
                raise InjectivityError(
                    f"two tiles claim one output point with preimages {drift:.3e} apart"
                )
        points[idx[first]] = pts[first]
        valid[idx[first]] = True
    return InverseWarpField(
        points=points.reshape(H, W, 2), valid=valid.reshape(H, W)
    )


def pyramid_inverse(field: InverseWarpField, levels) -> list[InverseWarpField]:
    """Downsample an inverse field to Grid(ceil(H/d), ceil(W/d)) per divisor.

    Coarse points are bilinear interpolations of the fine field; a coarse
    point is valid only if every fine point that contributes to it (positive
    interpolation weight) is valid.
    """
    H, W = field.shape
    out = []
    for d in levels:
        if int(d) != d or d < 1:
            raise ValueError(f"divisor must be a positive integer, got {d}")
        d = int(d)
        if d == 1:
            out.append(field)
            continue
        rows = math.ceil(H / d)
        cols = math.ceil(W / d)
        if rows < 2 or cols < 2:
            raise ValueError(f"divisor {d} leaves fewer than 2 grid samples")
        jx, tx = axis_locate(grid_axis(cols), W)
        iy, ty = axis_locate(grid_axis(rows), H)
        jx1 = np.minimum(jx + 1, W - 1)
        iy1 = np.minimum(iy + 1, H - 1)
        wts = [
            ((1 - ty)[:, None] * (1 - tx)[None, :], np.ix_(iy, jx)),
            ((1 - ty)[:, None] * tx[None, :], np.ix_(iy, jx1)),
            (ty[:, None] * (1 - tx)[None, :], np.ix_(iy1, jx)),
            (ty[:, None] * tx[None, :], np.ix_(iy1, jx1)),
        ]
        pts = np.zeros((rows, cols, 2), dtype=np.float64)
        ok = np.ones((rows, cols), dtype=bool)
        for wgt, sel in wts:
            pts += wgt[:, :, None] * field.points[sel]
            ok &= field.valid[sel] | (wgt == 0)
        pts = np.clip(pts, 0.0, 1.0)
        pts[~ok] = 0.0
        out.append(InverseWarpField(points=pts, valid=ok))
    return out


def pyramid_inverse_error(approx: InverseWarpField, exact: InverseWarpField,
                          image_dims: tuple[int, int]) -> float:
    """Mean Euclidean gap between two inverse fields, in pixels.

    ``image_dims`` is (H, W); normalized x gaps scale by W and y by H. Only
    points valid in both fields participate.
    """
    if approx.shape != exact.shape:
        raise ValueError(f"field shapes differ: {approx.shape} vs {exact.shape}")
    both = approx.valid & exact.valid
    if not both.any():
        raise EmptyDomainError("no points are valid in both fields")
    delta = approx.points[both] - exact.points[both]
    hpx, wpx = image_dims
    if hpx < 1 or wpx < 1:
        raise ValueError(f"image dims must be positive, got {image_dims}")
    return float(np.mean(np.hypot(delta[:, 0] * wpx, delta[:, 1] * hpx)))


@dataclass(frozen=True)
class WarpConfig:
    """Everything needed to build a warp and run it as zoom/unzoom."""

    grid: tuple[int, int] = (31, 51)
    fwhm: float = 22.0
    scale: float = 0.5
    separable: bool = True
    anti_cropping: bool = True
    marginalize: str = "max"
    truncation_radius: float = 4.0
    out_dims: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        GridSpec(*self.grid)
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.out_dims is not None:
            GridSpec(*self.out_dims)
        self.kernel()  # validates fwhm and truncation_radius

    def kernel(self) -> AttractionKernel:
        return AttractionKernel(fwhm=self.fwhm, truncation_radius=self.truncation_radius)

    def zoomed_dims(self, in_dims: tuple[int, int]) -> tuple[int, int]:
        if self.out_dims is not None:
            return self.out_dims
        return (
            max(2, round(in_dims[0] * self.scale)),
            max(2, round(in_dims[1] * self.scale)),
        )


@dataclass(frozen=True)
class WarpFields:
    """Intermediate products of a zoom/unzoom run, for inspection."""

    grid: WarpGrid
    forward: np.ndarray
    inverse: InverseWarpField
    separable: SeparableWarp | None = None


@dataclass(frozen=True)
class ZoomUnzoomResult:
    zoomed: np.ndarray
    unzoomed: np.ndarray
    fields: WarpFields

    def __iter__(self):
        return iter((self.zoomed, self.unzoomed, self.fields))


def build_warp(saliency: SaliencyMap, config: WarpConfig) -> tuple[WarpGrid, SeparableWarp | None]:
    """Construct the warp grid a config describes (and the axis form if separable)."""
    kernel = config.kernel()
    spec = GridSpec(*config.grid)
    if config.separable:
        sep = lz_warp_separable(saliency, kernel, spec,
                                anti_cropping=config.anti_cropping,
                                marginalize=config.marginalize)
        return separable_to_grid(sep), sep
    return lz_warp(saliency, kernel, spec, anti_cropping=config.anti_cropping), None


def invert_warp(grid: WarpGrid, separable: SeparableWarp | None, target) -> InverseWarpField:
    """Invert through the axis path when available, else the tile sweep."""
    if separable is not None:
        return invert_separable(separable, target)
    return invert_nonseparable(grid, target)


def zoom_unzoom(img, saliency: SaliencyMap, config: WarpConfig = WarpConfig(),
                threads: int = 1) -> ZoomUnzoomResult:
    """Zoom an image through a saliency warp, then unzoom back.

    The zoomed image samples the input at warped coordinates on the scaled
    output grid (salient regions keep more pixels); the unzoomed image pulls
    it back to the original resolution through the inverse field. Outside the
    warp's range (only possible without anti-cropping) the unzoomed image is
    zero-filled.
    """
    image = as_image(img)
    squeeze = np.ndim(img) == 2
    in_dims = (image.shape[0], image.shape[1])
    zoom_dims = config.zoomed_dims(in_dims)
    grid, sep = build_warp(saliency, config)
    fwd = upsample_grid(grid.points, GridSpec(*zoom_dims))
    zoomed = resample(image, fwd, threads=threads)
    inverse = invert_warp(grid, sep, GridSpec(*in_dims))
    unzoomed = resample(zoomed, inverse, threads=threads)
    if squeeze:
        zoomed = zoomed[..., 0]
        unzoomed = unzoomed[..., 0]
    return ZoomUnzoomResult(
        zoomed=zoomed,
        unzoomed=unzoomed,
        fields=WarpFields(grid=grid, forward=fwd, inverse=inverse, separable=sep),
    )
