"""Saliency map generators and file ingestion.

Two fixed generators are provided: a kernel-density estimate over box
centers (detection-style priors) and a semantic-boundary map pooled down
from a label image. Arbitrary maps can also be loaded from the dense-array
format. Warps are invariant to saliency scale, so none of these normalize.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .core import GridSpec, _as_spec, make_grid
from .errors import FormatError
from .zoom import SaliencyMap


@dataclass(frozen=True)
class Box2D:
    """An axis-aligned box in normalized image coordinates."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center must lie in [0,1]^2, got ({self.cx}, {self.cy})")
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box extents must be positive, got ({self.w}, {self.h})")


@dataclass(frozen=True)
class KdeParams:
    """Amplitude and bandwidth of the box-center density; bandwidth is in
    pixels at a declared reference resolution."""

    amplitude: float = 1.0
    bandwidth: float = 64.0

    def __post_init__(self) -> None:
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")


def kde_saliency(boxes, params: KdeParams, out, ref_resolution: tuple[int, int]) -> SaliencyMap:
    """Density of box centers on a grid: S = 1 + a * sum_i exp(-d_i^2 / 2b^2).

    Distances to box centers are measured in pixels at ``ref_resolution``
    (H, W), so bandwidth means the same thing regardless of grid size. Boxes
    contribute by center only. An empty box list gives the uniform baseline.
    """
    out = _as_spec(out)
    hpx, wpx = ref_resolution
    if hpx < 1 or wpx < 1:
        raise ValueError(f"reference resolution must be positive, got {ref_resolution}")
    grid = make_grid(out)
    vals = np.ones((out.rows, out.cols), dtype=np.float64)
    inv_two_b2 = 1.0 / (2.0 * params.bandwidth**2)
    for box in boxes:
        dx = (grid[..., 0] - box.cx) * wpx
        dy = (grid[..., 1] - box.cy) * hpx
        vals += params.amplitude * np.exp(-(dx * dx + dy * dy) * inv_two_b2)
    return SaliencyMap(vals)


def boundary_mask(labels) -> np.ndarray:
    """Mark pixels whose label differs from at least one of its 8 neighbors."""
    lab = np.asarray(labels)
    if lab.ndim != 2 or lab.size == 0:
        raise ValueError(f"labels must be a non-empty 2-D grid, got shape {lab.shape}")
    if not np.issubdtype(lab.dtype, np.integer):
        raise ValueError(f"labels must be integers, got dtype {lab.dtype}")
    hgt, wid = lab.shape
    mask = np.zeros(lab.shape, dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            r0, r1 = max(0, -dy), hgt - max(0, dy)
            c0, c1 = max(0, -dx), wid - max(0, dx)
            mask[r0:r1, c0:c1] |= (
                lab[r0:r1, c0:c1] != lab[r0 + dy:r1 + dy, c0 + dx:c1 + dx]
            )
    return mask


def _pool_matrix(n_in: int, n_out: int) -> np.ndarray:
    # P[o, i] = fraction of output window o covered by input cell i. Windows
    # have length n_in/n_out input cells; partial overlaps get fractional
    # weight, so rows always sum to 1 and pooling is an exact box filter.
    if n_out > n_in:
        raise ValueError(f"pooled size {n_out} exceeds input size {n_in}")
    step = n_in / n_out
    i = np.arange(n_in, dtype=np.float64)
    lo = np.arange(n_out, dtype=np.float64)[:, None] * step
    hi = lo + step
    overlap = np.minimum(hi, i + 1.0) - np.maximum(lo, i)
    return np.clip(overlap, 0.0, 1.0) / step


def average_pool(values, out) -> np.ndarray:
    """Average-pool a 2-D array to the target shape with an exact box filter.

    Unlike warp grids, pooled shapes may be as small as a single cell.
    """
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {vals.shape}")
    rows, cols = (out.rows, out.cols) if isinstance(out, GridSpec) else out
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise ValueError(f"pooled shape must be positive integers, got {out}")
    pr = _pool_matrix(vals.shape[0], int(rows))
    pc = _pool_matrix(vals.shape[1], int(cols))
    return pr @ vals @ pc.T


def boundary_saliency(labels, boundary_value: float = 200.0, background_value: float = 1.0,
                      out=GridSpec(45, 45)) -> SaliencyMap:
    """Saliency from label boundaries, average-pooled to a coarse grid."""
    if not boundary_value > background_value or not background_value > 0:
        raise ValueError(
            f"need boundary_value > background_value > 0, got "
            f"{boundary_value} and {background_value}"
        )
    mask = boundary_mask(labels)
    dense = np.where(mask, float(boundary_value), float(background_value))
    return SaliencyMap(average_pool(dense, out))


def save_saliency(saliency: SaliencyMap, path) -> None:
    io.save_array(path, saliency.values)


def load_saliency(path) -> SaliencyMap:
    arr = io.load_array(path)
    if arr.ndim != 2:
        raise FormatError(f"{path}: saliency file must be rank 2, got rank {arr.ndim}")
    return SaliencyMap(arr.astype(np.float64))


def load_boxes(path) -> list[Box2D]:
    """Parse a box list: one 'cx cy w h' line per box, '#' lines are comments."""
    boxes = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            cx, cy, w, h = (float(p) for p in parts)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        boxes.append(Box2D(cx=cx, cy=cy, w=w, h=h))
    return boxes
