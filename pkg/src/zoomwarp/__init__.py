"""Saliency-guided zoom warps with efficient piecewise-bilinear inverses.

The package builds nonuniform image warps from saliency maps (salient regions
keep more samples when downsampling), inverts them in closed form tile by
tile, and verifies both directions numerically. See the README for the
pipeline and the command-line surface.
"""

from .core import (
    GridSpec,
    bilinear_sample,
    grid_axis,
    make_grid,
    psnr,
    resample,
    upsample_grid,
)
from .errors import (
    DegenerateSaliencyError,
    EmptyDomainError,
    FoldoverError,
    FormatError,
    InjectivityError,
)
from .grad import FdReport, fd_check, warp_jacobian_separable
from .saliency import (
    Box2D,
    KdeParams,
    average_pool,
    boundary_mask,
    boundary_saliency,
    kde_saliency,
    load_boxes,
    load_saliency,
    save_saliency,
)
from .unzoom import (
    BilinearTile,
    InverseCoeffs,
    InverseWarpField,
    WarpConfig,
    ZoomUnzoomResult,
    build_warp,
    forward_warp,
    inverse_bilinear,
    invert_nonseparable,
    invert_separable,
    invert_separable_axis,
    invert_warp,
    pyramid_inverse,
    pyramid_inverse_error,
    tile_coefficients,
    zoom_unzoom,
)
from .zoom import (
    AttractionKernel,
    SaliencyMap,
    SeparableWarp,
    WarpGrid,
    kernel_sigma,
    lz_warp,
    lz_warp_separable,
    magnification_map,
    separable_to_grid,
    warp_axis,
)

__version__ = "0.1.0"

__all__ = [
    "AttractionKernel",
    "BilinearTile",
    "Box2D",
    "DegenerateSaliencyError",
    "EmptyDomainError",
    "FdReport",
    "FoldoverError",
    "FormatError",
    "GridSpec",
    "InjectivityError",
    "InverseCoeffs",
    "InverseWarpField",
    "KdeParams",
    "SaliencyMap",
    "SeparableWarp",
    "WarpConfig",
    "WarpGrid",
    "ZoomUnzoomResult",
    "average_pool",
    "bilinear_sample",
    "boundary_mask",
    "boundary_saliency",
    "build_warp",
    "fd_check",
    "forward_warp",
    "grid_axis",
    "inverse_bilinear",
    "invert_nonseparable",
    "invert_separable",
    "invert_separable_axis",
    "invert_warp",
    "kde_saliency",
    "kernel_sigma",
    "load_boxes",
    "load_saliency",
    "lz_warp",
    "lz_warp_separable",
    "magnification_map",
    "make_grid",
    "psnr",
    "pyramid_inverse",
    "pyramid_inverse_error",
    "resample",
    "save_saliency",
    "separable_to_grid",
    "tile_coefficients",
    "upsample_grid",
    "warp_axis",
    "warp_jacobian_separable",
    "zoom_unzoom",
]
