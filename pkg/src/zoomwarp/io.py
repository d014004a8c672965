"""File I/O: the dense-array container, PNG images, and label maps.

Dense-array container layout (all integers little-endian):

    bytes 0..3   magic b"LZU0"
    bytes 4..7   rank r as uint32
    next 4*r     dims as uint32 each
    rest         float32 payload, row-major, little-endian

Round trips are bit-exact: load(save(a)) returns the same float32 values.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"LZU0"
_MAX_RANK = 16


def save_array(path, arr) -> None:
    """Write an array to the dense-array container as float32."""
    a = np.ascontiguousarray(np.asarray(arr), dtype="<f4")
    if a.ndim < 1 or a.ndim > _MAX_RANK:
        raise ValueError(f"rank must be in [1, {_MAX_RANK}], got {a.ndim}")
    if a.size == 0:
        raise ValueError("refusing to write an empty array")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", a.ndim))
        fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
        fh.write(a.tobytes(order="C"))


def load_array(path) -> np.ndarray:
    """Read a dense-array container. Returns float32, shape as stored."""
    blob = Path(path).read_bytes()
    if len(blob) < 8 or blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic, not a dense-array file")
    (rank,) = struct.unpack_from("<I", blob, 4)
    if rank < 1 or rank > _MAX_RANK:
        raise FormatError(f"{path}: unreasonable rank {rank}")
    header_end = 8 + 4 * rank
    if len(blob) < header_end:
        raise FormatError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{rank}I", blob, 8)
    if any(d < 1 for d in dims):
        raise FormatError(f"{path}: zero-sized dimension in {dims}")
    count = int(np.prod(dims, dtype=np.int64))
    expected = header_end + 4 * count
    if len(blob) != expected:
        raise FormatError(
            f"{path}: payload is {len(blob) - header_end} bytes, expected {4 * count}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=header_end, count=count)
    return data.reshape(dims).copy()


def load_image(path) -> np.ndarray:
    """Load an 8-bit PNG (or other PIL-readable image) as (H, W, C) float64.

    Grayscale maps to C=1, everything else is converted to RGB (C=3).
    Values are in [0, 255].
    """
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.float64)[:, :, None]
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64)
    return arr


def save_image(path, img) -> None:
    """Write an image array as an 8-bit PNG, clipping to [0, 255] and rounding."""
    from PIL import Image

    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W), (H, W, 1) or (H, W, 3), got {arr.shape}")
    data = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    if data.shape[2] == 1:
        Image.fromarray(data[:, :, 0], mode="L").save(path)
    else:
        Image.fromarray(data, mode="RGB").save(path)


def load_labels(path) -> np.ndarray:
    """Load an integer label map from an 8- or 16-bit single-channel PNG."""
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.int32)
        if im.mode in ("I", "I;16", "I;16B", "I;16L"):
            return np.asarray(im.convert("I"), dtype=np.int32)
        raise FormatError(f"{path}: label maps must be single-channel, got mode {im.mode}")


def save_heatmap(path, values, cmap: str = "viridis") -> None:
    """Write a 2-D scalar field as a false-color PNG (min-max normalized)."""
    import matplotlib

    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 2:
        raise ValueError(f"heatmap input must be 2-D, got shape {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("heatmap values must be finite")
    lo, hi = float(vals.min()), float(vals.max())
    norm = np.zeros_like(vals) if hi == lo else (vals - lo) / (hi - lo)
    rgba = matplotlib.colormaps[cmap](norm)
    save_image(path, rgba[:, :, :3] * 255.0)
