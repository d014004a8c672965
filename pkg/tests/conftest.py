"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from zoomwarp import GridSpec, SaliencyMap, upsample_grid


def smooth_saliency(rng: np.random.Generator, rows: int = 31, cols: int = 51,
                    lo: float = 0.5, hi: float = 2.0) -> SaliencyMap:
    """Random positive map, smooth by construction (coarse noise upsampled)."""
    coarse = rng.uniform(lo, hi, size=(5, 7))
    vals = upsample_grid(
        np.stack([coarse, np.zeros_like(coarse)], axis=-1), GridSpec(rows, cols)
    )[..., 0]
    return SaliencyMap(vals)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
