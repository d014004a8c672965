"""Analytic derivatives of axis warps with respect to saliency.

The axis warp is a quotient T_k = N_k / D_k with N_k = sum_e W_ke s_e p_e and
D_k = sum_e W_ke s_e, summed over (possibly mirror-extended) samples e.
Differentiating by the underlying saliency entry m accumulates over every
extension copy of m:

    dT_k/dS_m = sum_{e: src(e)=m} W_ke (p_e - T_k) / D_k

Anti-cropping renormalizes t = (T - T_0)/(T_last - T_0), whose chain rule
mixes in the first and last rows. Because T is scale-invariant in S, every
Jacobian satisfies sum_m S_m J[k, m] = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import grid_axis
from .errors import DegenerateSaliencyError, FoldoverError
from .zoom import AttractionKernel, _axis_system


def warp_jacobian_separable(saliency_axis, kernel: AttractionKernel,
                            anti_cropping: bool = True) -> np.ndarray:
    """Jacobian of the 1-D axis warp at its own sample points.

    Returns J of shape (n, n) with J[k, m] = d(warped position k)/d(saliency m),
    differentiating exactly the map warp_axis computes (including mirror
    extension and renormalization when anti_cropping is set).
    """
    s = np.asarray(saliency_axis, dtype=np.float64)
    if s.ndim != 1 or s.size < 2:
        raise ValueError("axis saliency must be a 1-D array of length >= 2")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("axis saliency must be finite and nonnegative")
    n = s.size
    ctrl = grid_axis(n) * (n - 1)
    w, pos, src = _axis_system(n, kernel, ctrl, extend=anti_cropping)
    sal = s[src]
    den = w @ sal
    if not np.all(den > 0) or not np.all(np.isfinite(den)):
        raise DegenerateSaliencyError("kernel-weighted saliency mass vanished")
    t_raw = (w @ (sal * pos)) / den

    # d t_raw[k] / d sal_ext[e], then fold extension copies onto sources.
    per_copy = w * (pos[None, :] - t_raw[:, None]) / den[:, None]
    gather = (src[:, None] == np.arange(n)[None, :]).astype(np.float64)
    j_raw = per_copy @ gather
    if not anti_cropping:
        return j_raw

    span = t_raw[-1] - t_raw[0]
    if not span > 0:
        raise FoldoverError("warp collapsed: axis endpoints do not span a positive range")
    # t = (t_raw - t_raw[0]) / span; quotient rule against the span.
    num = (j_raw - j_raw[0]) * span - (t_raw - t_raw[0])[:, None] * (j_raw[-1] - j_raw[0])
    return num / span**2


@dataclass(frozen=True)
class FdReport:
    """Outcome of a finite-difference Jacobian check."""

    max_abs_error: float
    max_rel_error: float
    failures: tuple[tuple[int, int], ...]
    fd: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return not self.failures


def fd_check(fn, jacobian, s, step: float = 1e-6, tolerance: float = 1e-4,
             rel_floor: float = 1e-4) -> FdReport:
    """Compare an analytic Jacobian against central finite differences.

    ``fn`` maps a saliency vector to a vector of warped positions. Relative
    error uses max(|analytic|, |fd|, rel_floor) as denominator so entries that
    are exactly zero (outside kernel support) do not amplify FD noise.
    Failing indices are reported in row-major order.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    s = np.asarray(s, dtype=np.float64)
    jac = np.asarray(jacobian, dtype=np.float64)
    fd = np.empty_like(jac)
    for m in range(s.size):
        bump = np.zeros_like(s)
        bump[m] = step
        fd[:, m] = (np.asarray(fn(s + bump)) - np.asarray(fn(s - bump))) / (2.0 * step)
    if fd.shape != jac.shape:
        raise ValueError(f"jacobian shape {jac.shape} does not match fd shape {fd.shape}")
    abs_err = np.abs(jac - fd)
    rel_err = abs_err / np.maximum(np.maximum(np.abs(jac), np.abs(fd)), rel_floor)
    bad = np.argwhere(rel_err > tolerance)
    return FdReport(
        max_abs_error=float(abs_err.max()),
        max_rel_error=float(rel_err.max()),
        failures=tuple((int(r), int(c)) for r, c in bad),
        fd=fd,
    )
