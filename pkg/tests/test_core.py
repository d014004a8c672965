"""Grid construction, bilinear sampling, and resampling."""

import numpy as np
import numpy.testing as npt
import pytest

import oracles
from zoomwarp import GridSpec, bilinear_sample, grid_axis, make_grid, psnr, resample, upsample_grid
from zoomwarp.core import axis_locate
from zoomwarp.unzoom import InverseWarpField


class TestGridSpec:
    def test_shape(self):
        assert GridSpec(3, 5).shape == (3, 5)

    @pytest.mark.parametrize("rows,cols", [(1, 5), (5, 1), (0, 0), (-2, 3)])
    def test_rejects_degenerate(self, rows, cols):
        with pytest.raises(ValueError):
            GridSpec(rows, cols)

    def test_rejects_fractional(self):
        with pytest.raises(ValueError):
            GridSpec(2.5, 4)


class TestGridAxis:
    def test_endpoints_exact(self):
        for n in (2, 3, 7, 600, 961):
            ax = grid_axis(n)
            assert ax[0] == 0.0
            assert ax[-1] == 1.0
            assert np.all(np.diff(ax) > 0)

    def test_known_values(self):
        npt.assert_array_equal(grid_axis(3), [0.0, 0.5, 1.0])
        npt.assert_allclose(grid_axis(5), [0.0, 0.25, 0.5, 0.75, 1.0], rtol=0, atol=0)

    def test_too_short(self):
        with pytest.raises(ValueError):
            grid_axis(1)


class TestMakeGrid:
    def test_layout(self):
        g = make_grid(GridSpec(2, 3))
        assert g.shape == (2, 3, 2)
        npt.assert_array_equal(g[0, 0], [0.0, 0.0])
        npt.assert_array_equal(g[0, 2], [1.0, 0.0])
        npt.assert_array_equal(g[1, 0], [0.0, 1.0])
        npt.assert_array_equal(g[0, 1], [0.5, 0.0])

    def test_accepts_tuple(self):
        npt.assert_array_equal(make_grid((2, 2)), make_grid(GridSpec(2, 2)))


class TestAxisLocate:
    def test_snaps_near_integer(self):
        # 15/22 * 22 is one ulp off 15; locate must land exactly on sample 15.
        base, frac = axis_locate(np.array([15 / 22]), 23)
        assert base[0] == 15
        assert frac[0] == 0.0

    def test_clamps_outside(self):
        base, frac = axis_locate(np.array([-0.5, 1.5]), 11)
        assert base[0] == 0 and frac[0] == 0.0
        assert base[1] == 9 and frac[1] == 1.0


class TestBilinearSample:
    def test_exact_at_grid_points(self, rng):
        vals = rng.normal(size=(9, 13))
        g = make_grid(GridSpec(9, 13))
        out = bilinear_sample(vals, g)
        npt.assert_array_equal(out, vals)

    def test_matches_scalar_oracle(self, rng):
        vals = rng.normal(size=(7, 5, 3))
        pts = rng.uniform(-0.2, 1.2, size=(40, 2))
        got = bilinear_sample(vals, pts)
        want = np.array([oracles.scalar_bilinear(vals, x, y) for x, y in pts])
        npt.assert_allclose(got, want, rtol=0, atol=1e-14)

    def test_midpoint_hand_value(self):
        vals = np.array([[0.0, 2.0], [4.0, 10.0]])
        out = bilinear_sample(vals, np.array([0.5, 0.5]))
        assert out == pytest.approx(4.0)  # (0+2+4+10)/4

    def test_channel_shapes(self, rng):
        vals = rng.normal(size=(4, 4, 2))
        pts = rng.uniform(0, 1, size=(3, 5, 2))
        assert bilinear_sample(vals, pts).shape == (3, 5, 2)
        assert bilinear_sample(vals[..., 0], pts).shape == (3, 5)

    def test_rejects_bad_trailing_dim(self):
        with pytest.raises(ValueError):
            bilinear_sample(np.zeros((3, 3)), np.zeros((4, 3)))


class TestResample:
    def test_identity_field_is_bitwise_identity(self, rng):
        for dtype in (np.float64, np.float32):
            img = rng.uniform(0, 255, size=(23, 31, 3)).astype(dtype)
            out = resample(img, make_grid(GridSpec(23, 31)))
            assert out.dtype == dtype
            npt.assert_array_equal(out, img)

    def test_validity_zero_fill(self):
        img = np.full((4, 4, 1), 7.0)
        pts = make_grid(GridSpec(4, 4))
        valid = np.ones((4, 4), dtype=bool)
        valid[1, 2] = False
        field = InverseWarpField(points=np.where(valid[..., None], pts, 0.0), valid=valid)
        out = resample(img, field)
        assert out[1, 2, 0] == 0.0
        assert out[0, 0, 0] == 7.0

    def test_threads_match_single(self, rng):
        img = rng.uniform(0, 1, size=(37, 29, 3))
        pts = rng.uniform(0, 1, size=(50, 40, 2))
        npt.assert_array_equal(resample(img, pts), resample(img, pts, threads=4))

    def test_rejects_bad_threads(self):
        with pytest.raises(ValueError):
            resample(np.zeros((2, 2)), make_grid((2, 2)), threads=0)


class TestUpsampleGrid:
    def test_reproduces_coarse_at_aligned_points(self, rng):
        coarse = rng.uniform(0, 1, size=(5, 9, 2))
        fine = upsample_grid(coarse, GridSpec(9, 17))  # 2x: every other point aligns
        npt.assert_array_equal(fine[::2, ::2], coarse)

    def test_linear_interior(self):
        coarse = make_grid(GridSpec(3, 3))  # identity control points
        fine = upsample_grid(coarse, GridSpec(5, 5))
        npt.assert_allclose(fine, make_grid(GridSpec(5, 5)), atol=1e-15)

    def test_rejects_tiny_coarse(self):
        with pytest.raises(ValueError):
            upsample_grid(np.zeros((1, 4, 2)), GridSpec(5, 5))


class TestPsnr:
    def test_identical_is_inf(self):
        assert psnr(np.ones((4, 4)), np.ones((4, 4))) == np.inf

    def test_hand_value(self):
        a = np.zeros((2, 2))
        b = np.full((2, 2), 16.0)  # mse 256 -> 10*log10(255^2/256)
        assert psnr(a, b) == pytest.approx(10 * np.log10(255.0**2 / 256.0))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            psnr(np.zeros((2, 2)), np.zeros((3, 2)))
