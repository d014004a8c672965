"""Saliency generators: box-center density, label boundaries, pooling."""

import numpy as np
import numpy.testing as npt
import pytest

import oracles
from zoomwarp import (
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
from zoomwarp.errors import FormatError
from zoomwarp.zoom import SaliencyMap

REF = (1200, 1920)


class TestBox2D:
    def test_accepts_normalized_box(self):
        b = Box2D(cx=0.5, cy=0.25, w=0.1, h=0.2)
        assert (b.cx, b.cy, b.w, b.h) == (0.5, 0.25, 0.1, 0.2)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"cx": -0.1, "cy": 0.5, "w": 0.1, "h": 0.1},
            {"cx": 0.5, "cy": 1.5, "w": 0.1, "h": 0.1},
            {"cx": 0.5, "cy": 0.5, "w": 0.0, "h": 0.1},
            {"cx": 0.5, "cy": 0.5, "w": 0.1, "h": -2.0},
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            Box2D(**kwargs)


class TestKdeParams:
    def test_defaults(self):
        p = KdeParams()
        assert p.amplitude == 1.0
        assert p.bandwidth == 64.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            KdeParams(amplitude=0.0)
        with pytest.raises(ValueError):
            KdeParams(bandwidth=-1.0)


class TestKdeSaliency:
    def test_empty_boxes_is_uniform_one(self):
        s = kde_saliency([], KdeParams(), (31, 51), REF)
        npt.assert_array_equal(s.values, np.ones((31, 51)))

    def test_peak_at_box_center(self):
        # A box centered on a grid point contributes exactly its amplitude
        # there, and strictly less everywhere else.
        s = kde_saliency([Box2D(0.5, 0.5, 0.1, 0.1)], KdeParams(amplitude=3.0), (21, 21), REF)
        assert s.values[10, 10] == pytest.approx(4.0)
        rest = np.delete(s.values.ravel(), 10 * 21 + 10)
        assert rest.max() < 4.0

    def test_bandwidth_hand_value(self):
        # One grid step right of the center is 1920/20 = 96 px; with b = 96
        # the Gaussian drops to exp(-1/2).
        s = kde_saliency([Box2D(0.5, 0.5, 0.1, 0.1)], KdeParams(amplitude=1.0, bandwidth=96.0),
                         (21, 21), REF)
        npt.assert_allclose(s.values[10, 11], 1.0 + np.exp(-0.5), rtol=1e-12)

    def test_tiny_amplitude_is_nearly_uniform(self):
        boxes = [Box2D(0.3, 0.3, 0.1, 0.1), Box2D(0.7, 0.6, 0.1, 0.1)]
        s = kde_saliency(boxes, KdeParams(amplitude=1e-12), (31, 51), REF)
        npt.assert_allclose(s.values, 1.0, atol=1e-9)

    def test_matches_scalar_oracle(self, rng):
        boxes = [Box2D(cx, cy, 0.05, 0.05)
                 for cx, cy in rng.uniform(0.1, 0.9, size=(5, 2))]
        s = kde_saliency(boxes, KdeParams(amplitude=2.0, bandwidth=80.0), (9, 13), REF)
        centers = [(b.cx, b.cy) for b in boxes]
        expected = oracles.kde_oracle(centers, 2.0, 80.0, 9, 13, *REF)
        npt.assert_allclose(s.values, expected, rtol=1e-12)

    def test_mirror_symmetry(self):
        boxes = [Box2D(0.25, 0.4, 0.1, 0.1)]
        mirrored = [Box2D(0.75, 0.4, 0.1, 0.1)]
        a = kde_saliency(boxes, KdeParams(), (15, 21), REF).values
        b = kde_saliency(mirrored, KdeParams(), (15, 21), REF).values
        npt.assert_allclose(b, a[:, ::-1], atol=1e-12)

    def test_box_extent_is_ignored(self):
        # Only centers enter the density.
        a = kde_saliency([Box2D(0.5, 0.5, 0.01, 0.01)], KdeParams(), (9, 9), REF).values
        b = kde_saliency([Box2D(0.5, 0.5, 0.9, 0.9)], KdeParams(), (9, 9), REF).values
        npt.assert_array_equal(a, b)

    def test_rejects_bad_reference(self):
        with pytest.raises(ValueError):
            kde_saliency([], KdeParams(), (9, 9), (0, 1920))


class TestBoundaryMask:
    def test_constant_labels_have_no_boundary(self):
        assert not boundary_mask(np.full((6, 7), 3, dtype=np.int32)).any()

    def test_vertical_split_hand_case(self):
        lab = np.zeros((8, 8), dtype=np.int32)
        lab[:, 4:] = 1
        mask = boundary_mask(lab)
        expected = np.zeros((8, 8), dtype=bool)
        expected[:, 3:5] = True  # one band on each side of the edge
        npt.assert_array_equal(mask, expected)

    def test_single_pixel_marks_eight_neighbors(self):
        lab = np.zeros((5, 5), dtype=np.int32)
        lab[2, 2] = 9
        mask = boundary_mask(lab)
        expected = np.zeros((5, 5), dtype=bool)
        expected[1:4, 1:4] = True
        npt.assert_array_equal(mask, expected)

    def test_diagonal_neighbors_count(self):
        lab = np.array([[0, 1], [1, 0]], dtype=np.int32)
        assert boundary_mask(lab).all()

    def test_matches_scan_oracle(self, rng):
        for _ in range(5):
            lab = rng.integers(0, 4, size=(11, 14)).astype(np.int32)
            npt.assert_array_equal(boundary_mask(lab), oracles.boundary_oracle(lab))

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            boundary_mask(np.zeros((3, 3)))  # floats
        with pytest.raises(ValueError):
            boundary_mask(np.zeros(5, dtype=np.int32))


class TestAveragePool:
    def test_identity_when_shapes_match(self, rng):
        vals = rng.uniform(0, 1, size=(6, 9))
        npt.assert_allclose(average_pool(vals, (6, 9)), vals, atol=1e-15)

    def test_exact_block_mean_hand_case(self):
        vals = np.array([[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]])
        npt.assert_allclose(average_pool(vals, (1, 2)), [[3.5, 5.5]])
        npt.assert_allclose(average_pool(vals, (2, 2)), [[1.5, 3.5], [5.5, 7.5]])

    def test_fractional_windows_hand_case(self):
        # Pool 3 cells into 2: each window spans 1.5 cells, so the middle
        # cell contributes half its value to each window.
        vals = np.array([[3.0, 6.0, 9.0]])
        npt.assert_allclose(average_pool(vals, (1, 2)), [[4.0, 8.0]])

    def test_preserves_mean(self, rng):
        vals = rng.uniform(0, 5, size=(30, 30))
        for shape in [(7, 11), (13, 5), (30, 30), (1, 1)]:
            pooled = average_pool(vals, shape) if min(shape) > 1 else None
            if pooled is None:
                continue
            npt.assert_allclose(pooled.mean(), vals.mean(), rtol=1e-12)

    def test_matches_scalar_oracle(self, rng):
        vals = rng.uniform(0, 1, size=(10, 13))
        npt.assert_allclose(average_pool(vals, (4, 5)),
                            oracles.pool_oracle(vals, 4, 5), atol=1e-12)

    def test_rejects_upsampling(self):
        with pytest.raises(ValueError):
            average_pool(np.ones((4, 4)), (8, 4))


class TestBoundarySaliency:
    def test_default_values_and_shape(self):
        lab = np.zeros((90, 90), dtype=np.int32)
        lab[:, 45:] = 1
        s = boundary_saliency(lab)
        assert s.shape == (45, 45)
        # Pooled cells on the boundary average boundary and background mass;
        # everything stays inside the two extremes.
        assert s.values.min() == pytest.approx(1.0)
        assert 1.0 < s.values.max() <= 200.0

    def test_constant_labels_give_background(self):
        s = boundary_saliency(np.zeros((45, 45), dtype=np.int32), out=(9, 9))
        npt.assert_allclose(s.values, 1.0)

    def test_aligned_pooling_hand_case(self):
        # 4x4 labels split at column 2: only columns 1 and 2 touch the edge,
        # so every 2x2 pooled block averages two boundary and two background
        # pixels: (10 + 10 + 2 + 2) / 4 = 6.
        lab = np.zeros((4, 4), dtype=np.int32)
        lab[:, 2:] = 1
        s = boundary_saliency(lab, boundary_value=10.0, background_value=2.0, out=(2, 2))
        npt.assert_allclose(s.values, np.full((2, 2), 6.0))

    def test_rejects_bad_levels(self):
        lab = np.zeros((4, 4), dtype=np.int32)
        with pytest.raises(ValueError):
            boundary_saliency(lab, boundary_value=1.0, background_value=1.0, out=(2, 2))
        with pytest.raises(ValueError):
            boundary_saliency(lab, boundary_value=5.0, background_value=0.0, out=(2, 2))


class TestSaliencyFiles:
    def test_save_load_roundtrip(self, rng, tmp_path):
        s = SaliencyMap(rng.uniform(0.5, 2.0, size=(31, 51)))
        path = tmp_path / "s.lzu"
        save_saliency(s, path)
        loaded = load_saliency(path)
        # Payload is float32 on disk.
        npt.assert_allclose(loaded.values, s.values, rtol=1e-6)
        assert loaded.values.dtype == np.float64

    def test_load_rejects_wrong_rank(self, tmp_path):
        from zoomwarp.io import save_array

        path = tmp_path / "bad.lzu"
        save_array(path, np.ones((2, 2, 2)))
        with pytest.raises(FormatError):
            load_saliency(path)

    def test_load_rejects_negative_values(self, tmp_path):
        from zoomwarp.io import save_array

        path = tmp_path / "neg.lzu"
        save_array(path, np.full((3, 3), -1.0))
        with pytest.raises(ValueError):
            load_saliency(path)


class TestLoadBoxes:
    def test_parses_boxes_comments_and_blanks(self, tmp_path):
        path = tmp_path / "boxes.txt"
        path.write_text(
            "# header comment\n"
            "0.5 0.5 0.1 0.2\n"
            "\n"
            "0.25 0.75 0.05 0.05\n"
        )
        boxes = load_boxes(path)
        assert len(boxes) == 2
        assert boxes[0] == Box2D(0.5, 0.5, 0.1, 0.2)
        assert boxes[1].cy == 0.75

    def test_empty_file_gives_no_boxes(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("# only comments\n\n")
        assert load_boxes(path) == []

    def test_reports_line_numbers(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.5 0.5 0.1 0.1\n0.5 0.5 0.1\n")
        with pytest.raises(FormatError, match="bad.txt:2"):
            load_boxes(path)

    def test_rejects_non_numeric(self, tmp_path):
        path = tmp_path / "nan.txt"
        path.write_text("0.5 0.5 0.1 oops\n")
        with pytest.raises(FormatError, match="nan.txt:1"):
            load_boxes(path)

    def test_out_of_range_center_raises(self, tmp_path):
        path = tmp_path / "range.txt"
        path.write_text("1.5 0.5 0.1 0.1\n")
        with pytest.raises(ValueError):
            load_boxes(path)
