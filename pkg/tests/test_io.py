"""Dense-array container and PNG I/O."""

import struct

import numpy as np
import numpy.testing as npt
import pytest

from zoomwarp import FormatError
from zoomwarp import io as zio


class TestDenseArray:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        path = tmp_path / "a.lzu"
        arr = rng.normal(size=(4, 6, 2)).astype(np.float32)
        zio.save_array(path, arr)
        back = zio.load_array(path)
        assert back.dtype == np.float32
        npt.assert_array_equal(back, arr)

    def test_layout(self, tmp_path):
        path = tmp_path / "a.lzu"
        zio.save_array(path, np.array([[1.0, 2.0], [3.0, 4.0]]))
        blob = path.read_bytes()
        assert blob[:4] == b"LZU0"
        assert struct.unpack_from("<I", blob, 4)[0] == 2
        assert struct.unpack_from("<II", blob, 8) == (2, 2)
        vals = np.frombuffer(blob, dtype="<f4", offset=16)
        npt.assert_array_equal(vals, [1.0, 2.0, 3.0, 4.0])

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.lzu"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(FormatError, match="magic"):
            zio.load_array(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "short.lzu"
        zio.save_array(path, np.ones((3, 3)))
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError, match="payload"):
            zio.load_array(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "long.lzu"
        zio.save_array(path, np.ones(5))
        path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
        with pytest.raises(FormatError, match="payload"):
            zio.load_array(path)

    def test_zero_dim_rejected(self, tmp_path):
        path = tmp_path / "zero.lzu"
        path.write_bytes(b"LZU0" + struct.pack("<I", 2) + struct.pack("<II", 0, 4))
        with pytest.raises(FormatError, match="zero-sized"):
            zio.load_array(path)

    def test_absurd_rank_rejected(self, tmp_path):
        path = tmp_path / "rank.lzu"
        path.write_bytes(b"LZU0" + struct.pack("<I", 99) + b"\x00" * 64)
        with pytest.raises(FormatError, match="rank"):
            zio.load_array(path)

    def test_refuses_empty_save(self, tmp_path):
        with pytest.raises(ValueError):
            zio.save_array(tmp_path / "e.lzu", np.zeros((0, 3)))


class TestPng:
    def test_gray_round_trip(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(8, 11)).astype(np.float64)[:, :, None]
        path = tmp_path / "g.png"
        zio.save_image(path, img)
        back = zio.load_image(path)
        assert back.shape == (8, 11, 1)
        npt.assert_array_equal(back, img)

    def test_rgb_round_trip(self, tmp_path, rng):
        img = rng.integers(0, 256, size=(5, 7, 3)).astype(np.float64)
        path = tmp_path / "c.png"
        zio.save_image(path, img)
        npt.assert_array_equal(zio.load_image(path), img)

    def test_clips_and_rounds(self, tmp_path):
        path = tmp_path / "x.png"
        zio.save_image(path, np.array([[-5.0, 300.0, 127.4, 127.6]]))
        npt.assert_array_equal(zio.load_image(path)[:, :, 0], [[0, 255, 127, 128]])

    def test_rejects_bad_channels(self, tmp_path):
        with pytest.raises(ValueError):
            zio.save_image(tmp_path / "b.png", np.zeros((4, 4, 2)))


class TestLabels:
    def test_eight_bit(self, tmp_path):
        from PIL import Image

        lab = np.arange(12, dtype=np.uint8).reshape(3, 4)
        path = tmp_path / "l8.png"
        Image.fromarray(lab, mode="L").save(path)
        out = zio.load_labels(path)
        assert out.dtype == np.int32
        npt.assert_array_equal(out, lab)

    def test_sixteen_bit(self, tmp_path):
        from PIL import Image

        lab = (np.arange(6, dtype=np.uint16) * 300).reshape(2, 3)
        path = tmp_path / "l16.png"
        Image.fromarray(lab).save(path)
        npt.assert_array_equal(zio.load_labels(path), lab)

    def test_rejects_rgb(self, tmp_path):
        from PIL import Image

        path = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4)).save(path)
        with pytest.raises(FormatError, match="single-channel"):
            zio.load_labels(path)


class TestHeatmap:
    def test_writes_rgb_png(self, tmp_path, rng):
        path = tmp_path / "h.png"
        zio.save_heatmap(path, rng.uniform(size=(6, 9)))
        img = zio.load_image(path)
        assert img.shape == (6, 9, 3)

    def test_constant_map_ok(self, tmp_path):
        zio.save_heatmap(tmp_path / "c.png", np.ones((3, 3)))

    def test_rejects_non_finite(self, tmp_path):
        with pytest.raises(ValueError):
            zio.save_heatmap(tmp_path / "n.png", np.array([[1.0, np.nan]]))
