import numpy as np
import pytest
from PIL import Image

from pdcodec import (
    FeatureTensor,
    FormatError,
    QuantizedTensor,
    read_ften,
    read_image,
    write_ften,
    write_image,
)


class TestFten:
    def test_round_trip_bit_identical(self, rng, tmp_path):
        data = rng.standard_normal((5, 7, 3)).astype(np.float32).astype(np.float64)
        path = tmp_path / "t.ften"
        write_ften(path, FeatureTensor(data))
        back = read_ften(path)
        assert np.array_equal(back.data, data)

    def test_1x1x1_file_is_21_bytes(self, tmp_path):
        path = tmp_path / "one.ften"
        write_ften(path, FeatureTensor(np.array([[[1.5]]])))
        assert path.stat().st_size == 21  # 4 magic + 1 version + 12 dims + 4 data

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ften"
        path.write_bytes(b"NOPE" + bytes(17))
        with pytest.raises(FormatError, match="magic"):
            read_ften(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.ften"
        write_ften(path, FeatureTensor(np.zeros((2, 2, 1))))
        blob = path.read_bytes()
        path.write_bytes(blob[:-2])
        with pytest.raises(FormatError):
            read_ften(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "t.ften"
        write_ften(path, FeatureTensor(np.zeros((1, 1, 1))))
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="version"):
            read_ften(path)

    def test_non_finite_payload_rejected(self, tmp_path):
        path = tmp_path / "t.ften"
        write_ften(path, FeatureTensor(np.zeros((1, 2, 1))))
        blob = bytearray(path.read_bytes())
        blob[17:21] = np.array([np.inf], dtype="<f4").tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError):
            read_ften(path)


class TestPng:
    def test_rgb_round_trip(self, rng, tmp_path):
        data = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
        path = tmp_path / "img.png"
        write_image(path, QuantizedTensor(data))
        back = read_image(path)
        assert np.array_equal(back.data, data)

    def test_grayscale_round_trip(self, rng, tmp_path):
        data = rng.integers(0, 256, size=(6, 8, 1), dtype=np.uint8)
        path = tmp_path / "img.png"
        write_image(path, QuantizedTensor(data))
        back = read_image(path)
        assert np.array_equal(back.data, data)

    def test_rgba_drops_alpha_with_warning(self, rng, tmp_path):
        rgba = rng.integers(0, 256, size=(4, 5, 4), dtype=np.uint8)
        path = tmp_path / "img.png"
        Image.fromarray(rgba, mode="RGBA").save(path)
        with pytest.warns(UserWarning, match="alpha"):
            back = read_image(path)
        assert back.channels == 3
        assert np.array_equal(back.data, rgba[:, :, :3])

    def test_unsupported_channel_count_on_write(self):
        with pytest.raises(FormatError):
            write_image("/tmp/x.png", QuantizedTensor(np.zeros((2, 2, 5), dtype=np.uint8)))

    def test_garbage_file_rejected(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"this is not an image at all")
        with pytest.raises(FormatError):
            read_image(path)
