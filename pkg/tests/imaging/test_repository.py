import numpy as np
import pytest

from app.core.exceptions import ImageDecodeError
from app.imaging import Image, load_image, quantize, save_image


def test_round_trip_rgb(tmp_path):
    rng = np.random.default_rng(1)
    img = Image(quantize(rng.uniform(size=(7, 9, 3))))
    loaded = load_image(save_image(img, tmp_path / "a.ppm"))
    np.testing.assert_array_equal(loaded.pixels, img.pixels)


def test_round_trip_gray(tmp_path):
    img = Image(quantize(np.linspace(0, 1, 12).reshape(3, 4, 1)))
    path = save_image(img, tmp_path / "a.pgm")
    assert path.read_bytes().startswith(b"P5")
    np.testing.assert_array_equal(load_image(path).pixels, img.pixels)


def test_pgm_scaling(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 0, 255]))
    np.testing.assert_array_equal(load_image(path).pixels[:, :, 0], [[0, 1], [0, 1]])


def test_truncated(tmp_path):
    path = tmp_path / "short.ppm"
    path.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(ImageDecodeError):
        load_image(path)


def test_bad_header(tmp_path):
    path = tmp_path / "junk.ppm"
    path.write_bytes(b"hello world")
    with pytest.raises(ImageDecodeError):
        load_image(path)


def test_missing_file(tmp_path):
    with pytest.raises(ImageDecodeError):
        load_image(tmp_path / "nope.ppm")


def test_save_is_deterministic(tmp_path):
    img = Image(np.full((3, 3, 3), 0.5))
    a = save_image(img, tmp_path / "a.ppm").read_bytes()
    b = save_image(img, tmp_path / "b.ppm").read_bytes()
    assert a == b
