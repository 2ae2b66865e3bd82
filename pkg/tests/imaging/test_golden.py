"""Warp outputs pinned against frozen PPM files under ``golden/``.

A missing golden is written from the current implementation and the test is
skipped; commit the new file to freeze it. ``RDET_UPDATE_GOLDENS=1``
rewrites every golden.
"""

import os
from pathlib import Path

import numpy as np
import pytest

from app.geometry import BoxCorners
from app.imaging import Image, WarpConfig, load_image, quantize, save_image, warp_region

GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
MODES = ("warp", "tightest_square_with_context", "tightest_square_without_context")
SIZE = 64
OUT_SIZE = 48
FILL = np.array([0.2, 0.4, 0.6])


def checkerboard() -> Image:
    rows, cols = np.indices((SIZE, SIZE)) // 8
    dark = ((rows + cols) % 2 == 0)[:, :, None]
    return Image(np.where(dark, [0.1, 0.1, 0.3], [0.9, 0.8, 0.7]))


def gradient() -> Image:
    ramp = (np.arange(SIZE) + 0.5) / SIZE
    pixels = np.empty((SIZE, SIZE, 3))
    pixels[:, :, 0] = ramp[None, :]
    pixels[:, :, 1] = ramp[:, None]
    pixels[:, :, 2] = 0.5
    return Image(pixels)


# (image factory, box); the off-image box hangs over the top-left corner
PATTERNS = {
    "checkerboard": (checkerboard, BoxCorners(10, 14, 50, 38)),
    "gradient": (gradient, BoxCorners(6, 20, 30, 60)),
    "off_image_box": (gradient, BoxCorners(-20, -8, 28, 24)),
}


@pytest.mark.parametrize("padding", [0, 16])
@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("pattern", sorted(PATTERNS))
def test_warp_matches_golden(pattern, mode, padding):
    make_image, box = PATTERNS[pattern]
    cfg = WarpConfig(out_size=OUT_SIZE, padding=padding, mode=mode)
    patch = warp_region(make_image(), box, cfg, FILL)
    golden = GOLDEN_DIR / f"{pattern}-{mode}-p{padding}.ppm"

    if os.environ.get("RDET_UPDATE_GOLDENS") == "1" or not golden.exists():
        save_image(Image(quantize(patch.pixels)), golden)
        pytest.skip(f"wrote golden {golden.name}")

    expected = load_image(golden).pixels
    assert expected.shape == (OUT_SIZE, OUT_SIZE, 3)
    np.testing.assert_allclose(quantize(patch.pixels), expected, atol=1.0 / 255 + 1e-9)


class TestAnalyticWarps:
    """Cases whose exact output follows from bilinear sampling of a linear ramp"""

    def test_ramp_is_reproduced_without_padding(self):
        cfg = WarpConfig(out_size=OUT_SIZE, padding=0)
        patch = warp_region(gradient(), BoxCorners(8, 8, 56, 56), cfg, FILL).pixels
        # output pixel j samples source coordinate 8.5 + j
        expected = (8.5 + np.arange(OUT_SIZE)) / SIZE
        np.testing.assert_allclose(patch[0, :, 0], expected, atol=1e-12)
        np.testing.assert_allclose(patch[:, 0, 1], expected, atol=1e-12)
        np.testing.assert_allclose(patch[:, :, 2], 0.5, atol=1e-12)

    @pytest.mark.parametrize("mode", MODES)
    def test_context_ring_outside_image_is_fill(self, mode):
        # whole-image box: the 16-pixel context ring samples at -62..-2 and 66..126
        cfg = WarpConfig(out_size=OUT_SIZE, padding=16, mode=mode)
        patch = warp_region(gradient(), BoxCorners(0, 0, SIZE, SIZE), cfg, FILL).pixels
        ring = np.ones((OUT_SIZE, OUT_SIZE), dtype=bool)
        ring[16:32, 16:32] = False
        np.testing.assert_allclose(patch[ring], np.broadcast_to(FILL, (int(ring.sum()), 3)))
        expected = (2.0 + 4.0 * np.arange(16)) / SIZE
        np.testing.assert_allclose(patch[16, 16:32, 0], expected, atol=1e-12)
        np.testing.assert_allclose(patch[16:32, 16, 1], expected, atol=1e-12)

    def test_off_image_half_is_fill(self):
        cfg = WarpConfig(out_size=32, padding=0)
        patch = warp_region(gradient(), BoxCorners(-32, 0, 32, 64), cfg, FILL).pixels
        np.testing.assert_allclose(patch[:, :16], np.broadcast_to(FILL, (32, 16, 3)))
        # samples at 1, 3, ..., 31
        np.testing.assert_allclose(patch[0, 16:, 0], (1.0 + 2.0 * np.arange(16)) / SIZE)
