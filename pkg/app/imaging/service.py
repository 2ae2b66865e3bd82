"""Patch warping and dataset statistics"""

from collections.abc import Iterable

import numpy as np

from app.core.exceptions import DatasetError, GeometryError
from app.geometry import BoxCorners
from app.imaging.schema import Image, WarpConfig


def quantize(pixels: np.ndarray) -> np.ndarray:
    """Snap intensities to the 8-bit levels k/255 so files round-trip exactly."""
    levels = np.rint(np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0) * 255.0)
    return levels / 255.0


def _source_window(box: BoxCorners, cfg: WarpConfig) -> tuple[float, float, float, float]:
    """Region sampled in source coordinates, dilated so the context is exactly ``padding``."""
    if cfg.mode == "warp":
        x0, y0, x1, y1 = box.as_tuple()
    else:
        side = max(box.width, box.height)
        cx = 0.5 * (box.x_min + box.x_max)
        cy = 0.5 * (box.y_min + box.y_max)
        x0, y0, x1, y1 = cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2
    pad_x = cfg.padding / cfg.inner_size * (x1 - x0)
    pad_y = cfg.padding / cfg.inner_size * (y1 - y0)
    return x0 - pad_x, y0 - pad_y, x1 + pad_x, y1 + pad_y


def _bilinear_indices(coords: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # pixel k covers [k, k+1) and its value sits at k + 0.5
    u = np.clip(coords - 0.5, 0.0, size - 1)
    lo = np.floor(u).astype(np.int64)
    hi = np.minimum(lo + 1, size - 1)
    return lo, hi, u - lo


def warp_region(
    img: Image, box: BoxCorners, cfg: WarpConfig, fill_mean: np.ndarray | Iterable[float]
) -> Image:
    """
    Resample ``box`` (plus context) into an ``out_size`` square patch.

    The proposal lands exactly on the central ``out_size - 2 * padding``
    square. Samples are taken at output pixel centres and interpolated
    bilinearly; sample points outside the image take ``fill_mean``. In
    ``tightest_square_without_context`` mode, samples outside the original
    proposal take ``fill_mean`` as well.

    Raises:
        GeometryError: box has zero width or height
    """
    if box.width <= 0 or box.height <= 0:
        raise GeometryError(f"Cannot warp a degenerate box {box.as_tuple()}")
    fill = np.broadcast_to(np.asarray(fill_mean, dtype=np.float64), (img.channels,))

    sx0, sy0, sx1, sy1 = _source_window(box, cfg)
    steps = (np.arange(cfg.out_size, dtype=np.float64) + 0.5) / cfg.out_size
    xs = sx0 + steps * (sx1 - sx0)
    ys = sy0 + steps * (sy1 - sy0)

    x_lo, x_hi, fx = _bilinear_indices(xs, img.width)
    y_lo, y_hi, fy = _bilinear_indices(ys, img.height)
    px = img.pixels
    fx = fx[None, :, None]
    fy = fy[:, None, None]
    top = (1.0 - fx) * px[y_lo][:, x_lo] + fx * px[y_lo][:, x_hi]
    bottom = (1.0 - fx) * px[y_hi][:, x_lo] + fx * px[y_hi][:, x_hi]
    patch = (1.0 - fy) * top + fy * bottom

    outside = ((ys < 0) | (ys > img.height))[:, None] | ((xs < 0) | (xs > img.width))[None, :]
    if cfg.mode == "tightest_square_without_context":
        outside |= ((ys < box.y_min) | (ys > box.y_max))[:, None]
        outside |= ((xs < box.x_min) | (xs > box.x_max))[None, :]
    patch[outside] = fill
    return Image(np.clip(patch, 0.0, 1.0))


def image_mean(images: Iterable[Image]) -> np.ndarray:
    """
    Pooled per-channel mean over every pixel of every image.

    The pipeline feeds it warped training patches, which share one size, so
    the pooled mean equals the mean of the per-patch means.

    Raises:
        DatasetError: no images given
    """
    total: np.ndarray | None = None
    count = 0
    for image in images:
        sums = image.pixels.sum(axis=(0, 1))
        total = sums if total is None else total + sums
        count += image.width * image.height
    if total is None or count == 0:
        raise DatasetError("Cannot compute the mean of an empty image set")
    return total / count


def subtract_mean(patch: Image, mean: np.ndarray) -> np.ndarray:
    """Mean-centred copy of the patch as a plain (H, W, C) array."""
    return patch.pixels - np.broadcast_to(np.asarray(mean, dtype=np.float64), (patch.channels,))
