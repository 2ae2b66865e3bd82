"""Blockwise orientation-histogram descriptor"""

from typing import Any

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from app.core.exceptions import ExtractionError
from app.features.extractors.base import FeatureExtractor, extractor
from app.features.schema import ExtractorConfig, HogConfig

EPSILON = 1e-6


def hog_dim(size: int, cfg: HogConfig) -> int:
    cells = size // cfg.cell
    blocks = cells - cfg.block + 1
    return blocks * blocks * cfg.block * cfg.block * cfg.bins


def hog_descriptor(pixels: np.ndarray, cfg: HogConfig) -> np.ndarray:
    """
    Unsigned-gradient HOG over an (H, W, C) array.

    Gradients are central differences with edge replication on the channel
    mean. Each pixel votes its magnitude into one of ``bins`` orientation
    bins over [0, pi). Cell histograms are grouped into ``block`` x ``block``
    blocks at a stride of one cell and each block is normalized by
    ``v / sqrt(|v|^2 + eps^2)``.

    Raises:
        ExtractionError: side not divisible by the cell, or too few cells for one block
    """
    gray = pixels.mean(axis=2) if pixels.ndim == 3 else pixels
    height, width = gray.shape
    if height % cfg.cell or width % cfg.cell:
        raise ExtractionError(f"Patch {height}x{width} is not divisible by cell size {cfg.cell}")
    cells_y, cells_x = height // cfg.cell, width // cfg.cell
    if cells_y < cfg.block or cells_x < cfg.block:
        raise ExtractionError(f"Patch {height}x{width} holds fewer cells than one block")

    padded = np.pad(gray, 1, mode="edge")
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    bin_index = np.minimum((angle * (cfg.bins / np.pi)).astype(np.int64), cfg.bins - 1)

    cell_row = (np.arange(height) // cfg.cell)[:, None]
    cell_col = (np.arange(width) // cfg.cell)[None, :]
    flat = ((cell_row * cells_x + cell_col) * cfg.bins + bin_index).ravel()
    hist = np.bincount(flat, weights=magnitude.ravel(), minlength=cells_y * cells_x * cfg.bins)
    hist = hist.reshape(cells_y, cells_x, cfg.bins)

    # (by, bx, bins, block, block) -> (by, bx, block, block, bins)
    blocks = sliding_window_view(hist, (cfg.block, cfg.block), axis=(0, 1))
    vectors = blocks.transpose(0, 1, 3, 4, 2).reshape(-1, cfg.block * cfg.block * cfg.bins)
    norms = np.sqrt(np.sum(vectors**2, axis=1, keepdims=True) + EPSILON**2)
    return (vectors / norms).ravel()


@extractor("hog")
class HogExtractor(FeatureExtractor):
    def __init__(self, input_size: int, channels: int, cfg: HogConfig) -> None:
        super().__init__(input_size, channels)
        self.cfg = cfg
        if input_size % cfg.cell or input_size // cfg.cell < cfg.block:
            raise ExtractionError(
                f"Input size {input_size} does not fit cell {cfg.cell} and block {cfg.block}"
            )

    @classmethod
    def from_config(
        cls,
        cfg: ExtractorConfig,
        input_size: int,
        channels: int,
        mean: np.ndarray,
        seed: int,
    ) -> "HogExtractor":
        # gradients ignore constant offsets, so the mean is not needed
        return cls(input_size, channels, cfg.hog)

    @property
    def dim(self) -> int:
        return hog_dim(self.input_size, self.cfg)

    def describe(self) -> dict[str, Any]:
        return {
            "kind": self.name,
            "input_size": self.input_size,
            "channels": self.channels,
            "hog": self.cfg.model_dump(),
        }

    def _compute(self, pixels: np.ndarray) -> np.ndarray:
        return hog_descriptor(pixels, self.cfg)
