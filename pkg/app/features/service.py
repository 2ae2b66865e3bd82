"""Warp-and-extract over the proposals of one image"""

from collections.abc import Sequence

import numpy as np

from app.features.extractors.base import FeatureExtractor
from app.geometry import BoxCorners
from app.imaging import Image, WarpConfig, warp_region


def featurize_boxes(
    image: Image,
    boxes: Sequence[BoxCorners],
    extractor: FeatureExtractor,
    warp_cfg: WarpConfig,
    fill_mean: np.ndarray,
) -> np.ndarray:
    """(len(boxes), extractor.dim) feature matrix; degenerate boxes get zero rows."""
    features = np.zeros((len(boxes), extractor.dim), dtype=np.float64)
    for row, box in enumerate(boxes):
        if box.width <= 0 or box.height <= 0:
            continue
        patch = warp_region(image, box, warp_cfg, fill_mean)
        features[row] = extractor.extract(patch).values
    return features
