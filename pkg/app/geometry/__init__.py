"""Box representations, overlap and regression transforms"""

from app.geometry.schema import BoxCenter, BoxCorners, RegressionDeltas
from app.geometry.service import (
    apply_deltas,
    clip_box,
    iou,
    pairwise_iou,
    regression_targets,
    to_center,
    to_corners,
)

__all__ = [
    "BoxCenter",
    "BoxCorners",
    "RegressionDeltas",
    "apply_deltas",
    "clip_box",
    "iou",
    "pairwise_iou",
    "regression_targets",
    "to_center",
    "to_corners",
]
