"""Overlap and bounding-box regression math"""

from __future__ import annotations

import math

import numpy as np

from app.core.exceptions import GeometryError
from app.geometry.schema import BoxCenter, BoxCorners, RegressionDeltas

# exp(4) is roughly a 55x rescale, the most a single refinement may apply
MAX_LOG_SCALE = 4.0


def clip_box(box: BoxCorners, width: float, height: float) -> BoxCorners:
    """Clip a box to the image rectangle [0, width] x [0, height]."""
    x0 = min(max(box.x_min, 0.0), width)
    y0 = min(max(box.y_min, 0.0), height)
    x1 = min(max(box.x_max, 0.0), width)
    y1 = min(max(box.y_max, 0.0), height)
    return BoxCorners(x0, y0, max(x0, x1), max(y0, y1))


def pairwise_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    IoU between every row of ``a`` (N, 4) and every row of ``b`` (M, 4).

    Pairs involving a zero-area box score 0.

    Returns:
        (N, M) float64 matrix
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])

    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    union = area_a[:, None] + area_b[None, :] - inter

    valid = (area_a[:, None] > 0) & (area_b[None, :] > 0) & (union > 0)
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=valid)
    return np.clip(out, 0.0, 1.0)


def iou(a: BoxCorners, b: BoxCorners) -> float:
    if a.area <= 0 or b.area <= 0:
        return 0.0
    return float(pairwise_iou(a.as_array(), b.as_array())[0, 0])


def to_center(box: BoxCorners) -> BoxCenter:
    w = box.x_max - box.x_min
    h = box.y_max - box.y_min
    return BoxCenter(box.x_min + 0.5 * w, box.y_min + 0.5 * h, w, h)


def to_corners(box: BoxCenter) -> BoxCorners:
    return BoxCorners(
        box.x - 0.5 * box.w,
        box.y - 0.5 * box.h,
        box.x + 0.5 * box.w,
        box.y + 0.5 * box.h,
    )


def _require_positive(box: BoxCenter, role: str) -> None:
    if not (box.w > 0 and box.h > 0):
        raise GeometryError(f"{role} box needs positive width and height, got {box.as_tuple()}")


def apply_deltas(
    p: BoxCenter, d: RegressionDeltas, max_log_scale: float = MAX_LOG_SCALE
) -> BoxCenter:
    """Move proposal ``p`` by predicted deltas; dw and dh are clamped to +/- max_log_scale."""
    _require_positive(p, "Proposal")
    dw = min(max(d.dw, -max_log_scale), max_log_scale)
    dh = min(max(d.dh, -max_log_scale), max_log_scale)
    return BoxCenter(
        p.w * d.dx + p.x,
        p.h * d.dy + p.y,
        p.w * math.exp(dw),
        p.h * math.exp(dh),
    )


def regression_targets(p: BoxCenter, g: BoxCenter) -> RegressionDeltas:
    _require_positive(p, "Proposal")
    _require_positive(g, "Ground-truth")
    return RegressionDeltas(
        (g.x - p.x) / p.w,
        (g.y - p.y) / p.h,
        math.log(g.w / p.w),
        math.log(g.h / p.h),
    )


def corners_to_centers(boxes: np.ndarray) -> np.ndarray:
    """(N, 4) corners to (N, 4) centers ``x, y, w, h``."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    w = boxes[:, 2] - boxes[:, 0]
    h = boxes[:, 3] - boxes[:, 1]
    return np.stack([boxes[:, 0] + 0.5 * w, boxes[:, 1] + 0.5 * h, w, h], axis=1)


def centers_to_corners(centers: np.ndarray) -> np.ndarray:
    c = np.asarray(centers, dtype=np.float64).reshape(-1, 4)
    half_w = 0.5 * c[:, 2]
    half_h = 0.5 * c[:, 3]
    return np.stack(
        [c[:, 0] - half_w, c[:, 1] - half_h, c[:, 0] + half_w, c[:, 1] + half_h], axis=1
    )


def regression_targets_array(proposals: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Row-wise ``regression_targets`` over (N, 4) corner arrays."""
    p = corners_to_centers(proposals)
    g = corners_to_centers(targets)
    if np.any(p[:, 2:] <= 0) or np.any(g[:, 2:] <= 0):
        raise GeometryError("Regression targets need boxes with positive width and height")
    return np.stack(
        [
            (g[:, 0] - p[:, 0]) / p[:, 2],
            (g[:, 1] - p[:, 1]) / p[:, 3],
            np.log(g[:, 2] / p[:, 2]),
            np.log(g[:, 3] / p[:, 3]),
        ],
        axis=1,
    )


def apply_deltas_array(
    proposals: np.ndarray, deltas: np.ndarray, max_log_scale: float = MAX_LOG_SCALE
) -> np.ndarray:
    """Row-wise ``apply_deltas`` over (N, 4) corner boxes; returns corners."""
    p = corners_to_centers(proposals)
    d = np.asarray(deltas, dtype=np.float64).reshape(-1, 4)
    if np.any(p[:, 2:] <= 0):
        raise GeometryError("Cannot apply deltas to a box without positive width and height")
    dw = np.clip(d[:, 2], -max_log_scale, max_log_scale)
    dh = np.clip(d[:, 3], -max_log_scale, max_log_scale)
    centers = np.stack(
        [
            p[:, 2] * d[:, 0] + p[:, 0],
            p[:, 3] * d[:, 1] + p[:, 1],
            p[:, 2] * np.exp(dw),
            p[:, 3] * np.exp(dh),
        ],
        axis=1,
    )
    return centers_to_corners(centers)
