"""Closed-form ridge regression of box corrections"""

from collections.abc import Mapping, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from app.geometry import BoxCorners, pairwise_iou
from app.geometry.schema import boxes_to_array
from app.geometry.service import regression_targets_array
from app.training.schema import BBoxConfig, BBoxRegressor
from app.utils.logger import get_logger

logger = get_logger(__name__)


def build_regression_pairs(
    proposals: np.ndarray,
    gt_boxes: Sequence[BoxCorners],
    assign_iou: float,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Match proposals to their highest-IoU GT box.

    Returns:
        (row indices kept, matched GT corners) for proposals whose best IoU
        is strictly above ``assign_iou``
    """
    proposals = np.asarray(proposals, dtype=np.float64).reshape(-1, 4)
    if not gt_boxes or not proposals.shape[0]:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 4))
    gt = boxes_to_array(gt_boxes)
    overlaps = pairwise_iou(proposals, gt)
    best = overlaps.argmax(axis=1)
    best_iou = overlaps[np.arange(proposals.shape[0]), best]
    keep = np.flatnonzero(best_iou > assign_iou)
    return keep, gt[best[keep]]


def ridge_fit(features: np.ndarray, targets: np.ndarray, ridge_lambda: float) -> np.ndarray:
    """
    Solve ``(Phi^T Phi + lambda I) W = Phi^T T`` with ``Phi = [features, 1]``.

    One Cholesky factorization serves every target column.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    phi = np.hstack([features, np.ones((features.shape[0], 1))])
    gram = phi.T @ phi
    gram[np.diag_indices_from(gram)] += ridge_lambda
    factor = cho_factor(gram)
    return cho_solve(factor, phi.T @ np.asarray(targets, dtype=np.float64))


def train_bbox_regressor(
    pairs: Mapping[int, tuple[np.ndarray, np.ndarray, np.ndarray]],
    class_ids: Sequence[int],
    dim: int,
    cfg: BBoxConfig,
) -> BBoxRegressor:
    """
    Fit one ridge regressor per class.

    ``pairs[class_id]`` holds (features (n, dim), proposal corners (n, 4),
    matched GT corners (n, 4)) already filtered by assignment IoU. Classes
    with no pairs keep all-zero weights, so refinement leaves their boxes
    unchanged.
    """
    weights = np.zeros((len(class_ids), dim + 1, 4))
    trained: list[bool] = []
    counts: list[int] = []
    for index, class_id in enumerate(class_ids):
        features, proposal_boxes, gt_boxes = pairs.get(
            class_id, (np.zeros((0, dim)), np.zeros((0, 4)), np.zeros((0, 4)))
        )
        n = int(np.asarray(features).shape[0])
        counts.append(n)
        if n == 0:
            logger.warning("bbox_regressor_untrained", class_id=class_id, reason="no_pairs")
            trained.append(False)
            continue
        targets = regression_targets_array(proposal_boxes, gt_boxes)
        weights[index] = ridge_fit(features, targets, cfg.ridge_lambda)
        trained.append(True)
        logger.info("bbox_regressor_trained", class_id=class_id, pairs=n)
    return BBoxRegressor(
        weights=weights,
        class_ids=tuple(int(c) for c in class_ids),
        ridge_lambda=cfg.ridge_lambda,
        assign_iou=cfg.assign_iou,
        trained=tuple(trained),
        pair_counts=tuple(counts),
    )
