"""Per-class grid search of the NMS overlap threshold on a held-out split"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from app.detection.service import detections_from_scores
from app.evaluation.schema import ApMode
from app.evaluation.service import match_detections, pr_curve, voc_ap
from app.synthdata.schema import Annotation
from app.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class NmsTuning:
    thresholds: dict[int, float]
    table: dict[int, dict[float, float | None]] = field(default_factory=dict)


def tune_nms_thresholds(
    scored: Mapping[int, tuple[np.ndarray, np.ndarray]],
    annotations: Mapping[int, Annotation],
    class_ids: Sequence[int],
    grid: Sequence[float],
    score_floor: float,
    default_thresh: float = 0.3,
    iou_thresh: float = 0.5,
    mode: ApMode = "all_points",
) -> NmsTuning:
    """
    Pick, per class, the grid threshold maximising AP on ``scored`` images.

    ``scored`` maps image id to (proposal boxes (N,4), scores (N,K)) with
    columns in ``class_ids`` order. Ties go to the smaller threshold; a class
    without ground truth keeps ``default_thresh``.
    """
    grid = sorted(set(float(t) for t in grid))
    thresholds: dict[int, float] = {}
    table: dict[int, dict[float, float | None]] = {}
    for column, class_id in enumerate(class_ids):
        table[class_id] = {}
        best_t, best_ap = default_thresh, None
        for thresh in grid:
            dets = []
            for image_id, (boxes, scores) in scored.items():
                column_scores = scores[:, column : column + 1]
                dets.extend(
                    detections_from_scores(
                        image_id, boxes, column_scores, [class_id], thresh, score_floor
                    )
                )
            ap = voc_ap(pr_curve(match_detections(dets, annotations, class_id, iou_thresh)), mode)
            table[class_id][thresh] = ap
            if ap is not None and (best_ap is None or ap > best_ap):
                best_t, best_ap = thresh, ap
        thresholds[class_id] = best_t
        logger.info("nms_threshold_tuned", class_id=class_id, thresh=best_t, ap=best_ap)
    return NmsTuning(thresholds=thresholds, table=table)
