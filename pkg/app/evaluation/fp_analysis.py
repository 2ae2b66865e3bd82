"""
Typing of top-ranked false positives.

Each considered FP falls in exactly one bucket, tested in this order:

- loc: duplicate of a matched box, or overlap with a correct-class box strictly
  between ``loc_low`` and the TP threshold
- sim: overlap of at least ``overlap_floor`` with a box of a similar class
- oth: overlap of at least ``overlap_floor`` with a box of any other class
- bg: everything else
"""

from collections.abc import Mapping, Sequence

import numpy as np

from app.core.exceptions import EvaluationError
from app.detection.schema import Detection
from app.evaluation.schema import FP_TYPES, FpBreakdown
from app.evaluation.service import match_detections
from app.schemas.errors import ErrorDetail
from app.geometry import pairwise_iou
from app.geometry.schema import boxes_to_array
from app.synthdata.schema import Annotation
from app.utils.logger import get_logger

logger = get_logger(__name__)


def group_map(
    similarity_groups: Sequence[Sequence[int]], class_ids: Sequence[int]
) -> dict[int, int]:
    """Class id -> group index; classes outside every group get their own group."""
    mapping: dict[int, int] = {}
    for index, group in enumerate(similarity_groups):
        for class_id in group:
            mapping[class_id] = index
    next_group = len(similarity_groups)
    for class_id in class_ids:
        if class_id not in mapping:
            mapping[class_id] = next_group
            next_group += 1
    return mapping


def _max_overlap(box: np.ndarray, annotation: Annotation | None, accept) -> float:
    if annotation is None:
        return 0.0
    boxes = boxes_to_array(o.box for o in annotation.objects if accept(o.class_id))
    if not boxes.shape[0]:
        return 0.0
    return float(pairwise_iou(box, boxes).max())


def classify_fp(
    det: Detection,
    annotation: Annotation | None,
    groups: Mapping[int, int],
    duplicate: bool,
    iou_thresh: float = 0.5,
    loc_low: float = 0.1,
    overlap_floor: float = 0.1,
) -> str:
    box = det.box.as_array()
    own = det.class_id
    correct = _max_overlap(box, annotation, lambda c: c == own)
    if duplicate or loc_low < correct < iou_thresh:
        return "loc"
    similar = _max_overlap(box, annotation, lambda c: c != own and groups.get(c) == groups[own])
    if similar >= overlap_floor:
        return "sim"
    other = _max_overlap(box, annotation, lambda c: c != own)
    if other >= overlap_floor:
        return "oth"
    return "bg"


def fp_analysis(
    detections: Sequence[Detection],
    annotations: Mapping[int, Annotation],
    groups: Mapping[int, int],
    top_n: int,
    iou_thresh: float = 0.5,
    loc_low: float = 0.1,
    overlap_floor: float = 0.1,
) -> FpBreakdown:
    """
    Categorize the ``top_n`` highest-scored false positives of every class.

    Raises:
        EvaluationError: a detected class has no entry in ``groups``
    """
    class_ids = sorted({d.class_id for d in detections})
    missing = [c for c in class_ids if c not in groups]
    if missing:
        raise EvaluationError(
            f"Classes {missing} are missing from the similarity groups",
            details=[
                ErrorDetail(field=f"class_id={c}", message="not in any group", code="NO_GROUP")
                for c in missing
            ],
        )

    per_class: dict[int, dict[str, int]] = {}
    for class_id in class_ids:
        dets = [d for d in detections if d.class_id == class_id]
        match = match_detections(dets, annotations, class_id, iou_thresh)
        counts = dict.fromkeys(FP_TYPES, 0)
        considered = 0
        for rank, index in enumerate(match.order):
            if considered >= top_n:
                break
            if not match.fp[rank]:
                continue
            det = dets[int(index)]
            kind = classify_fp(
                det,
                annotations.get(det.image_id),
                groups,
                bool(match.duplicate[rank]),
                iou_thresh,
                loc_low,
                overlap_floor,
            )
            counts[kind] += 1
            considered += 1
        per_class[class_id] = counts
    breakdown = FpBreakdown(per_class=per_class, top_n=top_n)
    logger.info("fp_analysis_completed", top_n=top_n, **breakdown.totals)
    return breakdown
