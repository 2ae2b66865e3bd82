"""Detection matching, precision/recall and average precision"""

from collections import defaultdict
from collections.abc import Mapping, Sequence

import numpy as np

from app.core.exceptions import EvaluationError
from app.detection.schema import Detection
from app.evaluation.schema import ApMode, ClassResult, EvaluationReport, MatchResult, PrCurve
from app.geometry import pairwise_iou
from app.geometry.schema import boxes_to_array
from app.synthdata.schema import Annotation
from app.utils.logger import get_logger

logger = get_logger(__name__)


def rank_order(detections: Sequence[Detection]) -> np.ndarray:
    """Indices by descending score, ties by original position."""
    scores = np.asarray([d.score for d in detections], dtype=np.float64)
    return np.lexsort((np.arange(scores.shape[0]), -scores))


def match_detections(
    detections: Sequence[Detection],
    annotations: Mapping[int, Annotation],
    class_id: int,
    iou_thresh: float = 0.5,
) -> MatchResult:
    """
    Greedy PASCAL-style matching for one class.

    In descending score order, a detection is a TP when its highest-IoU
    *unmatched* GT box of the class reaches ``iou_thresh`` (the box is then
    matched). Otherwise it is an FP, flagged as a duplicate when it overlaps
    an already matched box at ``iou_thresh`` or more. Reaching a difficult
    box makes the detection ignored.
    """
    dets = [d for d in detections if d.class_id == class_id]
    order = rank_order(dets)
    n = len(dets)
    tp = np.zeros(n, dtype=bool)
    fp = np.zeros(n, dtype=bool)
    duplicate = np.zeros(n, dtype=bool)
    ignored = np.zeros(n, dtype=bool)

    gt_boxes: dict[int, np.ndarray] = {}
    difficult: dict[int, np.ndarray] = {}
    num_gt = 0
    for image_id, annotation in annotations.items():
        objects = [o for o in annotation.objects if o.class_id == class_id]
        gt_boxes[image_id] = boxes_to_array(o.box for o in objects)
        difficult[image_id] = np.asarray([o.difficult for o in objects], dtype=bool)
        num_gt += int(np.sum(~difficult[image_id]))
    taken = {image_id: np.zeros(len(boxes), dtype=bool) for image_id, boxes in gt_boxes.items()}
    matched_gt: dict[int, tuple[int, int]] = {}

    for rank, index in enumerate(order):
        det = dets[index]
        boxes = gt_boxes.get(det.image_id)
        if boxes is None or not boxes.shape[0]:
            fp[rank] = True
            continue
        overlaps = pairwise_iou(det.box.as_array(), boxes)[0]
        used = taken[det.image_id]
        free = np.where(used, -1.0, overlaps)
        best = int(free.argmax())
        if free[best] >= iou_thresh:
            if difficult[det.image_id][best]:
                ignored[rank] = True
            else:
                tp[rank] = True
                used[best] = True
                matched_gt[int(index)] = (det.image_id, best)
            continue
        fp[rank] = True
        if np.any(used & (overlaps >= iou_thresh)):
            duplicate[rank] = True

    return MatchResult(
        order=order,
        tp=tp,
        fp=fp,
        duplicate=duplicate,
        ignored=ignored,
        matched_gt=matched_gt,
        num_gt=num_gt,
    )


def pr_curve(match: MatchResult) -> PrCurve:
    """Cumulative precision and recall down the ranking (ignored detections skipped)."""
    keep = ~match.ignored
    tp = match.tp[keep]
    fp = match.fp[keep]
    cum_tp = np.cumsum(tp).astype(np.float64)
    cum_fp = np.cumsum(fp).astype(np.float64)
    recall = cum_tp / match.num_gt if match.num_gt else np.zeros_like(cum_tp)
    denominator = np.maximum(cum_tp + cum_fp, np.finfo(np.float64).tiny)
    precision = cum_tp / denominator
    return PrCurve(recall=recall, precision=precision, tp=tp, fp=fp, num_gt=match.num_gt)


def voc_ap(curve: PrCurve, mode: ApMode = "all_points") -> float | None:
    """
    Average precision of a PR curve; None when the class has no GT.

    ``all_points`` integrates the precision envelope (best precision at any
    recall at least as high). ``eleven_point`` averages the envelope at
    recall 0, 0.1, ..., 1.
    """
    if curve.num_gt == 0:
        return None
    if curve.recall.size == 0:
        return 0.0
    if mode == "eleven_point":
        total = 0.0
        for level in np.linspace(0.0, 1.0, 11):
            reached = curve.precision[curve.recall >= level]
            total += float(reached.max()) if reached.size else 0.0
        return total / 11.0
    recall = np.concatenate([[0.0], curve.recall, [1.0]])
    precision = np.concatenate([[0.0], curve.precision, [0.0]])
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.flatnonzero(recall[1:] != recall[:-1])
    return float(np.sum((recall[steps + 1] - recall[steps]) * precision[steps + 1]))


def evaluate(
    detections: Sequence[Detection],
    annotations: Mapping[int, Annotation],
    class_ids: Sequence[int],
    iou_thresh: float = 0.5,
    mode: ApMode = "all_points",
    class_names: Sequence[str] | None = None,
) -> EvaluationReport:
    """
    Per-class AP and their unweighted mean over classes with GT.

    Detections on images absent from ``annotations`` count as false positives.

    Raises:
        EvaluationError: a detection names a class outside ``class_ids``
    """
    known = set(class_ids)
    unknown = sorted({d.class_id for d in detections} - known)
    if unknown:
        raise EvaluationError(f"Detections reference unknown class ids {unknown}")

    by_class: dict[int, list[Detection]] = defaultdict(list)
    for det in detections:
        by_class[det.class_id].append(det)

    per_class: list[ClassResult] = []
    curves: dict[int, PrCurve] = {}
    for class_id in class_ids:
        match = match_detections(by_class[class_id], annotations, class_id, iou_thresh)
        curve = pr_curve(match)
        curves[class_id] = curve
        named = class_names and class_id < len(class_names)
        name = class_names[class_id] if named else str(class_id)
        per_class.append(
            ClassResult(
                class_id=class_id,
                name=name,
                ap=voc_ap(curve, mode),
                num_gt=match.num_gt,
                num_detections=len(by_class[class_id]),
                true_positives=int(match.tp.sum()),
            )
        )
    defined = [r.ap for r in per_class if r.ap is not None]
    mean_ap = float(np.mean(defined)) if defined else None
    logger.info("evaluation_completed", classes=len(per_class), mean_ap=mean_ap, mode=mode)
    return EvaluationReport(
        per_class=per_class, mean_ap=mean_ap, mode=mode, iou_thresh=iou_thresh, curves=curves
    )
