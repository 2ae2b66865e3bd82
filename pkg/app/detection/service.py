"""Scoring, greedy NMS, detection assembly and single-pass refinement"""

from collections.abc import Mapping, Sequence

import numpy as np

from app.core.exceptions import ExtractionError
from app.core.metrics import DETECTIONS_EMITTED_TOTAL
from app.detection.schema import Detection
from app.features.extractors.base import FeatureExtractor
from app.features.service import featurize_boxes
from app.geometry import BoxCorners, pairwise_iou
from app.geometry.schema import boxes_to_array
from app.geometry.service import apply_deltas_array, clip_box
from app.imaging import Image, WarpConfig
from app.proposals.strategies import ProposalStrategy
from app.training.schema import BBoxRegressor, ClassifierModel


def score_all(features: np.ndarray, model: ClassifierModel) -> np.ndarray:
    """(proposals, classes) score matrix ``F @ W + b``."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[1] != model.dim:
        raise ExtractionError(
            f"Feature dim {features.shape[1]} does not match classifier dim {model.dim}"
        )
    return features @ model.weights + model.biases[None, :]


def nms(boxes: np.ndarray, scores: np.ndarray, overlap_thresh: float) -> list[int]:
    """
    Greedy non-maximum suppression.

    Boxes are visited by descending score, ties broken by lower index. A box
    is kept when its IoU with every box kept so far is at most
    ``overlap_thresh``.

    Returns:
        Kept indices in visiting order (scores nonincreasing)
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if boxes.shape[0] != scores.shape[0]:
        raise ValueError("boxes and scores must have the same length")
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    keep: list[int] = []
    while order.size:
        best = int(order[0])
        keep.append(best)
        rest = order[1:]
        if not rest.size:
            break
        overlaps = pairwise_iou(boxes[best : best + 1], boxes[rest])[0]
        order = rest[overlaps <= overlap_thresh]
    return keep


ThresholdSpec = float | Mapping[int, float]


def _thresh_for(spec: ThresholdSpec, class_id: int, default: float) -> float:
    if isinstance(spec, Mapping):
        return float(spec.get(class_id, default))
    return float(spec)


def detections_from_scores(
    image_id: int,
    boxes: np.ndarray,
    scores: np.ndarray,
    class_ids: Sequence[int],
    nms_thresh: ThresholdSpec,
    score_floor: float,
    default_thresh: float = 0.3,
) -> list[Detection]:
    """
    Per-class NMS over one image's scored proposals.

    Candidates below ``score_floor`` are dropped before suppression. Output is
    grouped by class (in ``class_ids`` order), each group by descending score.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    detections: list[Detection] = []
    for column, class_id in enumerate(class_ids):
        column_scores = scores[:, column]
        candidates = np.flatnonzero(column_scores >= score_floor)
        if not candidates.size:
            continue
        thresh = _thresh_for(nms_thresh, class_id, default_thresh)
        kept = nms(boxes[candidates], column_scores[candidates], thresh)
        for local in kept:
            index = int(candidates[local])
            detections.append(
                Detection(
                    image_id=image_id,
                    class_id=int(class_id),
                    box=BoxCorners.from_array(boxes[index]),
                    score=float(column_scores[index]),
                    proposal_index=index,
                )
            )
        DETECTIONS_EMITTED_TOTAL.labels(class_id=str(class_id)).inc(len(kept))
    return detections


def detect_image(
    image_id: int,
    image: Image,
    proposer: ProposalStrategy,
    extractor: FeatureExtractor,
    model: ClassifierModel,
    warp_cfg: WarpConfig,
    fill_mean: np.ndarray,
    nms_thresh: ThresholdSpec,
    score_floor: float,
    gt_boxes: Sequence[BoxCorners] = (),
) -> list[Detection]:
    """
    Test-time flow for one image: propose, warp and extract, score, suppress.

    ``gt_boxes`` only feeds proposers that perturb ground truth.
    """
    proposals = proposer.propose(image_id, image.width, image.height, gt_boxes)
    if not proposals.boxes:
        return []
    features = featurize_boxes(image, proposals.boxes, extractor, warp_cfg, fill_mean)
    scores = score_all(features, model)
    return detections_from_scores(
        image_id,
        boxes_to_array(proposals.boxes),
        scores,
        model.class_ids,
        nms_thresh,
        score_floor,
    )


def refine(
    detections: Sequence[Detection],
    regressor: BBoxRegressor,
    features: np.ndarray,
    image_size: tuple[float, float] | None = None,
    max_delta: float = 4.0,
) -> list[Detection]:
    """
    Move each detection once by its class regressor's predicted deltas.

    ``features`` row ``i`` belongs to ``detections[i]``. Scores are kept;
    classes without a regressor keep their boxes. With ``image_size``
    (width, height) the refined boxes are clipped to the image.
    """
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if len(detections) != features.shape[0] and detections:
        raise ExtractionError("Need one feature row per detection")
    refined: list[Detection] = []
    for row, det in enumerate(detections):
        index = regressor.class_index(det.class_id)
        if index is None or not regressor.trained[index] or det.box.area <= 0:
            refined.append(det)
            continue
        deltas = regressor.predict(features[row], det.class_id)
        corners = apply_deltas_array(det.box.as_array()[None, :], deltas, max_delta)[0]
        box = BoxCorners.from_array(corners)
        if image_size is not None:
            box = clip_box(box, image_size[0], image_size[1])
        refined.append(
            Detection(det.image_id, det.class_id, box, det.score, det.proposal_index)
        )
    return refined
