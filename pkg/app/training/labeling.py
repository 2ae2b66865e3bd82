"""Region labeling policies and minibatch sampling"""

from collections.abc import Mapping, Sequence

import numpy as np

from app.core.exceptions import TrainingError
from app.geometry import BoxCorners, pairwise_iou
from app.geometry.schema import boxes_to_array
from app.synthdata.schema import Annotation
from app.training.schema import LabelingComparison, RegionLabel
from app.utils.rng import make_rng

BACKGROUND = -1


def _max_overlaps(proposals: Sequence[BoxCorners], gt: Sequence[BoxCorners]) -> np.ndarray:
    if not gt or not proposals:
        return np.zeros(len(proposals))
    return pairwise_iou(boxes_to_array(proposals), boxes_to_array(gt)).max(axis=1)


def label_for_svm(
    proposals: Sequence[BoxCorners],
    annotation: Annotation,
    class_id: int,
    neg_thresh: float = 0.3,
) -> tuple[list[RegionLabel], list[BoxCorners]]:
    """
    Per-proposal labels for the class-``class_id`` SVM, plus its positives.

    Positives are exactly the class's ground-truth boxes (returned
    separately). A proposal is negative when its IoU with every GT box of the
    class is below ``neg_thresh``; everything else is ignored.
    """
    gt = [o.box for o in annotation.objects if o.class_id == class_id and not o.difficult]
    overlaps = _max_overlaps(proposals, gt)
    labels = [
        RegionLabel.negative(class_id) if overlap < neg_thresh else RegionLabel.ignore()
        for overlap in overlaps
    ]
    return labels, gt


def label_for_finetune(
    proposals: Sequence[BoxCorners],
    annotation: Annotation,
    pos_thresh: float = 0.5,
) -> np.ndarray:
    """
    Assign each proposal to its highest-IoU GT box (first on ties).

    The label is that box's class when the IoU is at least ``pos_thresh``,
    otherwise ``BACKGROUND``.
    """
    labels = np.full(len(proposals), BACKGROUND, dtype=np.int64)
    objects = [o for o in annotation.objects if not o.difficult]
    if not objects or not proposals:
        return labels
    overlaps = pairwise_iou(boxes_to_array(proposals), boxes_to_array(o.box for o in objects))
    best = overlaps.argmax(axis=1)
    best_iou = overlaps[np.arange(len(proposals)), best]
    classes = np.asarray([o.class_id for o in objects])
    positive = best_iou >= pos_thresh
    labels[positive] = classes[best[positive]]
    return labels


def sample_minibatch(
    labels: np.ndarray,
    seed: int,
    n_pos: int = 32,
    n_bg: int = 96,
) -> np.ndarray:
    """
    Seeded uniform sample of ``n_pos`` foreground and ``n_bg`` background rows.

    A pool smaller than its quota is sampled with replacement. The result is
    shuffled.

    Raises:
        TrainingError: no foreground or no background rows
    """
    labels = np.asarray(labels)
    foreground = np.flatnonzero(labels != BACKGROUND)
    background = np.flatnonzero(labels == BACKGROUND)
    if (n_pos and not foreground.size) or (n_bg and not background.size):
        raise TrainingError("Minibatch sampling needs both foreground and background regions")
    rng = make_rng(seed, "minibatch")
    picks = []
    for pool, quota in ((foreground, n_pos), (background, n_bg)):
        picks.append(rng.choice(pool, size=quota, replace=pool.size < quota))
    return rng.permutation(np.concatenate(picks))


def compare_labeling_policies(
    proposals: Mapping[int, Sequence[BoxCorners]],
    annotations: Mapping[int, Annotation],
    class_ids: Sequence[int],
    neg_thresh: float = 0.3,
    pos_thresh: float = 0.5,
) -> list[LabelingComparison]:
    """Region counts per class under the SVM policy and the fine-tuning policy."""
    svm_pos = dict.fromkeys(class_ids, 0)
    svm_neg = dict.fromkeys(class_ids, 0)
    svm_ign = dict.fromkeys(class_ids, 0)
    ft_pos = dict.fromkeys(class_ids, 0)
    background = 0
    for image_id, boxes in proposals.items():
        annotation = annotations.get(image_id, Annotation(image_id=image_id))
        for class_id in class_ids:
            labels, positives = label_for_svm(boxes, annotation, class_id, neg_thresh)
            svm_pos[class_id] += len(positives)
            svm_neg[class_id] += sum(1 for label in labels if label.kind == "negative")
            svm_ign[class_id] += sum(1 for label in labels if label.kind == "ignore")
        finetune = label_for_finetune(boxes, annotation, pos_thresh)
        background += int(np.sum(finetune == BACKGROUND))
        for class_id in class_ids:
            ft_pos[class_id] += int(np.sum(finetune == class_id))
    return [
        LabelingComparison(
            class_id=c,
            svm_positives=svm_pos[c],
            svm_negatives=svm_neg[c],
            svm_ignored=svm_ign[c],
            finetune_positives=ft_pos[c],
            finetune_background=background,
        )
        for c in class_ids
    ]
