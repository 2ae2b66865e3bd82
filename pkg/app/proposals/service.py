"""Proposer composition and recall measurement"""

from collections.abc import Sequence

import numpy as np

from app.core.metrics import PROPOSALS_GENERATED_TOTAL
from app.geometry import BoxCorners, pairwise_iou
from app.geometry.schema import boxes_to_array
from app.proposals.schema import ProposalSet, ProposerConfig
from app.proposals.strategies import ProposalStrategy, dedup_boxes, proposer_registry
from app.utils.logger import get_logger

logger = get_logger(__name__)


class CompositeProposer(ProposalStrategy):
    """Concatenates several strategies in order, dropping duplicates"""

    kind = "composite"

    def __init__(self, strategies: Sequence[ProposalStrategy]) -> None:
        self.strategies = list(strategies)

    @classmethod
    def from_config(cls, cfg: ProposerConfig, seed: int) -> "CompositeProposer":
        return cls([proposer_registry.get(kind).from_config(cfg, seed) for kind in cfg.kinds])

    def propose(
        self,
        image_id: int,
        width: int,
        height: int,
        gt_boxes: Sequence[BoxCorners] = (),
    ) -> ProposalSet:
        boxes: list[BoxCorners] = []
        tags: list[str] = []
        for strategy in self.strategies:
            result = strategy.propose(image_id, width, height, gt_boxes)
            PROPOSALS_GENERATED_TOTAL.labels(source=result.source_tag).inc(len(result))
            boxes.extend(result.boxes)
            tags.append(result.source_tag)
        return ProposalSet(image_id=image_id, boxes=dedup_boxes(boxes), source_tag="+".join(tags))


def build_proposer(cfg: ProposerConfig, seed: int) -> CompositeProposer:
    return CompositeProposer.from_config(cfg, seed)


def proposal_recall(
    proposals: Sequence[BoxCorners], gt_boxes: Sequence[BoxCorners], iou_thresh: float = 0.5
) -> float:
    """Fraction of GT boxes overlapped by some proposal at IoU >= thresh (1.0 without GT)."""
    if not gt_boxes:
        return 1.0
    if not proposals:
        return 0.0
    overlaps = pairwise_iou(boxes_to_array(gt_boxes), boxes_to_array(proposals))
    return float(np.mean(overlaps.max(axis=1) >= iou_thresh))


def recall_curve(
    proposal_sets: Sequence[ProposalSet],
    gt_by_image: dict[int, Sequence[BoxCorners]],
    thresholds: Sequence[float] = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
) -> list[tuple[float, float]]:
    """Dataset-level recall at each IoU threshold, pooling GT boxes over images."""
    best: list[float] = []
    for proposal_set in proposal_sets:
        gt = gt_by_image.get(proposal_set.image_id, ())
        if not gt:
            continue
        if not proposal_set.boxes:
            best.extend([0.0] * len(gt))
            continue
        overlaps = pairwise_iou(boxes_to_array(gt), boxes_to_array(proposal_set.boxes))
        best.extend(float(v) for v in overlaps.max(axis=1))
    if not best:
        return [(float(t), 1.0) for t in thresholds]
    values = np.asarray(best)
    return [(float(t), float(np.mean(values >= t))) for t in thresholds]
