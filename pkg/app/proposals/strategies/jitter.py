"""Ground-truth boxes perturbed by seeded noise"""

from collections.abc import Sequence

import numpy as np
from scipy.stats import truncnorm

from app.geometry import BoxCorners, RegressionDeltas, apply_deltas, clip_box, to_center, to_corners
from app.proposals.schema import JitterProposerConfig, ProposalSet, ProposerConfig
from app.proposals.strategies.base import ProposalStrategy, dedup_boxes, proposer
from app.utils.rng import make_rng

TRUNCATION = 2.0


def truncated_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal draws truncated at two standard deviations."""
    return truncnorm.rvs(-TRUNCATION, TRUNCATION, size=size, random_state=rng)


def jitter_propose(
    gt_boxes: Sequence[BoxCorners],
    noise_scales: Sequence[float],
    count: int,
    seed: int,
    image_id: int = 0,
    image_size: tuple[int, int] | None = None,
) -> ProposalSet:
    """
    ``count`` perturbed copies of every GT box.

    Copy ``k`` draws centre shifts (in box widths/heights) and log-size
    changes from a normal with standard deviation ``noise_scales[k % len]``
    truncated at two standard deviations. The stream depends only on
    ``(seed, image_id, gt index)``.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    boxes: list[BoxCorners] = []
    for gt_index, gt in enumerate(gt_boxes):
        if gt.area <= 0:
            continue
        rng = make_rng(seed, "jitter", image_id, gt_index)
        center = to_center(gt)
        for k in range(count):
            sigma = float(noise_scales[k % len(noise_scales)])
            noise = truncated_normal(rng, 4) * sigma
            if sigma == 0.0:
                box = gt
            else:
                box = to_corners(apply_deltas(center, RegressionDeltas(*noise)))
            if image_size is not None:
                box = clip_box(box, image_size[0], image_size[1])
            boxes.append(box)
    return ProposalSet(image_id=image_id, boxes=dedup_boxes(boxes), source_tag="jitter")


@proposer("jitter")
class JitterProposer(ProposalStrategy):
    def __init__(self, cfg: JitterProposerConfig, seed: int) -> None:
        self.cfg = cfg
        self.seed = seed

    @classmethod
    def from_config(cls, cfg: ProposerConfig, seed: int) -> "JitterProposer":
        return cls(cfg.jitter, seed)

    def propose(
        self,
        image_id: int,
        width: int,
        height: int,
        gt_boxes: Sequence[BoxCorners] = (),
    ) -> ProposalSet:
        return jitter_propose(
            gt_boxes,
            self.cfg.noise_scales,
            self.cfg.count,
            self.seed,
            image_id=image_id,
            image_size=(width, height),
        )
