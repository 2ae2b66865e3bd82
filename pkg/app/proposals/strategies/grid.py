"""Multi-scale regular grid of boxes"""

import math
from collections.abc import Sequence

import numpy as np

from app.geometry import BoxCorners, clip_box
from app.proposals.schema import GridProposerConfig, ProposalSet, ProposerConfig
from app.proposals.strategies.base import ProposalStrategy, dedup_boxes, proposer


def grid_axis_count(extent: float, side: float, stride: float) -> int:
    """Positions along one axis: ``max(1, ceil((extent - side) / stride + 1))``."""
    return max(1, math.ceil((extent - side) / stride + 1))


def raw_grid_boxes(cfg: GridProposerConfig, width: float, height: float) -> list[BoxCorners]:
    """Every grid box for an image of this size, clipped, before deduplication."""
    boxes: list[BoxCorners] = []
    for scale in cfg.scales:
        for aspect in cfg.aspect_ratios:
            box_w = scale * math.sqrt(aspect)
            box_h = scale / math.sqrt(aspect)
            stride_x = cfg.stride_fraction * box_w
            stride_y = cfg.stride_fraction * box_h
            xs = np.arange(grid_axis_count(width, box_w, stride_x)) * stride_x
            ys = np.arange(grid_axis_count(height, box_h, stride_y)) * stride_y
            for y in ys:
                for x in xs:
                    box = BoxCorners(float(x), float(y), float(x + box_w), float(y + box_h))
                    boxes.append(clip_box(box, width, height))
    return boxes


def grid_propose(
    cfg: GridProposerConfig, image_size: tuple[int, int], image_id: int = 0
) -> ProposalSet:
    """
    Dense grid at every scale and aspect ratio, independent of image content.

    With ``resize_width`` the grid is laid out on the rescaled image and
    mapped back to original coordinates.
    """
    width, height = image_size
    factor = 1.0 if cfg.resize_width is None else cfg.resize_width / width
    boxes = raw_grid_boxes(cfg, width * factor, height * factor)
    if factor != 1.0:
        boxes = [clip_box(box.scaled(1.0 / factor), width, height) for box in boxes]
    return ProposalSet(image_id=image_id, boxes=dedup_boxes(boxes), source_tag="grid")


@proposer("grid")
class GridProposer(ProposalStrategy):
    def __init__(self, cfg: GridProposerConfig) -> None:
        self.cfg = cfg

    @classmethod
    def from_config(cls, cfg: ProposerConfig, seed: int) -> "GridProposer":
        return cls(cfg.grid)

    def propose(
        self,
        image_id: int,
        width: int,
        height: int,
        gt_boxes: Sequence[BoxCorners] = (),
    ) -> ProposalSet:
        return grid_propose(self.cfg, (width, height), image_id=image_id)
