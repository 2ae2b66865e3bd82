from .base import ProposalStrategy, dedup_boxes, proposer, proposer_registry
from .grid import GridProposer, grid_axis_count, grid_propose, raw_grid_boxes
from .jitter import JitterProposer, jitter_propose

__all__ = [
    "GridProposer",
    "JitterProposer",
    "ProposalStrategy",
    "dedup_boxes",
    "grid_axis_count",
    "grid_propose",
    "jitter_propose",
    "proposer",
    "proposer_registry",
    "raw_grid_boxes",
]
