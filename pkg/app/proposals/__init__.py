"""Category-independent region proposals"""

from app.proposals.schema import (
    GridProposerConfig,
    JitterProposerConfig,
    ProposalSet,
    ProposerConfig,
)
from app.proposals.service import (
    CompositeProposer,
    build_proposer,
    proposal_recall,
    recall_curve,
)
from app.proposals.repository import read_proposals, write_proposals
from app.proposals.strategies import ProposalStrategy, grid_propose, jitter_propose

__all__ = [
    "CompositeProposer",
    "GridProposerConfig",
    "JitterProposerConfig",
    "ProposalSet",
    "ProposalStrategy",
    "ProposerConfig",
    "build_proposer",
    "grid_propose",
    "jitter_propose",
    "proposal_recall",
    "read_proposals",
    "recall_curve",
    "write_proposals",
]
