import pytest

from app.core.exceptions import DatasetError
from app.geometry import BoxCorners
from app.proposals import (
    CompositeProposer,
    ProposalSet,
    build_proposer,
    proposal_recall,
    read_proposals,
    recall_curve,
    write_proposals,
)
from app.proposals.schema import ProposerConfig

GT = [BoxCorners(0, 0, 10, 10), BoxCorners(20, 20, 30, 30)]


class TestRecall:
    def test_superset_of_gt(self):
        assert proposal_recall(GT + [BoxCorners(5, 5, 8, 8)], GT) == 1.0

    def test_no_proposals(self):
        assert proposal_recall([], GT) == 0.0

    def test_no_gt(self):
        assert proposal_recall([BoxCorners(0, 0, 1, 1)], []) == 1.0

    def test_half_covered(self):
        assert proposal_recall([BoxCorners(0, 0, 10, 6)], GT) == 0.5

    def test_monotone(self):
        proposals = [BoxCorners(0, 0, 10, 6)]
        assert proposal_recall(proposals, GT, 0.7) <= proposal_recall(proposals, GT, 0.5)
        assert proposal_recall(proposals + [BoxCorners(21, 20, 30, 30)], GT) >= 0.5

    def test_curve(self):
        sets = [ProposalSet(0, [BoxCorners(0, 0, 10, 6), BoxCorners(20, 20, 30, 30)])]
        curve = dict(recall_curve(sets, {0: GT}, thresholds=(0.5, 0.7, 1.0)))
        assert curve == {0.5: 1.0, 0.7: 0.5, 1.0: 0.5}


class TestComposite:
    def test_tags_and_dedup(self):
        proposer = build_proposer(ProposerConfig(), seed=0)
        assert isinstance(proposer, CompositeProposer)
        result = proposer.propose(0, 96, 96, [BoxCorners(0, 0, 24, 24)])
        assert result.source_tag == "grid+jitter"
        keys = [tuple(round(v, 6) for v in b.as_tuple()) for b in result.boxes]
        assert len(keys) == len(set(keys))
        assert BoxCorners(0, 0, 24, 24) in result.boxes

    def test_deterministic(self):
        a = build_proposer(ProposerConfig(), seed=9).propose(1, 96, 96, GT)
        b = build_proposer(ProposerConfig(), seed=9).propose(1, 96, 96, GT)
        assert a == b


class TestProposalFile:
    def test_round_trip(self, tmp_path):
        sets = [
            ProposalSet(0, [BoxCorners(0.5, 1.25, 10, 20.1)], "grid"),
            ProposalSet(3, [BoxCorners(1, 1, 2, 2), BoxCorners(3, 3, 9, 9)], "grid+jitter"),
        ]
        path = write_proposals(tmp_path / "proposals.txt", sets)
        loaded = read_proposals(path, image_ids=[0, 3, 7])
        assert loaded[0] == sets[0]
        assert loaded[3] == sets[1]
        assert loaded[7].boxes == []

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1 2 3\n")
        with pytest.raises(DatasetError, match="expected 6 fields"):
            read_proposals(path)
