import numpy as np
import pytest

from app.core.exceptions import ExtractionError
from app.detection import Detection, detect_image, detections_from_scores, nms, refine, score_all
from app.features.service import featurize_boxes
from app.geometry import BoxCorners, iou, pairwise_iou, to_center
from app.geometry.schema import boxes_to_array
from app.geometry.service import regression_targets, regression_targets_array
from app.proposals import ProposalSet
from app.proposals.schema import JitterProposerConfig
from app.proposals.strategies import JitterProposer, ProposalStrategy, jitter_propose
from app.training.bbox_regression import train_bbox_regressor
from app.training.schema import BBoxConfig, BBoxRegressor, ClassifierModel

SQUARE_BOX = BoxCorners(12, 12, 36, 36)


def brute_force_nms(boxes: np.ndarray, scores: np.ndarray, thresh: float) -> list[int]:
    overlaps = pairwise_iou(boxes, boxes)
    remaining = scores.astype(float).copy()
    keep = []
    while np.isfinite(remaining).any():
        best = int(np.argmax(remaining))
        keep.append(best)
        remaining[best] = -np.inf
        remaining[overlaps[best] > thresh] = -np.inf
    return keep


def random_boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    xy = rng.uniform(0, 200, size=(n, 2))
    wh = rng.uniform(5, 60, size=(n, 2))
    return np.hstack([xy, xy + wh])


class EmptyProposer(ProposalStrategy):
    kind = "empty"

    @classmethod
    def from_config(cls, cfg, seed):
        return cls()

    def propose(self, image_id, width, height, gt_boxes=()):
        return ProposalSet(image_id=image_id)


class TestScoreAll:
    def test_hand_dot_product(self):
        model = ClassifierModel(np.array([[3.0], [4.0]]), np.zeros(1), (0,))
        assert score_all(np.array([[1.0, 2.0]]), model).tolist() == [[11.0]]

    def test_zero_model(self, rng):
        model = ClassifierModel(np.zeros((5, 3)), np.zeros(3), (0, 1, 2))
        assert not score_all(rng.normal(size=(7, 5)), model).any()

    def test_matches_row_loop(self, rng):
        weights, biases = rng.normal(size=(6, 2)), rng.normal(size=2)
        model = ClassifierModel(weights, biases, (0, 1))
        features = rng.normal(size=(9, 6))
        expected = np.array([[f @ weights[:, k] + biases[k] for k in range(2)] for f in features])
        np.testing.assert_allclose(score_all(features, model), expected, rtol=1e-12)

    def test_dim_mismatch(self):
        model = ClassifierModel(np.zeros((3, 1)), np.zeros(1), (0,))
        with pytest.raises(ExtractionError):
            score_all(np.zeros((2, 4)), model)


class TestNms:
    def test_single_box(self):
        assert nms(np.array([[0, 0, 1, 1]]), np.array([0.2]), 0.3) == [0]

    def test_identical_boxes(self):
        boxes = np.array([[0, 0, 10, 10], [0, 0, 10, 10]], dtype=float)
        assert nms(boxes, np.array([0.8, 0.9]), 0.5) == [1]

    def test_disjoint_kept_by_score(self):
        boxes = np.array([[0, 0, 1, 1], [5, 5, 6, 6], [10, 10, 11, 11]], dtype=float)
        assert nms(boxes, np.array([0.1, 0.7, 0.4]), 0.3) == [1, 2, 0]

    def test_ties_go_to_lower_index(self):
        boxes = np.array([[0, 0, 10, 10], [0, 0, 10, 10]], dtype=float)
        assert nms(boxes, np.array([0.5, 0.5]), 0.3) == [0]

    def test_threshold_one_keeps_everything(self, rng):
        boxes = random_boxes(rng, 50)
        assert sorted(nms(np.vstack([boxes, boxes]), rng.random(100), 1.0)) == list(range(100))

    def test_empty(self):
        assert nms(np.zeros((0, 4)), np.zeros(0), 0.3) == []

    def test_matches_brute_force(self):
        rng = np.random.default_rng(99)
        for trial in range(100):
            boxes = random_boxes(rng, 1000)
            scores = rng.random(1000)
            thresh = [0.1, 0.3, 0.5][trial % 3]
            assert nms(boxes, scores, thresh) == brute_force_nms(boxes, scores, thresh)

    def test_monotone_rescale_invariant(self, rng):
        boxes, scores = random_boxes(rng, 200), rng.random(200)
        assert nms(boxes, scores, 0.3) == nms(boxes, np.exp(5 * scores) + 2, 0.3)


class TestDetectionsFromScores:
    def test_floor_and_per_class_threshold(self):
        boxes = np.array([[0, 0, 10, 10], [1, 0, 11, 10], [30, 30, 40, 40]], dtype=float)
        scores = np.array([[0.9, -2.0], [0.8, 0.5], [-1.5, 0.4]])
        dets = detections_from_scores(3, boxes, scores, [4, 7], {4: 0.3, 7: 0.9}, -1.0)
        assert [(d.class_id, d.proposal_index) for d in dets] == [(4, 0), (7, 1), (7, 2)]
        assert all(d.image_id == 3 for d in dets)

    def test_count_bounded_by_proposals(self, rng):
        boxes = random_boxes(rng, 40)
        scores = rng.normal(size=(40, 3))
        dets = detections_from_scores(0, boxes, scores, [0, 1, 2], 0.3, -np.inf)
        for class_id in range(3):
            assert sum(d.class_id == class_id for d in dets) <= 40


class TestDetectImage:
    def template_model(self, image, extractor, warp_cfg):
        template = featurize_boxes(image, [SQUARE_BOX], extractor, warp_cfg, np.zeros(3))[0]
        return ClassifierModel(template[:, None], np.zeros(1), (0,))

    def test_no_proposals(self, square_image, hog_extractor, warp_cfg):
        model = ClassifierModel(np.zeros((hog_extractor.dim, 1)), np.zeros(1), (0,))
        dets = detect_image(
            0, square_image, EmptyProposer(), hog_extractor, model, warp_cfg, np.zeros(3), 0.3, -1.0
        )
        assert dets == []

    def test_top_detection_finds_object(self, square_image, hog_extractor, warp_cfg):
        proposer = JitterProposer(JitterProposerConfig(noise_scales=[0.0, 0.15], count=12), seed=5)
        model = self.template_model(square_image, hog_extractor, warp_cfg)
        args = (proposer, hog_extractor, model, warp_cfg, np.zeros(3), 0.3, -np.inf)
        dets = detect_image(0, square_image, *args, gt_boxes=[SQUARE_BOX])
        assert dets
        top = max(dets, key=lambda d: d.score)
        assert iou(top.box, SQUARE_BOX) >= 0.5
        assert dets == detect_image(0, square_image, *args, gt_boxes=[SQUARE_BOX])


class TestRefine:
    def identity_regressor(self, class_id: int = 0) -> BBoxRegressor:
        weights = np.zeros((1, 5, 4))
        weights[0, :4, :] = np.eye(4)
        return BBoxRegressor(weights, (class_id,), 1.0, 0.6, (True,))

    def test_zero_regressor_keeps_boxes(self):
        regressor = BBoxRegressor(np.zeros((1, 5, 4)), (0,), 1.0, 0.6, (True,))
        dets = [Detection(0, 0, BoxCorners(1, 2, 11, 22), 0.4)]
        refined = refine(dets, regressor, np.ones((1, 4)))
        assert refined[0].box.as_tuple() == pytest.approx(dets[0].box.as_tuple())
        assert refined[0].score == 0.4

    def test_exact_inverse_recovers_gt(self):
        gt = BoxCorners(10, 10, 30, 40)
        proposal = BoxCorners(13, 8, 35, 37)
        features = np.array([regression_targets(to_center(proposal), to_center(gt)).as_tuple()])
        refined = refine([Detection(0, 0, proposal, 1.0)], self.identity_regressor(), features)
        np.testing.assert_allclose(refined[0].box.as_tuple(), gt.as_tuple(), atol=1e-6)

    def test_regressor_fit_on_jitter_inverse_recovers_gt(self):
        gt = BoxCorners(20, 16, 52, 60)
        train = jitter_propose([gt], [0.15], count=40, seed=7).boxes
        proposals = boxes_to_array(train)
        targets = regression_targets_array(proposals, boxes_to_array([gt] * len(train)))
        pairs = {0: (targets, proposals, boxes_to_array([gt] * len(train)))}
        regressor = train_bbox_regressor(pairs, [0], 4, BBoxConfig(ridge_lambda=1e-12))

        held_out = jitter_propose([gt], [0.15], count=5, seed=8).boxes
        features = regression_targets_array(
            boxes_to_array(held_out), boxes_to_array([gt] * len(held_out))
        )
        dets = [Detection(0, 0, box, 1.0) for box in held_out]
        for det in refine(dets, regressor, features):
            np.testing.assert_allclose(det.box.as_tuple(), gt.as_tuple(), atol=1e-6)

    def test_unknown_class_unchanged(self):
        det = Detection(0, 9, BoxCorners(0, 0, 5, 5), 1.0)
        assert refine([det], self.identity_regressor(), np.ones((1, 4)))[0] == det

    def test_clipped_to_image(self):
        det = Detection(0, 0, BoxCorners(0, 0, 10, 10), 1.0)
        features = np.array([[0.5, 0.5, 0.0, 0.0]])
        refined = refine([det], self.identity_regressor(), features, image_size=(12, 12))
        assert refined[0].box.as_tuple() == pytest.approx((5, 5, 12, 12))

    def test_row_count_mismatch(self):
        det = Detection(0, 0, BoxCorners(0, 0, 10, 10), 1.0)
        with pytest.raises(ExtractionError):
            refine([det, det], self.identity_regressor(), np.ones((1, 4)))
