import numpy as np
import pytest
from scipy.optimize import minimize

from app.core.exceptions import TrainingError
from app.features.extractors.hog import HogExtractor
from app.features.schema import HogConfig
from app.features.service import featurize_boxes
from app.imaging import WarpConfig
from app.proposals.schema import GridProposerConfig
from app.proposals.strategies.grid import grid_propose
from app.synthdata import DatasetConfig, generate_scene
from app.training import SvmConfig, mine_hard_negatives, svm_objective, train_linear_svm
from app.training.labeling import label_for_svm


def qp_oracle(X: np.ndarray, y: np.ndarray, C: float) -> float:
    """Slack-variable primal solved with SLSQP."""
    n, d = X.shape

    def objective(z):
        w, b, xi = z[:d], z[d], z[d + 1 :]
        return 0.5 * (w @ w + b * b) + C * xi.sum()

    def gradient(z):
        return np.concatenate([z[:d], [z[d]], np.full(n, C)])

    constraints = [
        {
            "type": "ineq",
            "fun": lambda z: y * (X @ z[:d] + z[d]) - 1.0 + z[d + 1 :],
            "jac": lambda z: np.hstack([y[:, None] * X, y[:, None], np.eye(n)]),
        },
        {
            "type": "ineq",
            "fun": lambda z: z[d + 1 :],
            "jac": lambda z: np.hstack([np.zeros((n, d + 1)), np.eye(n)]),
        },
    ]
    start = np.concatenate([np.zeros(d + 1), np.ones(n)])
    result = minimize(
        objective,
        start,
        jac=gradient,
        constraints=constraints,
        method="SLSQP",
        options={"maxiter": 1000, "ftol": 1e-14},
    )
    return svm_objective(result.x[:d], result.x[d], X, y, C)


def random_problem(rng: np.random.Generator, separable: bool) -> tuple[np.ndarray, np.ndarray]:
    X = rng.normal(size=(50, 10))
    direction = rng.normal(size=10)
    y = np.where(X @ direction > 0, 1.0, -1.0)
    if separable:
        X += 0.5 * y[:, None] * direction / np.linalg.norm(direction)
    else:
        flip = rng.random(50) < 0.15
        y[flip] *= -1
    return X, y


class TestLinearSvm:
    def test_hard_margin_analytic(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0]])
        y = np.array([1.0, -1.0])
        solution = train_linear_svm(X, y, SvmConfig(C=100.0))
        np.testing.assert_allclose(solution.weights, [1.0, 0.0], atol=1e-3)
        assert abs(solution.bias) < 1e-3

    def test_separable_has_zero_hinge(self):
        X, y = random_problem(np.random.default_rng(0), separable=True)
        solution = train_linear_svm(X, y, SvmConfig(C=1000.0))
        margins = y * (X @ solution.weights + solution.bias)
        assert margins.min() >= 1.0 - 1e-4

    @pytest.mark.parametrize("separable", [True, False])
    def test_matches_qp_oracle(self, separable):
        rng = np.random.default_rng(42 if separable else 43)
        for _ in range(20):
            X, y = random_problem(rng, separable)
            solution = train_linear_svm(X, y, SvmConfig(C=1.0))
            expected = qp_oracle(X, y, 1.0)
            assert solution.objective == pytest.approx(expected, rel=1e-4)
            assert solution.objective == pytest.approx(
                svm_objective(solution.weights, solution.bias, X, y, 1.0), rel=1e-12
            )

    def test_history_nonincreasing(self):
        X, y = random_problem(np.random.default_rng(8), separable=False)
        history = train_linear_svm(X, y, SvmConfig()).history
        assert all(b <= a for a, b in zip(history, history[1:]))

    def test_rejects_one_sided_labels(self):
        with pytest.raises(TrainingError):
            train_linear_svm(np.ones((3, 2)), np.ones(3), SvmConfig())
        with pytest.raises(TrainingError):
            train_linear_svm(np.ones((3, 2)), np.array([1.0, 0.0, -1.0]), SvmConfig())


@pytest.fixture(scope="module")
def scene_windows():
    """HOG windows of 20 generated 3-class scenes, split per class into positives and negatives."""
    data_cfg = DatasetConfig(train_images=20, test_images=0)
    warp_cfg = WarpConfig(out_size=32, padding=4)
    grid_cfg = GridProposerConfig()
    extractor = HogExtractor(input_size=32, channels=3, cfg=HogConfig())
    fill = np.full(3, 0.5)
    scenes = [generate_scene(data_cfg, image_id, seed=11) for image_id in range(20)]
    per_class = {}
    total_windows = 0
    for class_id in range(len(data_cfg.classes)):
        positives, negatives, image_ids = [], [], []
        for image, annotation in scenes:
            boxes = grid_propose(grid_cfg, (image.width, image.height), annotation.image_id).boxes
            labels, gt = label_for_svm(boxes, annotation, class_id)
            negative_boxes = [box for box, label in zip(boxes, labels) if label.kind == "negative"]
            positives.append(featurize_boxes(image, gt, extractor, warp_cfg, fill))
            negatives.append(featurize_boxes(image, negative_boxes, extractor, warp_cfg, fill))
            image_ids.extend([annotation.image_id] * len(negative_boxes))
            if class_id == 0:
                total_windows += len(boxes)
        per_class[class_id] = (np.vstack(positives), np.vstack(negatives), np.array(image_ids))
    assert total_windows <= 5000
    return per_class


class TestMining:
    def build(self, seed: int):
        rng = np.random.default_rng(seed)
        centre = rng.normal(size=8)
        positives = centre + 0.6 * rng.normal(size=(30, 8))
        negatives = rng.normal(size=(1500, 8)) * 1.5
        image_ids = np.repeat(np.arange(50), 30)
        return positives, negatives, image_ids

    @pytest.mark.parametrize("class_id", [0, 1, 2])
    def test_matches_full_training_on_scenes(self, scene_windows, class_id):
        positives, negatives, image_ids = scene_windows[class_id]
        cfg = SvmConfig(C=0.5, max_rounds=30, initial_negatives_per_image=2)
        mined, report = mine_hard_negatives(positives, negatives, image_ids, class_id, cfg, 3)
        assert report.converged
        assert report.residual_violators == 0

        X = np.vstack([positives, negatives])
        y = np.concatenate([np.ones(len(positives)), -np.ones(len(negatives))])
        full = train_linear_svm(X, y, cfg)
        on_full = svm_objective(mined.weights, mined.bias, X, y, cfg.C)
        assert on_full == pytest.approx(full.objective, rel=1e-3)

    def test_one_round_when_cache_has_everything(self):
        positives, negatives, image_ids = self.build(7)
        cfg = SvmConfig(initial_negatives_per_image=30)
        _, report = mine_hard_negatives(positives, negatives, image_ids, 2, cfg, seed=0)
        assert report.rounds == 1
        assert report.cache_size == len(negatives)

    def test_deterministic(self):
        positives, negatives, image_ids = self.build(3)
        cfg = SvmConfig(max_rounds=4, initial_negatives_per_image=3)
        a, _ = mine_hard_negatives(positives, negatives, image_ids, 1, cfg, seed=5)
        b, _ = mine_hard_negatives(positives, negatives, image_ids, 1, cfg, seed=5)
        assert np.array_equal(a.weights, b.weights) and a.bias == b.bias

    def test_needs_positives(self):
        with pytest.raises(TrainingError):
            mine_hard_negatives(np.zeros((0, 3)), np.ones((4, 3)), np.zeros(4), 0, SvmConfig(), 0)
