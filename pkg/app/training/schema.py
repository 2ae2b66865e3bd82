"""Training schemas: labels, solver configuration, trained models"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import TrainingError


@dataclass(frozen=True, slots=True)
class RegionLabel:
    """positive(class_id), negative(class_id) or ignore"""

    kind: Literal["positive", "negative", "ignore"]
    class_id: int | None = None

    def __post_init__(self) -> None:
        if (self.kind == "ignore") != (self.class_id is None):
            raise ValueError("ignore labels carry no class; positive/negative labels need one")

    @classmethod
    def positive(cls, class_id: int) -> "RegionLabel":
        return cls("positive", class_id)

    @classmethod
    def negative(cls, class_id: int) -> "RegionLabel":
        return cls("negative", class_id)

    @classmethod
    def ignore(cls) -> "RegionLabel":
        return cls("ignore")


class SvmConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    C: float = Field(1.0, gt=0, description="Hinge-loss weight against 0.5 * |w|^2")
    neg_iou_thresh: float = Field(0.3, ge=0.0, le=0.5, description="Negative IoU ceiling")
    tolerance: float = Field(1e-6, gt=0, description="Relative objective change to stop at")
    max_iters: int = Field(2000, ge=1, description="Subgradient iteration cap")
    eval_every: int = Field(10, ge=1, description="Objective evaluation period (iterations)")
    hard_threshold: float = Field(-1.0, description="Negatives scoring above this are hard")
    max_rounds: int = Field(10, ge=1, description="Hard-negative mining round cap")
    initial_negatives_per_image: int = Field(
        10, ge=0, description="Random negatives per image seeding the mining cache"
    )


class BBoxConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    ridge_lambda: float = Field(1000.0, gt=0, description="Ridge penalty on the augmented weights")
    assign_iou: float = Field(0.6, ge=0.0, le=1.0, description="Pairs need IoU strictly above this")
    max_delta: float = Field(4.0, gt=0, description="Clamp on predicted log-scale deltas")


@dataclass(frozen=True)
class SvmSolution:
    weights: np.ndarray
    bias: float
    objective: float
    iterations: int
    history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class ClassifierModel:
    """
    One linear SVM per class.

    ``weights`` is (dim, n_classes) so that scores are ``F @ weights + biases``.
    """

    weights: np.ndarray
    biases: np.ndarray
    class_ids: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.weights.ndim != 2 or self.weights.shape[1] != len(self.class_ids):
            raise TrainingError("Weight matrix must be (dim, n_classes)")
        if self.biases.shape != (len(self.class_ids),):
            raise TrainingError("Need one bias per class")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise TrainingError("Classifier parameters must be finite")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.class_ids)


@dataclass(frozen=True)
class BBoxRegressor:
    """
    Per-class ridge maps from ``[features, 1]`` to (dx, dy, dw, dh).

    ``weights`` is (n_classes, dim + 1, 4); classes without training pairs
    keep zero weights and ``trained`` False.
    """

    weights: np.ndarray
    class_ids: tuple[int, ...]
    ridge_lambda: float
    assign_iou: float
    trained: tuple[bool, ...]
    pair_counts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.weights.ndim != 3 or self.weights.shape[0] != len(self.class_ids):
            raise TrainingError("Regressor weights must be (n_classes, dim + 1, 4)")
        if self.weights.shape[2] != 4:
            raise TrainingError("Regressor predicts exactly four deltas")
        if not np.all(np.isfinite(self.weights)):
            raise TrainingError("Regressor weights must be finite")
        if self.ridge_lambda <= 0:
            raise TrainingError("ridge_lambda must be positive")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1]) - 1

    def class_index(self, class_id: int) -> int | None:
        try:
            return self.class_ids.index(class_id)
        except ValueError:
            return None

    def predict(self, features: np.ndarray, class_id: int) -> np.ndarray:
        """(N, 4) deltas for ``class_id``; zeros when the class has no regressor."""
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        index = self.class_index(class_id)
        if index is None:
            return np.zeros((features.shape[0], 4))
        augmented = np.hstack([features, np.ones((features.shape[0], 1))])
        return augmented @ self.weights[index]


@dataclass(frozen=True)
class MiningReport:
    class_id: int
    rounds: int
    cache_size: int
    positives: int
    objective: float
    residual_violators: int
    converged: bool


@dataclass(frozen=True)
class LabelingComparison:
    """Per-class counts under the SVM policy and the fine-tuning policy"""

    class_id: int
    svm_positives: int
    svm_negatives: int
    svm_ignored: int
    finetune_positives: int
    finetune_background: int
