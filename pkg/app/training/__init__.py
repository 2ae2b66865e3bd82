"""Labeling policies, SVM training with hard-negative mining, box regression"""

from app.training.bbox_regression import build_regression_pairs, ridge_fit, train_bbox_regressor
from app.training.labeling import (
    BACKGROUND,
    compare_labeling_policies,
    label_for_finetune,
    label_for_svm,
    sample_minibatch,
)
from app.training.mining import mine_hard_negatives
from app.training.schema import (
    BBoxConfig,
    BBoxRegressor,
    ClassifierModel,
    LabelingComparison,
    MiningReport,
    RegionLabel,
    SvmConfig,
    SvmSolution,
)
from app.training.svm import svm_objective, train_linear_svm

__all__ = [
    "BACKGROUND",
    "BBoxConfig",
    "BBoxRegressor",
    "ClassifierModel",
    "LabelingComparison",
    "MiningReport",
    "RegionLabel",
    "SvmConfig",
    "SvmSolution",
    "build_regression_pairs",
    "compare_labeling_policies",
    "label_for_finetune",
    "label_for_svm",
    "mine_hard_negatives",
    "ridge_fit",
    "sample_minibatch",
    "svm_objective",
    "train_bbox_regressor",
    "train_linear_svm",
]
