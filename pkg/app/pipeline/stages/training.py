"""Per-class SVM training with hard-negative mining, and box-regressor training"""

from collections import Counter

import numpy as np

from app.core.exceptions import TrainingError
from app.core.service.atomic import atomic_write_text
from app.geometry.schema import boxes_to_array
from app.pipeline.cache import FeatureBlock
from app.pipeline.repository import write_meta
from app.pipeline.schema import StageReport
from app.pipeline.stages.base import StageContext, stage
from app.training import (
    BACKGROUND,
    ClassifierModel,
    MiningReport,
    SvmSolution,
    build_regression_pairs,
    compare_labeling_policies,
    label_for_finetune,
    label_for_svm,
    mine_hard_negatives,
    sample_minibatch,
    train_bbox_regressor,
)
from app.training.repository import save_classifier, save_regressor
from app.utils.formatting import fmt_float
from app.utils.logger import get_logger

logger = get_logger(__name__)


def _train_blocks(ctx: StageContext) -> dict[int, FeatureBlock]:
    cache = ctx.feature_cache
    cache.require()
    ids = ctx.image_ids("train")
    if not ids:
        raise TrainingError("The dataset has no training images")
    return dict(zip(ids, ctx.parallel_map(cache.load, ids), strict=True))


def _class_pools(
    ctx: StageContext, blocks: dict[int, FeatureBlock], class_id: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(positive rows, negative rows, image id of each negative) for one class."""
    neg_thresh = ctx.cfg.svm.neg_iou_thresh
    positives: list[np.ndarray] = []
    negatives: list[np.ndarray] = []
    negative_ids: list[np.ndarray] = []
    for image_id, block in blocks.items():
        annotation = ctx.annotations[image_id]
        gt_rows = [
            j
            for j, obj in enumerate(annotation.objects)
            if obj.class_id == class_id and not obj.difficult
        ]
        if gt_rows:
            positives.append(block.gt_features[gt_rows])
        labels, _ = label_for_svm(ctx.proposals[image_id].boxes, annotation, class_id, neg_thresh)
        rows = [i for i, label in enumerate(labels) if label.kind == "negative"]
        if rows:
            negatives.append(block.proposal_features[rows])
            negative_ids.append(np.full(len(rows), image_id, dtype=np.int64))
    dim = next(iter(blocks.values())).features.shape[1]
    stack = lambda parts: np.vstack(parts) if parts else np.zeros((0, dim))  # noqa: E731
    ids = np.concatenate(negative_ids) if negative_ids else np.zeros(0, dtype=np.int64)
    return stack(positives), stack(negatives), ids


def _minibatch_line(ctx: StageContext) -> str:
    labels = np.concatenate(
        [
            label_for_finetune(ctx.proposals[i].boxes, ctx.annotations[i])
            for i in ctx.image_ids("train")
        ]
        or [np.zeros(0, dtype=np.int64)]
    )
    try:
        rows = sample_minibatch(labels, ctx.cfg.seeds.minibatch)
    except TrainingError as exc:
        return f"finetune_minibatch unavailable ({exc.message})"
    counts = Counter(int(v) for v in labels[rows])
    parts = [f"bg={counts.get(BACKGROUND, 0)}"] + [
        f"{c}={counts.get(c, 0)}" for c in ctx.class_ids
    ]
    return "finetune_minibatch " + " ".join(parts)


@stage("train-svm")
def train_svm(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["train-svm"]
    blocks = _train_blocks(ctx)
    class_ids = ctx.class_ids

    def fit(class_id: int) -> tuple[SvmSolution, MiningReport]:
        positives, negatives, negative_ids = _class_pools(ctx, blocks, class_id)
        return mine_hard_negatives(
            positives, negatives, negative_ids, class_id, cfg.svm, cfg.seeds.mining
        )

    results = ctx.parallel_map(fit, class_ids)
    model = ClassifierModel(
        weights=np.column_stack([solution.weights for solution, _ in results]),
        biases=np.asarray([solution.bias for solution, _ in results]),
        class_ids=tuple(class_ids),
    )
    names = ctx.manifest.class_names
    path = save_classifier(ctx.layout.svm_model, model, names)
    write_meta(path, "train-svm", fp)

    lines = ["# class name rounds cache_size positives objective residual_violators converged"]
    for _, report in results:
        lines.append(
            f"{report.class_id} {names[report.class_id]} {report.rounds} {report.cache_size} "
            f"{report.positives} {fmt_float(report.objective)} {report.residual_violators} "
            f"{str(report.converged).lower()}"
        )
    comparison = compare_labeling_policies(
        {i: ctx.proposals[i].boxes for i in blocks},
        ctx.annotations,
        class_ids,
        neg_thresh=cfg.svm.neg_iou_thresh,
    )
    lines.append("# class svm_positives svm_negatives svm_ignored finetune_positives")
    for row in comparison:
        lines.append(
            f"{row.class_id} {row.svm_positives} {row.svm_negatives} {row.svm_ignored} "
            f"{row.finetune_positives}"
        )
    if comparison:
        lines.append(f"finetune_background {comparison[0].finetune_background}")
    lines.append(_minibatch_line(ctx))
    report_path = ctx.layout.reports / "train_svm.txt"
    atomic_write_text(report_path, "\n".join(lines) + "\n")
    return StageReport(
        "train-svm",
        fp,
        outputs=[path, report_path],
        summary={
            "classes": len(class_ids),
            "dim": model.dim,
            "converged": all(report.converged for _, report in results),
        },
    )


@stage("train-bbreg")
def train_bbreg(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["train-bbreg"]
    blocks = _train_blocks(ctx)
    class_ids = ctx.class_ids
    dim = int(ctx.feature_cache.require()["dim"])

    pairs: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for class_id in class_ids:
        features, proposal_boxes, gt_boxes = [], [], []
        for image_id, block in blocks.items():
            boxes = boxes_to_array(ctx.proposals[image_id].boxes)
            gt = ctx.annotations[image_id].boxes(class_id)
            keep, matched = build_regression_pairs(boxes, gt, cfg.bbox.assign_iou)
            if keep.size:
                features.append(block.proposal_features[keep])
                proposal_boxes.append(boxes[keep])
                gt_boxes.append(matched)
        if features:
            pairs[class_id] = (np.vstack(features), np.vstack(proposal_boxes), np.vstack(gt_boxes))

    regressor = train_bbox_regressor(pairs, class_ids, dim, cfg.bbox)
    path = save_regressor(ctx.layout.bbox_model, regressor, ctx.manifest.class_names)
    write_meta(path, "train-bbreg", fp)
    return StageReport(
        "train-bbreg",
        fp,
        outputs=[path],
        summary={"pairs": dict(zip(class_ids, regressor.pair_counts, strict=True))},
    )
