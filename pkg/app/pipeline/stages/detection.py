"""Test-time detection from cached features, and NMS threshold tuning"""

import json

import numpy as np

from app.core.exceptions import EvaluationError
from app.core.service.atomic import atomic_write_text
from app.detection import Detection, detections_from_scores, refine, score_all, write_detections
from app.detection.service import ThresholdSpec
from app.detection.tuning import tune_nms_thresholds
from app.geometry.schema import boxes_to_array
from app.pipeline.repository import require_artifact, write_meta
from app.pipeline.schema import StageReport
from app.pipeline.stages.base import StageContext, stage
from app.training import ClassifierModel
from app.training.repository import load_classifier, load_regressor
from app.utils.formatting import fmt_float
from app.utils.logger import get_logger

logger = get_logger(__name__)


def _classifier(ctx: StageContext) -> ClassifierModel:
    path = require_artifact(
        ctx.layout.svm_model, "train-svm", ctx.fingerprints["train-svm"], ctx.layout
    )
    return load_classifier(path)


def _tuned_thresholds(ctx: StageContext) -> dict[int, float]:
    path = require_artifact(
        ctx.layout.nms_tuning, "tune-nms", ctx.fingerprints["tune-nms"], ctx.layout
    )
    record = json.loads(path.read_text(encoding="utf-8"))
    return {int(k): float(v) for k, v in record["thresholds"].items()}


@stage("detect")
def detect(ctx: StageContext) -> StageReport:
    """
    Score every proposal of the evaluation split, suppress per class, and
    optionally move each survivor once with its class's box regressor.
    """
    cfg = ctx.cfg
    fp = ctx.fingerprints["detect"]
    model = _classifier(ctx)
    regressor = None
    if cfg.detection.refine:
        path = require_artifact(
            ctx.layout.bbox_model, "train-bbreg", ctx.fingerprints["train-bbreg"], ctx.layout
        )
        regressor = load_regressor(path)
    thresholds: ThresholdSpec = cfg.detection.nms_thresh
    if cfg.detection.use_tuned_nms:
        thresholds = _tuned_thresholds(ctx)
    cache = ctx.feature_cache
    cache.require()
    size = float(ctx.manifest.image_size)

    def run(image_id: int) -> tuple[list[Detection], list[Detection]]:
        block = cache.load(image_id)
        features = block.proposal_features
        if not features.shape[0]:
            return [], []
        boxes = boxes_to_array(ctx.proposals[image_id].boxes)
        raw = detections_from_scores(
            image_id,
            boxes,
            score_all(features, model),
            model.class_ids,
            thresholds,
            cfg.detection.floor,
            default_thresh=cfg.detection.nms_thresh,
        )
        if regressor is None:
            return raw, []
        rows = features[[d.proposal_index for d in raw]]
        return raw, refine(raw, regressor, rows, (size, size), cfg.bbox.max_delta)

    results = ctx.parallel_map(run, ctx.image_ids(cfg.evaluation.split))
    raw = [d for dets, _ in results for d in dets]
    outputs = [write_detections(ctx.layout.raw_detections, raw)]
    write_meta(ctx.layout.raw_detections, "detect", fp)
    if regressor is not None:
        refined = [d for _, dets in results for d in dets]
        outputs.append(write_detections(ctx.layout.refined_detections, refined))
        write_meta(ctx.layout.refined_detections, "detect", fp)
    elif ctx.layout.refined_detections.exists():
        # a refined file from an earlier config would be mistaken for this run's
        ctx.layout.refined_detections.unlink()
    logger.info("detections_written", images=len(results), detections=len(raw))
    return StageReport(
        "detect",
        fp,
        outputs=outputs,
        summary={"images": len(results), "detections": len(raw), "refined": regressor is not None},
    )


@stage("tune-nms")
def tune_nms(ctx: StageContext) -> StageReport:
    cfg = ctx.cfg
    fp = ctx.fingerprints["tune-nms"]
    model = _classifier(ctx)
    cache = ctx.feature_cache
    cache.require()
    ids = ctx.image_ids(cfg.detection.tune_split)
    if not ids:
        raise EvaluationError(f"No images in split '{cfg.detection.tune_split}' to tune NMS on")

    def run(image_id: int) -> tuple[int, tuple[np.ndarray, np.ndarray]]:
        features = cache.load(image_id).proposal_features
        boxes = boxes_to_array(ctx.proposals[image_id].boxes)
        scores = score_all(features, model) if features.shape[0] else np.zeros((0, model.n_classes))
        return image_id, (boxes, scores)

    scored = dict(ctx.parallel_map(run, ids))
    tuning = tune_nms_thresholds(
        scored,
        ctx.annotations,
        list(model.class_ids),
        cfg.detection.tune_grid,
        cfg.detection.floor,
        default_thresh=cfg.detection.nms_thresh,
        iou_thresh=cfg.evaluation.iou_thresh,
        mode=cfg.evaluation.mode,
    )
    record = {
        "split": cfg.detection.tune_split,
        "thresholds": {str(c): t for c, t in tuning.thresholds.items()},
        "ap": {
            str(c): {fmt_float(t): ap for t, ap in row.items()} for c, row in tuning.table.items()
        },
    }
    path = ctx.layout.nms_tuning
    atomic_write_text(path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    write_meta(path, "tune-nms", fp)

    names = ctx.manifest.class_names
    grid = sorted(set(cfg.detection.tune_grid))
    lines = ["# class name best " + " ".join(f"ap@{fmt_float(t)}" for t in grid)]
    for class_id, best in tuning.thresholds.items():
        cells = [
            "n/a" if tuning.table[class_id].get(t) is None else f"{tuning.table[class_id][t]:.4f}"
            for t in grid
        ]
        lines.append(f"{class_id} {names[class_id]} {fmt_float(best)} " + " ".join(cells))
    text_path = ctx.layout.reports / "nms_tuning.txt"
    atomic_write_text(text_path, "\n".join(lines) + "\n")
    return StageReport(
        "tune-nms",
        fp,
        outputs=[path, text_path],
        summary={"thresholds": tuning.thresholds},
    )
