"""AP reports and false-positive analysis over the written detections"""

import json

from app.core.service.atomic import atomic_write_text
from app.detection import Detection, read_detections
from app.evaluation import (
    EvaluationReport,
    breakdown_record,
    evaluate,
    format_breakdown,
    fp_analysis,
    group_map,
    write_report,
)
from app.pipeline.repository import is_current, require_artifact, write_meta
from app.pipeline.schema import StageReport
from app.pipeline.stages.base import StageContext, stage
from app.synthdata import Annotation


def detection_sets(ctx: StageContext) -> dict[str, list[Detection]]:
    """``raw`` detections, plus ``refined`` when detect wrote them under this config."""
    fp = ctx.fingerprints["detect"]
    layout = ctx.layout
    sets = {"raw": read_detections(require_artifact(layout.raw_detections, "detect", fp, layout))}
    if is_current(layout.refined_detections, fp):
        sets["refined"] = read_detections(layout.refined_detections)
    return sets


def _eval_annotations(ctx: StageContext) -> dict[int, Annotation]:
    ids = ctx.image_ids(ctx.cfg.evaluation.split)
    return {i: ctx.annotations[i] for i in ids}


def _groups(ctx: StageContext) -> dict[int, int]:
    index = {name: i for i, name in enumerate(ctx.manifest.class_names)}
    named = [[index[n] for n in group] for group in ctx.manifest.similarity_groups]
    return group_map(named, ctx.class_ids)


def evaluate_sets(
    ctx: StageContext, sets: dict[str, list[Detection]]
) -> dict[str, EvaluationReport]:
    ev = ctx.cfg.evaluation
    annotations = _eval_annotations(ctx)
    return {
        label: evaluate(
            dets, annotations, ctx.class_ids, ev.iou_thresh, ev.mode, ctx.manifest.class_names
        )
        for label, dets in sets.items()
    }


@stage("evaluate")
def evaluate_stage(ctx: StageContext) -> StageReport:
    """AP per class and mAP for every detection set, FP breakdown of the final one."""
    ev = ctx.cfg.evaluation
    fp = ctx.fingerprints["evaluate"]
    sets = detection_sets(ctx)
    reports = evaluate_sets(ctx, sets)
    final = sets.get("refined", sets["raw"])
    breakdown = fp_analysis(
        final,
        _eval_annotations(ctx),
        _groups(ctx),
        ev.fp_top_n,
        ev.iou_thresh,
        ev.loc_low,
        ev.overlap_floor,
    )
    paths = write_report(
        ctx.layout.reports, reports, breakdown, ctx.manifest.class_names, stem="eval"
    )
    write_meta(paths["record"], "evaluate", fp)
    return StageReport(
        "evaluate",
        fp,
        outputs=list(paths.values()),
        summary={label: report.mean_ap for label, report in reports.items()},
    )


@stage("analyze")
def analyze(ctx: StageContext) -> StageReport:
    """Loc/Sim/Oth/BG counts among the top-ranked false positives of every set."""
    ev = ctx.cfg.evaluation
    fp = ctx.fingerprints["analyze"]
    annotations = _eval_annotations(ctx)
    groups = _groups(ctx)
    names = ctx.manifest.class_names
    sections: list[str] = []
    record: dict[str, dict] = {}
    for label, dets in detection_sets(ctx).items():
        breakdown = fp_analysis(
            dets, annotations, groups, ev.fp_top_n, ev.iou_thresh, ev.loc_low, ev.overlap_floor
        )
        sections.append(f"[{label}]\n" + format_breakdown(breakdown, names))
        record[label] = breakdown_record(breakdown)
    text_path = ctx.layout.reports / "analysis.txt"
    record_path = ctx.layout.reports / "analysis.json"
    atomic_write_text(text_path, "\n".join(sections))
    atomic_write_text(record_path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    write_meta(record_path, "analyze", fp)
    return StageReport(
        "analyze",
        fp,
        outputs=[text_path, record_path],
        summary={label: r["totals"] for label, r in record.items()},
    )
