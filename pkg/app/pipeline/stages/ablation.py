"""Extractor ablation: retrain and evaluate once per feature variant"""

import json

from app.core.exceptions import UsageError
from app.core.service.atomic import atomic_write_text
from app.pipeline.config import build_config
from app.pipeline.repository import write_meta
from app.pipeline.schema import AblationRow, PipelineConfig, StageReport, parse_variant
from app.pipeline.stages.base import StageContext, execute, stage
from app.utils.logger import get_logger

logger = get_logger(__name__)

VARIANT_CHAIN = ("propose", "extract", "train-svm", "train-bbreg", "detect", "evaluate")


def variant_config(cfg: PipelineConfig, variant: str) -> PipelineConfig:
    """``cfg`` with the extractor swapped, refinement on, and its own run directory."""
    kind, layer = parse_variant(variant)
    raw = cfg.model_dump(mode="json")
    raw["extractor"]["kind"] = kind
    raw["extractor"]["conv"]["output_layer"] = layer
    raw["detection"]["refine"] = True
    raw["dataset"]["root"] = str(cfg.dataset_root)
    raw["run_dir"] = str(cfg.run_dir / "ablation" / variant.replace(":", "_"))
    return build_config(raw)


def run_variant(ctx: StageContext, variant: str) -> AblationRow:
    sub = StageContext(cfg=variant_config(ctx.cfg, variant), jobs=ctx.jobs)
    evaluation = None
    for name in VARIANT_CHAIN:
        evaluation = execute(name, sub)
    assert evaluation is not None
    dim = int(sub.feature_cache.require()["dim"])
    row = AblationRow(
        variant=variant,
        dim=dim,
        mean_ap=evaluation.summary.get("raw"),
        refined_mean_ap=evaluation.summary.get("refined"),
    )
    logger.info(
        "ablation_variant_evaluated",
        variant=variant,
        mean_ap=row.mean_ap,
        refined_mean_ap=row.refined_mean_ap,
    )
    return row


def _map_text(value: float | None) -> str:
    return "n/a" if value is None else f"{100.0 * value:.2f}"


def format_ablation(rows: list[AblationRow]) -> str:
    lines = ["# variant dim mAP mAP_refined"]
    for row in rows:
        lines.append(
            f"{row.variant} {row.dim} {_map_text(row.mean_ap)} {_map_text(row.refined_mean_ap)}"
        )
    return "\n".join(lines) + "\n"


@stage("ablate")
def ablate(ctx: StageContext) -> StageReport:
    """
    Compare extractor variants on the shared dataset.

    Each variant runs proposals through evaluation in
    ``ablation/<variant>/``; the table reports mAP with and without
    box-regression refinement.
    """
    fp = ctx.fingerprints["ablate"]
    variants = list(ctx.variants or ctx.cfg.ablation.variants)
    for variant in variants:
        try:
            parse_variant(variant)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    manifest = ctx.manifest
    logger.info("ablation_started", variants=variants, images=len(manifest.images))
    rows = [run_variant(ctx, variant) for variant in variants]
    text_path = ctx.layout.reports / "ablation.txt"
    record_path = ctx.layout.reports / "ablation.json"
    atomic_write_text(text_path, format_ablation(rows))
    record = [
        {
            "variant": r.variant,
            "dim": r.dim,
            "mean_ap": r.mean_ap,
            "refined_mean_ap": r.refined_mean_ap,
        }
        for r in rows
    ]
    atomic_write_text(record_path, json.dumps(record, indent=2, sort_keys=True) + "\n")
    write_meta(record_path, "ablate", fp, variants=variants)
    return StageReport(
        "ablate",
        fp,
        outputs=[text_path, record_path],
        summary={r.variant: {"raw": r.mean_ap, "refined": r.refined_mean_ap} for r in rows},
    )
