"""Entry points for running stages and chains of stages"""

from collections.abc import Sequence

from app.core.exceptions import UsageError
from app.pipeline.schema import PipelineConfig, StageReport
from app.pipeline.stages import StageContext, execute, stage_registry

STAGE_ORDER = (
    "gen-data",
    "propose",
    "extract",
    "train-svm",
    "train-bbreg",
    "detect",
    "evaluate",
    "analyze",
    "visualize",
    "split",
    "tune-nms",
    "ablate",
)

FULL_CHAIN = STAGE_ORDER[:8]


def run_stage(
    cfg: PipelineConfig,
    stage: str,
    *,
    jobs: int | None = None,
    units: Sequence[str] = (),
    k: int | None = None,
    variants: Sequence[str] = (),
) -> StageReport:
    """
    Run one stage against the artifacts already in ``cfg.run_dir``.

    Raises:
        UsageError: no stage has that name
        MissingArtifactError: an upstream stage has not run yet
        StaleArtifactError: an upstream output came from a different config
    """
    if stage not in stage_registry:
        raise UsageError(f"Unknown stage '{stage}' (known: {', '.join(stage_registry.names())})")
    ctx = StageContext(cfg=cfg, jobs=jobs, units=units, k=k, variants=variants)
    return execute(stage, ctx)


def run_chain(
    cfg: PipelineConfig, stages: Sequence[str] = FULL_CHAIN, jobs: int | None = None
) -> list[StageReport]:
    """Run ``stages`` in order, each on a fresh context so upstream outputs are re-read."""
    return [run_stage(cfg, name, jobs=jobs) for name in stages]
