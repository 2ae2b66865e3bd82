"""Restartable pipeline stages over a run directory of persisted artifacts"""

from app.pipeline.cache import FeatureBlock, FeatureCache
from app.pipeline.config import (
    apply_overrides,
    build_config,
    load_config,
    parse_override,
    stage_fingerprints,
)
from app.pipeline.repository import RunLayout, read_meta, require_artifact, write_meta
from app.pipeline.schema import (
    AblationConfig,
    AblationRow,
    PipelineConfig,
    SeedsConfig,
    StageReport,
    VisualizeConfig,
    parse_variant,
)
from app.pipeline.service import FULL_CHAIN, STAGE_ORDER, run_chain, run_stage

__all__ = [
    "AblationConfig",
    "AblationRow",
    "FULL_CHAIN",
    "FeatureBlock",
    "FeatureCache",
    "PipelineConfig",
    "RunLayout",
    "STAGE_ORDER",
    "SeedsConfig",
    "StageReport",
    "VisualizeConfig",
    "apply_overrides",
    "build_config",
    "load_config",
    "parse_override",
    "parse_variant",
    "read_meta",
    "require_artifact",
    "run_chain",
    "run_stage",
    "stage_fingerprints",
    "write_meta",
]
