"""Registered pipeline stages (importing this package registers them)"""

from app.pipeline.stages import ablation, data, detection, evaluation, features, training
from app.pipeline.stages.base import StageContext, execute, stage, stage_registry

__all__ = [
    "StageContext",
    "ablation",
    "data",
    "detection",
    "evaluation",
    "execute",
    "features",
    "stage",
    "stage_registry",
    "training",
]
