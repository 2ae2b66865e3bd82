"""Synthetic shape scenes with ground truth, and the balanced split search"""

from app.synthdata.schema import (
    AnnotatedObject,
    Annotation,
    DatasetConfig,
    DatasetManifest,
    ImageEntry,
    SplitConfig,
    SplitResult,
)
from app.synthdata.service import generate_scene, shape_mask, tight_box
from app.synthdata.split import balanced_split, relative_imbalance

__all__ = [
    "AnnotatedObject",
    "Annotation",
    "DatasetConfig",
    "DatasetManifest",
    "ImageEntry",
    "SplitConfig",
    "SplitResult",
    "balanced_split",
    "generate_scene",
    "relative_imbalance",
    "shape_mask",
    "tight_box",
]
