"""Patch descriptors: HOG, a fixed random conv stack, receptive fields, unit visualization"""

from app.features.extractors import (
    ConvExtractor,
    ConvStack,
    FeatureExtractor,
    HogExtractor,
    conv_forward,
    create_extractor,
    hog_descriptor,
    receptive_field,
    receptive_field_table,
)
from app.features.schema import (
    ActivationHit,
    ConvStackConfig,
    ExtractorConfig,
    FeatureVector,
    HogConfig,
    LayerSpec,
    RegionPatch,
    UnitRef,
)

__all__ = [
    "ActivationHit",
    "ConvExtractor",
    "ConvStack",
    "ConvStackConfig",
    "ExtractorConfig",
    "FeatureExtractor",
    "FeatureVector",
    "HogConfig",
    "HogExtractor",
    "LayerSpec",
    "RegionPatch",
    "UnitRef",
    "conv_forward",
    "create_extractor",
    "hog_descriptor",
    "receptive_field",
    "receptive_field_table",
]
