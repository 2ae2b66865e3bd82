"""Registered feature extractors (importing this package registers them)"""

from app.features.extractors.base import (
    FeatureExtractor,
    create_extractor,
    extractor,
    extractor_registry,
)
from app.features.extractors.conv_stack import (
    ConvExtractor,
    ConvStack,
    conv_forward,
    receptive_field,
    receptive_field_table,
)
from app.features.extractors.hog import HogExtractor, hog_descriptor, hog_dim

__all__ = [
    "ConvExtractor",
    "ConvStack",
    "FeatureExtractor",
    "HogExtractor",
    "conv_forward",
    "create_extractor",
    "extractor",
    "extractor_registry",
    "hog_descriptor",
    "hog_dim",
    "receptive_field",
    "receptive_field_table",
]
