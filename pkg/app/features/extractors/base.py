"""Feature extractor contract and registry"""

from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import Any, Callable, ClassVar

import numpy as np

from app.core.base.registry import Registry
from app.core.exceptions import ExtractionError
from app.core.metrics import FEATURES_EXTRACTED_TOTAL
from app.core.service.fingerprint import fingerprint
from app.features.schema import ExtractorConfig, FeatureVector
from app.imaging import Image

extractor_registry: Registry[type["FeatureExtractor"]] = Registry("extractor")


class FeatureExtractor(ABC):
    """Maps an ``input_size`` square patch to a fixed-length vector"""

    name: ClassVar[str] = ""

    def __init__(self, input_size: int, channels: int) -> None:
        self.input_size = input_size
        self.channels = channels

    @classmethod
    @abstractmethod
    def from_config(
        cls,
        cfg: ExtractorConfig,
        input_size: int,
        channels: int,
        mean: np.ndarray,
        seed: int,
    ) -> "FeatureExtractor":
        pass

    @property
    @abstractmethod
    def dim(self) -> int:
        pass

    @property
    def layer_tag(self) -> str:
        return self.name

    @abstractmethod
    def describe(self) -> dict[str, Any]:
        """JSON-compatible description; equal descriptions mean interchangeable extractors."""
        pass

    @abstractmethod
    def _compute(self, pixels: np.ndarray) -> np.ndarray:
        pass

    def fingerprint(self) -> str:
        return fingerprint(self.describe())

    def _check(self, patch: Image) -> None:
        expected = (self.input_size, self.input_size, self.channels)
        if patch.pixels.shape != expected:
            raise ExtractionError(
                f"{self.name} extractor expects patches of shape {expected}, "
                f"got {patch.pixels.shape}"
            )

    def extract(self, patch: Image) -> FeatureVector:
        self._check(patch)
        values = np.ascontiguousarray(self._compute(patch.pixels), dtype=np.float64).ravel()
        FEATURES_EXTRACTED_TOTAL.labels(extractor=self.name).inc()
        return FeatureVector(values=values, layer_tag=self.layer_tag)

    def extract_batch(self, patches: Sequence[Image]) -> np.ndarray:
        """Stack ``extract`` over patches into an (N, dim) matrix."""
        out = np.zeros((len(patches), self.dim), dtype=np.float64)
        for row, patch in enumerate(patches):
            out[row] = self.extract(patch).values
        return out


def extractor(name: str) -> Callable[[type[FeatureExtractor]], type[FeatureExtractor]]:
    """Decorator registering an extractor class under ``name``."""

    def decorator(cls: type[FeatureExtractor]) -> type[FeatureExtractor]:
        cls.name = name
        return extractor_registry.register(name)(cls)

    return decorator


def create_extractor(
    cfg: ExtractorConfig,
    input_size: int,
    channels: int,
    mean: np.ndarray | None = None,
    seed: int = 0,
) -> FeatureExtractor:
    """Build the configured extractor (``cfg.kind``)."""
    mean = np.zeros(channels) if mean is None else np.asarray(mean, dtype=np.float64)
    cls = extractor_registry.get(cfg.kind)
    return cls.from_config(cfg, input_size=input_size, channels=channels, mean=mean, seed=seed)
