"""Feature extraction schemas"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.geometry import BoxCorners
from app.imaging import Image


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length descriptor of one patch, tagged with the stage that produced it"""

    values: np.ndarray
    layer_tag: str

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True, slots=True)
class UnitRef:
    """Position (y, x, channel) in the final feature map"""

    y: int
    x: int
    channel: int

    @classmethod
    def parse(cls, text: str) -> "UnitRef":
        """Parse ``"y,x,c"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3 or not all(p.lstrip("-").isdigit() for p in parts):
            raise ValueError(f"Unit must look like 'y,x,c', got {text!r}")
        return cls(int(parts[0]), int(parts[1]), int(parts[2]))

    def slug(self) -> str:
        return f"{self.y}_{self.x}_{self.channel}"


class HogConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    cell: int = Field(8, ge=1, description="Cell side (pixels)")
    bins: int = Field(9, ge=1, description="Unsigned orientation bins over 0-180 degrees")
    block: int = Field(2, ge=1, description="Block side (cells), stride one cell")


class LayerSpec(BaseModel):
    """One convolution or max-pool stage"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["conv", "pool"]
    kernel: int = Field(..., ge=1)
    stride: int = Field(1, ge=1)
    channels: int | None = Field(None, ge=1, description="Output channels (conv only)")
    padding: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_channels(self) -> "LayerSpec":
        if self.type == "conv" and self.channels is None:
            raise ValueError("conv layers need 'channels'")
        if self.type == "pool" and self.channels is not None:
            raise ValueError("pool layers keep their input channels; drop 'channels'")
        return self


def _default_layers() -> list[LayerSpec]:
    return [
        LayerSpec(type="conv", kernel=3, channels=8),
        LayerSpec(type="pool", kernel=2, stride=2),
        LayerSpec(type="conv", kernel=3, channels=16),
        LayerSpec(type="pool", kernel=2, stride=2),
    ]


class ConvStackConfig(BaseModel):
    """Fixed random convolution stack (forward only)"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    layers: list[LayerSpec] = Field(default_factory=_default_layers, min_length=1)
    rectify: bool = Field(True, description="Apply max(x, 0) after every conv layer")
    output_layer: int | None = Field(
        None, ge=1, description="Number of leading layers to run (None = all)"
    )

    @model_validator(mode="after")
    def check_output_layer(self) -> "ConvStackConfig":
        if self.output_layer is not None and self.output_layer > len(self.layers):
            raise ValueError(f"output_layer {self.output_layer} exceeds {len(self.layers)} layers")
        return self

    @property
    def active_layers(self) -> list[LayerSpec]:
        return self.layers[: self.output_layer or len(self.layers)]


class ExtractorConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["hog", "conv"] = "conv"
    hog: HogConfig = Field(default_factory=HogConfig)
    conv: ConvStackConfig = Field(default_factory=ConvStackConfig)


@dataclass(frozen=True, slots=True)
class LayerGeometry:
    """Map size, jump, receptive-field side and first-unit start after one layer"""

    name: str
    size: int
    jump: int
    rf: int
    start: int


@dataclass(frozen=True)
class RegionPatch:
    """A warped region and where it came from"""

    image_id: int
    box: BoxCorners
    patch: Image


@dataclass(frozen=True)
class ActivationHit:
    image_id: int
    box: BoxCorners
    activation: float
    normalized: float
    region_index: int
