"""Proposal schemas"""

from dataclasses import dataclass, field
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.geometry import BoxCorners


@dataclass(frozen=True)
class ProposalSet:
    """Category-independent candidate boxes for one image"""

    image_id: int
    boxes: list[BoxCorners] = field(default_factory=list)
    source_tag: str = ""

    def __len__(self) -> int:
        return len(self.boxes)


class GridProposerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    scales: list[float] = Field(default_factory=lambda: [24.0, 32.0, 48.0], min_length=1)
    aspect_ratios: list[float] = Field(default_factory=lambda: [1.0], min_length=1)
    stride_fraction: float = Field(0.5, gt=0.0, le=1.0, description="Stride over box side")
    resize_width: int | None = Field(
        None, ge=1, description="Lay the grid out on an image rescaled to this width"
    )

    @field_validator("scales", "aspect_ratios")
    @classmethod
    def check_positive(cls, value: list[float]) -> list[float]:
        if any(v <= 0 for v in value):
            raise ValueError("values must be positive")
        return value


class JitterProposerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    noise_scales: list[float] = Field(default_factory=lambda: [0.15], min_length=1)
    count: int = Field(10, ge=0, description="Proposals per ground-truth box")

    @field_validator("noise_scales")
    @classmethod
    def check_noise(cls, value: list[float]) -> list[float]:
        if any(v < 0 for v in value):
            raise ValueError("noise scales must be non-negative")
        return value


class ProposerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kinds: list[Literal["grid", "jitter"]] = Field(
        default_factory=lambda: ["grid", "jitter"], min_length=1
    )
    grid: GridProposerConfig = Field(default_factory=GridProposerConfig)
    jitter: JitterProposerConfig = Field(default_factory=JitterProposerConfig)
