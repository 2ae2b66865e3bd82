"""Detection records and test-time configuration"""

import math
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.geometry import BoxCorners


@dataclass(frozen=True)
class Detection:
    """A scored, class-labelled box; ``proposal_index`` links back to the feature row"""

    image_id: int
    class_id: int
    box: BoxCorners
    score: float
    proposal_index: int | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"Detection score must be finite, got {self.score}")


class DetectionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    nms_thresh: float = Field(0.3, ge=0.0, description="Greedy NMS overlap threshold")
    score_floor: float | None = Field(
        -1.0, description="Drop detections scoring below this (null keeps everything)"
    )
    refine: bool = Field(True, description="Also write box-regression refined detections")
    tune_grid: list[float] = Field(
        default_factory=lambda: [0.1, 0.2, 0.3, 0.4, 0.5], min_length=1
    )
    use_tuned_nms: bool = Field(False, description="Use reports/nms_tuning.json thresholds")
    tune_split: str = Field("train", description="Split the NMS grid search runs on")

    @field_validator("tune_grid")
    @classmethod
    def check_grid(cls, value: list[float]) -> list[float]:
        if any(t < 0 for t in value):
            raise ValueError("NMS thresholds must be non-negative")
        return value

    @property
    def floor(self) -> float:
        return -math.inf if self.score_floor is None else self.score_floor
