"""Evaluation schemas"""

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ApMode = Literal["all_points", "eleven_point"]
FP_TYPES = ("loc", "sim", "oth", "bg")


class EvaluationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    iou_thresh: float = Field(0.5, gt=0.0, le=1.0, description="TP overlap threshold")
    mode: ApMode = "all_points"
    fp_top_n: int = Field(50, ge=0, description="Top-ranked false positives analysed per class")
    loc_low: float = Field(0.1, ge=0.0, description="Loc errors overlap the right class above this")
    overlap_floor: float = Field(0.1, ge=0.0, description="Sim/Oth need at least this overlap")
    split: Literal["train", "test", "all"] = "test"


@dataclass(frozen=True)
class MatchResult:
    """
    Greedy matching of one class's detections, in ranked order.

    ``order`` lists detection indices by descending score; the flag arrays
    follow that order. Ignored detections (matched to difficult GT) are
    neither TP nor FP.
    """

    order: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    duplicate: np.ndarray
    ignored: np.ndarray
    matched_gt: dict[int, tuple[int, int]] = field(default_factory=dict)
    num_gt: int = 0


@dataclass(frozen=True)
class PrCurve:
    recall: np.ndarray
    precision: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    num_gt: int


@dataclass(frozen=True)
class ClassResult:
    class_id: int
    name: str
    ap: float | None
    num_gt: int
    num_detections: int
    true_positives: int


@dataclass(frozen=True)
class EvaluationReport:
    per_class: list[ClassResult]
    mean_ap: float | None
    mode: str
    iou_thresh: float
    curves: dict[int, PrCurve] = field(default_factory=dict)


@dataclass(frozen=True)
class FpBreakdown:
    """False-positive type counts (loc, sim, oth, bg) per class and in total"""

    per_class: dict[int, dict[str, int]]
    top_n: int

    @property
    def totals(self) -> dict[str, int]:
        return {t: sum(counts[t] for counts in self.per_class.values()) for t in FP_TYPES}

    @property
    def considered(self) -> int:
        return sum(self.totals.values())
