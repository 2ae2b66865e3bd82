"""Box types"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from app.core.exceptions import GeometryError


@dataclass(frozen=True, slots=True)
class BoxCorners:
    """Axis-aligned box in continuous pixel coordinates; width = x_max - x_min."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        values = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in values):
            raise GeometryError(f"Non-finite box coordinates: {values}")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise GeometryError(f"Inverted box: {values}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    def scaled(self, factor: float) -> BoxCorners:
        return BoxCorners(*(v * factor for v in self.as_tuple()))

    @classmethod
    def from_array(cls, row: Sequence[float] | np.ndarray) -> BoxCorners:
        return cls(float(row[0]), float(row[1]), float(row[2]), float(row[3]))


@dataclass(frozen=True, slots=True)
class BoxCenter:
    """Center form (x, y, w, h) used by the regression transform."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        values = (self.x, self.y, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise GeometryError(f"Non-finite box: {values}")
        if self.w < 0 or self.h < 0:
            raise GeometryError(f"Negative box size: {values}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True, slots=True)
class RegressionDeltas:
    """Scale-invariant translation (dx, dy) and log-space scale (dw, dh)."""

    dx: float
    dy: float
    dw: float
    dh: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise GeometryError(f"Non-finite deltas: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.dx, self.dy, self.dw, self.dh)


def boxes_to_array(boxes: Iterable[BoxCorners]) -> np.ndarray:
    """Stack boxes into an (N, 4) float64 array (empty input gives shape (0, 4))."""
    rows = [box.as_tuple() for box in boxes]
    if not rows:
        return np.zeros((0, 4), dtype=np.float64)
    return np.asarray(rows, dtype=np.float64)


def array_to_boxes(array: np.ndarray) -> list[BoxCorners]:
    return [BoxCorners.from_array(row) for row in np.asarray(array, dtype=np.float64)]
