"""Synthetic dataset schemas"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.geometry import BoxCorners

ShapeKind = Literal["disc", "square", "triangle", "ring"]
SplitName = Literal["train", "test"]


class DatasetConfig(BaseModel):
    """Scene generator settings; with the data seed they fix every pixel"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    root: Path | None = Field(None, description="Dataset directory (default <run_dir>/dataset)")
    image_size: int = Field(96, ge=8, description="Square image side (pixels)")
    channels: Literal[1, 3] = 3
    classes: list[ShapeKind] = Field(
        default_factory=lambda: ["disc", "square", "triangle"], min_length=1
    )
    similarity_groups: list[list[ShapeKind]] = Field(
        default_factory=lambda: [["square", "triangle"]],
        description="Classes confusable with each other (false-positive analysis)",
    )
    objects_per_image: tuple[int, int] = Field((1, 3), description="Inclusive object count range")
    object_size: tuple[int, int] = Field((16, 32), description="Inclusive side/diameter range")
    clutter_density: float = Field(1.0, ge=0.0, description="Mean clutter bars per 32x32 pixels")
    noise_level: float = Field(0.03, ge=0.0, description="Gaussian pixel noise standard deviation")
    train_images: int = Field(200, ge=0)
    test_images: int = Field(100, ge=0)

    @model_validator(mode="after")
    def check_ranges(self) -> "DatasetConfig":
        low, high = self.objects_per_image
        if low < 0 or high < low:
            raise ValueError("objects_per_image must be a non-empty range of counts")
        low, high = self.object_size
        if low < 2 or high < low or high > self.image_size:
            raise ValueError("object_size must be a non-empty range within the image")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("classes must be distinct")
        for group in self.similarity_groups:
            unknown = set(group) - set(self.classes)
            if unknown:
                raise ValueError(f"similarity group names unknown classes {sorted(unknown)}")
        return self

    @property
    def num_images(self) -> int:
        return self.train_images + self.test_images

    def split_of(self, image_id: int) -> SplitName:
        return "train" if image_id < self.train_images else "test"

    def similarity_group_ids(self) -> list[list[int]]:
        index = {name: i for i, name in enumerate(self.classes)}
        return [[index[name] for name in group] for group in self.similarity_groups]


class SplitConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_candidates: int = Field(20, ge=1, description="Random initial partitions")
    local_search_steps: int = Field(50, ge=0, description="Improvement sweeps per candidate")
    exhaustive_limit: int = Field(
        5000, ge=0, description="Enumerate every balanced partition up to this many"
    )
    source: Literal["train", "test", "all"] = "test"


@dataclass(frozen=True, slots=True)
class AnnotatedObject:
    class_id: int
    box: BoxCorners
    difficult: bool = False


@dataclass(frozen=True)
class Annotation:
    image_id: int
    objects: list[AnnotatedObject] = field(default_factory=list)

    def boxes(self, class_id: int | None = None) -> list[BoxCorners]:
        return [o.box for o in self.objects if class_id is None or o.class_id == class_id]

    def count(self, class_id: int) -> int:
        return sum(1 for o in self.objects if o.class_id == class_id)


@dataclass(frozen=True)
class SplitResult:
    side_a: tuple[int, ...]
    side_b: tuple[int, ...]
    max_relative_imbalance: float
    median_relative_imbalance: float
    mean_relative_imbalance: float
    per_class: tuple[tuple[int, int], ...] = ()


class ImageEntry(BaseModel):
    image_id: int
    split: SplitName
    file: str


class DatasetManifest(BaseModel):
    """``manifest.json`` at the dataset root"""

    class_names: list[str]
    similarity_groups: list[list[str]]
    image_size: int
    channels: int
    images: list[ImageEntry]
    fingerprint: str

    def ids(self, split: str = "all") -> list[int]:
        return [e.image_id for e in self.images if split == "all" or e.split == split]
