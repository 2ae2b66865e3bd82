"""Pipeline configuration and stage reports"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from app.detection.schema import DetectionConfig
from app.evaluation.schema import EvaluationConfig
from app.features.schema import ExtractorConfig, UnitRef
from app.imaging.schema import WarpConfig
from app.proposals.schema import ProposerConfig
from app.synthdata.schema import DatasetConfig, SplitConfig
from app.training.schema import BBoxConfig, SvmConfig


class SeedsConfig(BaseModel):
    """One named seed per stochastic concern"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    data: int = Field(0, ge=0, description="Scene generation")
    jitter: int = Field(1, ge=0, description="Ground-truth jitter proposals")
    split: int = Field(2, ge=0, description="Balanced split search")
    minibatch: int = Field(3, ge=0, description="Fine-tuning minibatch sampling report")
    conv: int = Field(4, ge=0, description="Random conv stack weights")
    mining: int = Field(5, ge=0, description="Initial hard-negative cache")


class VisualizeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    units: list[str] = Field(default_factory=lambda: ["0,0,0"], description="Units as 'y,x,c'")
    k: int = Field(16, ge=0, description="Top activations per unit")
    nms_thresh: float = Field(0.3, ge=0.0, description="Per-image overlap suppression of hits")
    split: Literal["train", "test", "all"] = "test"
    columns: int = Field(8, ge=1)
    scale: int = Field(4, ge=1, description="Montage enlargement factor")

    @field_validator("units")
    @classmethod
    def check_units(cls, value: list[str]) -> list[str]:
        for text in value:
            UnitRef.parse(text)
        return value


class AblationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    variants: list[str] = Field(
        default_factory=lambda: ["hog", "conv"],
        min_length=1,
        description="Extractor variants: 'hog', 'conv' or 'conv:<layers>'",
    )

    @field_validator("variants")
    @classmethod
    def check_variants(cls, value: list[str]) -> list[str]:
        for variant in value:
            parse_variant(variant)
        return value


def parse_variant(text: str) -> tuple[str, int | None]:
    """``"hog"`` -> ("hog", None); ``"conv:2"`` -> ("conv", 2)."""
    kind, _, layer = text.partition(":")
    if kind not in ("hog", "conv"):
        raise ValueError(f"Unknown extractor variant {text!r} (use hog, conv or conv:<layer>)")
    if not layer:
        return kind, None
    if kind != "conv" or not layer.isdigit() or int(layer) < 1:
        raise ValueError(f"Variant {text!r}: only conv takes a positive layer count")
    return kind, int(layer)


class PipelineConfig(BaseSettings):
    """
    Everything that determines a run's outputs.

    Only explicit values count: environment variables and dotenv files are
    not consulted, so a config file plus its overrides fix the run.
    """

    model_config = SettingsConfigDict(extra="forbid", frozen=True)

    run_dir: Path = Field(Path("runs/demo"), description="Root of every stage artifact")
    seeds: SeedsConfig = Field(default_factory=SeedsConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    proposer: ProposerConfig = Field(default_factory=ProposerConfig)
    warp: WarpConfig = Field(default_factory=WarpConfig)
    extractor: ExtractorConfig = Field(default_factory=ExtractorConfig)
    svm: SvmConfig = Field(default_factory=SvmConfig)
    bbox: BBoxConfig = Field(default_factory=BBoxConfig)
    detection: DetectionConfig = Field(default_factory=DetectionConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    visualize: VisualizeConfig = Field(default_factory=VisualizeConfig)
    ablation: AblationConfig = Field(default_factory=AblationConfig)
    split: SplitConfig = Field(default_factory=SplitConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @model_validator(mode="after")
    def check_hog_patch(self) -> "PipelineConfig":
        cell = self.extractor.hog.cell
        if self.extractor.kind == "hog" and self.warp.out_size % cell:
            raise ValueError(
                f"warp.out_size {self.warp.out_size} must be a multiple of the HOG cell {cell}"
            )
        return self

    @property
    def dataset_root(self) -> Path:
        return self.dataset.root if self.dataset.root is not None else self.run_dir / "dataset"


@dataclass(frozen=True)
class StageReport:
    stage: str
    fingerprint: str
    cache_hit: bool = False
    outputs: list[Path] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AblationRow:
    variant: str
    dim: int
    mean_ap: float | None
    refined_mean_ap: float | None
