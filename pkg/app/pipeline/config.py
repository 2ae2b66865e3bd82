"""TOML config loading, dotted overrides and per-stage fingerprints"""

import tomllib
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError
from pydantic_settings import TomlConfigSettingsSource

from app.core.exception_handlers import validation_details
from app.core.exceptions import ConfigError
from app.core.service.fingerprint import fingerprint
from app.pipeline.schema import PipelineConfig
from app.schemas.errors import ErrorDetail
from app.utils.logger import get_logger

logger = get_logger(__name__)


def parse_override(text: str) -> tuple[list[str], Any]:
    """
    Split ``"svm.C=0.5"`` into (["svm", "C"], 0.5).

    The value is read as a TOML literal (numbers, booleans, arrays, inline
    tables, quoted strings); anything else is kept as a bare string.
    """
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(
            f"Override {text!r} must look like key=value",
            details=[
                ErrorDetail(field=None, message=f"bad override {text!r}", code="BAD_OVERRIDE")
            ],
        )
    path = key.split(".")
    if any(not part for part in path):
        raise ConfigError(
            f"Override key {key!r} has an empty path segment",
            details=[ErrorDetail(field=key, message="empty path segment", code="BAD_OVERRIDE")],
        )
    raw = raw.strip()
    try:
        value = tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        value = raw
    return path, value


def apply_overrides(raw: Mapping[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """Merge dotted overrides into a copy of the raw config mapping (later ones win)."""
    merged = _deep_copy(raw)
    for text in overrides:
        path, value = parse_override(text)
        node = merged
        for part in path[:-1]:
            child = node.get(part)
            if not isinstance(child, dict):
                child = {}
                node[part] = child
            node = child
        node[path[-1]] = value
    return merged


def _deep_copy(raw: Mapping[str, Any]) -> dict[str, Any]:
    return {k: _deep_copy(v) if isinstance(v, Mapping) else v for k, v in raw.items()}


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Raw mapping of a TOML config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(
            f"Config file {path} does not exist",
            details=[ErrorDetail(field=None, message=f"no such file: {path}", code="NOT_FOUND")],
        )
    try:
        return dict(TomlConfigSettingsSource(PipelineConfig, toml_file=path)())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(
            f"Config file {path} is not valid TOML: {exc}",
            details=[ErrorDetail(field=None, message=str(exc), code="TOML_DECODE_ERROR")],
        ) from exc


def build_config(raw: Mapping[str, Any], overrides: Sequence[str] = ()) -> PipelineConfig:
    """
    Validate a raw mapping plus overrides.

    Raises:
        ConfigError: unknown keys or ill-typed values, one detail per problem
    """
    merged = apply_overrides(raw, overrides)
    try:
        return PipelineConfig(**merged)
    except ValidationError as exc:
        details = validation_details(exc)
        summary = "; ".join(f"{d.field}: {d.message}" for d in details[:3])
        raise ConfigError(f"Invalid configuration: {summary}", details=details) from exc


def load_config(
    path: str | Path | None = None,
    overrides: Sequence[str] = (),
    run_dir: str | Path | None = None,
) -> PipelineConfig:
    """Config from ``path`` (defaults only when None), overrides, then ``run_dir``."""
    raw = read_config_file(path) if path is not None else {}
    if run_dir is not None:
        overrides = [*overrides, f"run_dir={_toml_string(str(run_dir))}"]
    cfg = build_config(raw, overrides)
    logger.debug("config_loaded", path=str(path) if path else None, overrides=len(overrides))
    return cfg


def _toml_string(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _section(cfg: PipelineConfig, name: str) -> Any:
    return getattr(cfg, name).model_dump(mode="json")


def stage_fingerprints(cfg: PipelineConfig) -> dict[str, str]:
    """
    Fingerprint of every stage's output.

    Each covers exactly the sections (and seeds) the stage reads, chained
    with its upstream stages, so editing one section invalidates that stage
    and everything downstream of it. The dataset root and run directory only
    say where artifacts live and are left out.
    """
    seeds = cfg.seeds
    dataset = _section(cfg, "dataset")
    dataset.pop("root", None)
    data = fingerprint({"dataset": dataset, "seed": seeds.data})
    propose = fingerprint({"proposer": _section(cfg, "proposer"), "seed": seeds.jitter}, data)
    extract = fingerprint(
        {
            "extractor": _section(cfg, "extractor"),
            "warp": _section(cfg, "warp"),
            "seed": seeds.conv,
        },
        propose,
    )
    svm = fingerprint({"svm": _section(cfg, "svm"), "seed": seeds.mining}, extract)
    bbreg = fingerprint({"bbox": _section(cfg, "bbox")}, extract)
    detection = _section(cfg, "detection")
    tune = fingerprint(
        {
            "grid": detection["tune_grid"],
            "split": detection["tune_split"],
            "nms_thresh": detection["nms_thresh"],
            "score_floor": detection["score_floor"],
            "evaluation": _section(cfg, "evaluation"),
        },
        svm,
    )
    detect_upstream = [svm]
    if cfg.detection.refine:
        detect_upstream.append(bbreg)
    if cfg.detection.use_tuned_nms:
        detect_upstream.append(tune)
    detect = fingerprint(
        {"detection": detection, "split": cfg.evaluation.split}, *detect_upstream
    )
    evaluation = fingerprint({"evaluation": _section(cfg, "evaluation")}, detect)
    visualize = fingerprint(
        {
            "visualize": _section(cfg, "visualize"),
            "conv": _section(cfg, "extractor")["conv"],
            "warp": _section(cfg, "warp"),
            "seed": seeds.conv,
        },
        propose,
    )
    return {
        "gen-data": data,
        "propose": propose,
        "extract": extract,
        "train-svm": svm,
        "train-bbreg": bbreg,
        "tune-nms": tune,
        "detect": detect,
        "evaluate": evaluation,
        "analyze": evaluation,
        "visualize": visualize,
        "split": fingerprint({"split": _section(cfg, "split"), "seed": seeds.split}, data),
        "ablate": fingerprint(
            {"ablation": _section(cfg, "ablation"), "evaluation": _section(cfg, "evaluation")},
            fingerprint(
                {
                    "svm": _section(cfg, "svm"),
                    "bbox": _section(cfg, "bbox"),
                    "detection": detection,
                    "warp": _section(cfg, "warp"),
                    "extractor": _section(cfg, "extractor"),
                    "seeds": seeds.model_dump(),
                },
                propose,
            ),
        ),
    }
