"""Run-directory layout and artifact fingerprint sidecars"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from app.core.exceptions import MissingArtifactError, StaleArtifactError
from app.core.service.atomic import atomic_write_text
from app.synthdata.repository import MANIFEST_FILE

META_SUFFIX = ".meta.json"


@dataclass(frozen=True)
class RunLayout:
    """Stable relative paths of every artifact under a run directory"""

    run_dir: Path
    dataset_root: Path

    @property
    def dataset_manifest(self) -> Path:
        return self.dataset_root / MANIFEST_FILE

    @property
    def proposals(self) -> Path:
        return self.run_dir / "proposals.txt"

    @property
    def features_root(self) -> Path:
        return self.run_dir / "features"

    def features_dir(self, fp: str) -> Path:
        return self.features_root / fp[:12]

    @property
    def svm_model(self) -> Path:
        return self.run_dir / "models" / "svm.bin"

    @property
    def bbox_model(self) -> Path:
        return self.run_dir / "models" / "bbreg.bin"

    @property
    def raw_detections(self) -> Path:
        return self.run_dir / "detections" / "raw.txt"

    @property
    def refined_detections(self) -> Path:
        return self.run_dir / "detections" / "refined.txt"

    @property
    def reports(self) -> Path:
        return self.run_dir / "reports"

    @property
    def nms_tuning(self) -> Path:
        return self.reports / "nms_tuning.json"

    @property
    def montages(self) -> Path:
        return self.run_dir / "montages"

    @property
    def ablation_root(self) -> Path:
        return self.run_dir / "ablation"

    def relative(self, path: Path) -> str:
        try:
            return str(path.relative_to(self.run_dir))
        except ValueError:
            return str(path)


def meta_path(artifact: Path) -> Path:
    return artifact.with_name(artifact.name + META_SUFFIX)


def write_meta(artifact: Path, stage: str, fp: str, **extra: Any) -> Path:
    """Record which stage and config produced ``artifact``."""
    path = meta_path(artifact)
    record = {"stage": stage, "fingerprint": fp, **extra}
    atomic_write_text(path, json.dumps(record, indent=2, sort_keys=True, default=str) + "\n")
    return path


def read_meta(artifact: Path) -> dict[str, Any] | None:
    path = meta_path(artifact)
    if not path.is_file():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return None


def require_artifact(artifact: Path, stage: str, expected: str, layout: RunLayout) -> Path:
    """
    Check that ``stage`` produced ``artifact`` under the current config.

    Raises:
        MissingArtifactError: the artifact or its sidecar is absent
        StaleArtifactError: it was built from a different config
    """
    name = layout.relative(artifact)
    meta = read_meta(artifact)
    if not artifact.exists() or meta is None:
        raise MissingArtifactError(stage=stage, artifact=name)
    found = str(meta.get("fingerprint", ""))
    if found != expected:
        raise StaleArtifactError(stage=stage, artifact=name, expected=expected, found=found)
    return artifact


def is_current(artifact: Path, expected: str) -> bool:
    meta = read_meta(artifact)
    return artifact.exists() and meta is not None and meta.get("fingerprint") == expected
