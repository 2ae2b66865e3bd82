"""On-disk per-image feature blocks keyed by the extract fingerprint"""

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.core.exceptions import MissingArtifactError, StaleArtifactError
from app.core.metrics import FEATURE_CACHE_LOOKUPS_TOTAL
from app.core.service.atomic import atomic_write_bytes, atomic_write_text
from app.utils.logger import get_logger

logger = get_logger(__name__)

CACHE_MANIFEST = "manifest.json"


@dataclass(frozen=True)
class FeatureBlock:
    """
    Features of one image.

    Rows ``[0, n_proposals)`` belong to the image's proposals in file order;
    any remaining rows are its ground-truth boxes in annotation order.
    """

    image_id: int
    features: np.ndarray
    n_proposals: int

    @property
    def proposal_features(self) -> np.ndarray:
        return self.features[: self.n_proposals]

    @property
    def gt_features(self) -> np.ndarray:
        return self.features[self.n_proposals :]


class FeatureCache:
    """
    Directory ``features/<fingerprint[:12]>/`` of ``<image_id>.npy`` blocks
    plus a manifest written last. A changed proposer, warp or extractor
    changes the fingerprint and therefore the directory.
    """

    def __init__(self, directory: Path, fp: str) -> None:
        self.directory = Path(directory)
        self.fingerprint = fp
        self._manifest: dict | None = None

    @property
    def manifest_path(self) -> Path:
        return self.directory / CACHE_MANIFEST

    def block_path(self, image_id: int) -> Path:
        return self.directory / f"{image_id:06d}.npy"

    def read_manifest(self) -> dict | None:
        if not self.manifest_path.is_file():
            return None
        try:
            return json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return None

    def is_complete(self, image_ids: list[int]) -> bool:
        """True when a manifest for this fingerprint lists every image and every block exists."""
        manifest = self.read_manifest()
        hit = (
            manifest is not None
            and manifest.get("fingerprint") == self.fingerprint
            and sorted(int(k) for k in manifest.get("images", {})) == sorted(image_ids)
            and all(self.block_path(i).is_file() for i in image_ids)
        )
        FEATURE_CACHE_LOOKUPS_TOTAL.labels(result="hit" if hit else "miss").inc()
        logger.info(
            "feature_cache_hit" if hit else "feature_cache_miss",
            directory=str(self.directory),
            images=len(image_ids),
        )
        return hit

    def store(self, block: FeatureBlock) -> Path:
        buffer = io.BytesIO()
        np.save(buffer, np.ascontiguousarray(block.features, dtype=np.float64), allow_pickle=False)
        path = self.block_path(block.image_id)
        atomic_write_bytes(path, buffer.getvalue())
        return path

    def finalize(
        self,
        blocks: dict[int, int],
        dim: int,
        layer_tag: str,
        mean: np.ndarray,
    ) -> Path:
        """Write the manifest; ``blocks`` maps image id to its proposal row count."""
        record = {
            "fingerprint": self.fingerprint,
            "dim": dim,
            "layer_tag": layer_tag,
            "mean": [float(v) for v in mean],
            "images": {str(i): n for i, n in sorted(blocks.items())},
        }
        atomic_write_text(self.manifest_path, json.dumps(record, indent=2, sort_keys=True) + "\n")
        return self.manifest_path

    def require(self) -> dict:
        """
        Manifest of a completed extraction for this fingerprint.

        Raises:
            MissingArtifactError: nothing was extracted under this config
            StaleArtifactError: the manifest names another fingerprint
        """
        manifest = self.read_manifest()
        artifact = f"features/{self.directory.name}/{CACHE_MANIFEST}"
        if manifest is None:
            raise MissingArtifactError(stage="extract", artifact=artifact)
        found = str(manifest.get("fingerprint", ""))
        if found != self.fingerprint:
            raise StaleArtifactError("extract", artifact, self.fingerprint, found)
        self._manifest = manifest
        return manifest

    def mean(self) -> np.ndarray:
        return np.asarray(self.require()["mean"], dtype=np.float64)

    def load(self, image_id: int) -> FeatureBlock:
        manifest = self._manifest or self.require()
        n_proposals = manifest["images"].get(str(image_id))
        path = self.block_path(image_id)
        if n_proposals is None or not path.is_file():
            raise MissingArtifactError(
                stage="extract", artifact=f"features/{self.directory.name}/{path.name}"
            )
        features = np.load(path, allow_pickle=False)
        return FeatureBlock(image_id=image_id, features=features, n_proposals=int(n_proposals))
