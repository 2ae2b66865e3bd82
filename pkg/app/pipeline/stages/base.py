"""Stage contract, registry and the shared loaders every stage uses"""

import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, TypeVar

import numpy as np
import structlog
from joblib import Parallel, delayed

from app.core.base.registry import Registry
from app.core.exceptions import DatasetError
from app.core.metrics import STAGE_DURATION, STAGE_RUNS_TOTAL
from app.imaging import Image, image_mean, warp_region
from app.pipeline.cache import FeatureCache
from app.pipeline.config import stage_fingerprints
from app.pipeline.repository import RunLayout, require_artifact
from app.pipeline.schema import PipelineConfig, StageReport
from app.proposals import ProposalSet, read_proposals
from app.synthdata import Annotation, DatasetManifest
from app.synthdata.repository import load_dataset_image, read_annotations, read_manifest
from app.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

StageFn = Callable[["StageContext"], StageReport]
stage_registry: Registry[StageFn] = Registry("stage")


def stage(name: str) -> Callable[[StageFn], StageFn]:
    """Register a stage function under its CLI name."""
    return stage_registry.register(name)


@dataclass
class StageContext:
    """Config plus the per-invocation options a stage may read"""

    cfg: PipelineConfig
    jobs: int | None = None
    units: Sequence[str] = ()
    k: int | None = None
    variants: Sequence[str] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def layout(self) -> RunLayout:
        return RunLayout(run_dir=self.cfg.run_dir, dataset_root=self.cfg.dataset_root)

    @cached_property
    def fingerprints(self) -> dict[str, str]:
        return stage_fingerprints(self.cfg)

    @property
    def n_jobs(self) -> int:
        return self.jobs if self.jobs is not None else -1

    def parallel_map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """Apply ``fn`` to every item on worker threads; results keep input order."""
        items = list(items)
        if not items:
            return []
        if self.n_jobs == 1 or len(items) == 1:
            return [fn(item) for item in items]
        return Parallel(n_jobs=self.n_jobs, prefer="threads")(delayed(fn)(item) for item in items)

    # -- upstream artifacts -------------------------------------------------

    @cached_property
    def manifest(self) -> DatasetManifest:
        require_artifact(
            self.layout.dataset_manifest, "gen-data", self.fingerprints["gen-data"], self.layout
        )
        return read_manifest(self.layout.dataset_root)

    @cached_property
    def annotations(self) -> dict[int, Annotation]:
        manifest = self.manifest
        return read_annotations(self.layout.dataset_root, manifest.ids())

    @cached_property
    def proposals(self) -> dict[int, ProposalSet]:
        expected = self.fingerprints["propose"]
        require_artifact(self.layout.proposals, "propose", expected, self.layout)
        return read_proposals(self.layout.proposals, self.manifest.ids())

    @cached_property
    def feature_cache(self) -> FeatureCache:
        fp = self.fingerprints["extract"]
        return FeatureCache(self.layout.features_dir(fp), fp)

    def load_image(self, image_id: int) -> Image:
        return load_dataset_image(self.layout.dataset_root, self.manifest, image_id)

    def _mean_ids(self) -> list[int]:
        return self.manifest.ids("train") or self.manifest.ids()

    @cached_property
    def pixel_mean(self) -> np.ndarray:
        """Per-channel mean of the raw training images (all images when there are none)."""
        return image_mean(self.load_image(i) for i in self._mean_ids())

    @cached_property
    def patch_mean(self) -> np.ndarray:
        """
        Per-channel mean over every warped training patch: the proposals and
        ground-truth boxes of each training image.

        Out-of-image samples take ``pixel_mean`` while the patches are
        warped. The result is both the fill and the subtracted mean for
        every later warp.
        """
        fill = self.pixel_mean
        warp_cfg = self.cfg.warp

        def image_sums(image_id: int) -> tuple[np.ndarray, int]:
            image = self.load_image(image_id)
            candidates = [*self.proposals[image_id].boxes, *self.annotations[image_id].boxes()]
            boxes = [b for b in candidates if b.width > 0 and b.height > 0]
            if not boxes:
                return np.zeros(len(fill)), 0
            patches = (warp_region(image, box, warp_cfg, fill) for box in boxes)
            return image_mean(patches) * len(boxes), len(boxes)

        parts = self.parallel_map(image_sums, self._mean_ids())
        count = sum(n for _, n in parts)
        if count == 0:
            raise DatasetError("No training patches to take the mean over")
        return sum(s for s, _ in parts) / count

    @property
    def class_ids(self) -> list[int]:
        return list(range(len(self.manifest.class_names)))

    def image_ids(self, split: str) -> list[int]:
        return self.manifest.ids(split)


def execute(name: str, ctx: StageContext) -> StageReport:
    """Run one registered stage with timing, metrics and bound log context."""
    fn = stage_registry.get(name)
    start = time.perf_counter()
    with structlog.contextvars.bound_contextvars(stage=name, run_dir=str(ctx.cfg.run_dir)):
        logger.info("stage_started")
        try:
            report = fn(ctx)
        except Exception:
            STAGE_RUNS_TOTAL.labels(stage=name, status="failed").inc()
            raise
        elapsed = time.perf_counter() - start
        STAGE_RUNS_TOTAL.labels(stage=name, status="succeeded").inc()
        STAGE_DURATION.labels(stage=name).observe(elapsed)
        logger.info(
            "stage_completed",
            cache_hit=report.cache_hit,
            outputs=len(report.outputs),
            duration_seconds=round(elapsed, 3),
        )
    return report
