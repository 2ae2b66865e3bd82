"""Class-balanced two-way split search"""

import itertools
import math
from collections.abc import Mapping, Sequence

import numpy as np

from app.core.exceptions import DatasetError
from app.synthdata.schema import SplitConfig, SplitResult
from app.utils.logger import get_logger
from app.utils.rng import make_rng

logger = get_logger(__name__)


def relative_imbalance(a: int | float, b: int | float) -> float:
    """``|a - b| / (a + b)``, defined as 0 when both are 0."""
    total = a + b
    if total == 0:
        return 0.0
    return abs(a - b) / total


def _imbalances(counts: np.ndarray, in_a: np.ndarray) -> np.ndarray:
    side_a = counts[in_a].sum(axis=0)
    side_b = counts[~in_a].sum(axis=0)
    total = side_a + side_b
    out = np.zeros(counts.shape[1])
    np.divide(np.abs(side_a - side_b), total, out=out, where=total > 0)
    return out


def _score(counts: np.ndarray, in_a: np.ndarray) -> tuple[float, float]:
    values = _imbalances(counts, in_a)
    return float(values.max(initial=0.0)), float(values.mean()) if values.size else 0.0


def _normalized(in_a: np.ndarray) -> np.ndarray:
    # side A is the larger side (sizes differ by at most one)
    if in_a.sum() < (~in_a).sum():
        return ~in_a
    return in_a


def _local_search(
    counts: np.ndarray, in_a: np.ndarray, sweeps: int
) -> tuple[np.ndarray, tuple[float, float]]:
    """Best-improvement sweeps over pair swaps and single moves off the larger side."""
    best = _score(counts, in_a)
    n = in_a.shape[0]
    for _ in range(sweeps):
        candidate, candidate_score = None, best
        members = np.flatnonzero(in_a)
        others = np.flatnonzero(~in_a)
        for i in members:
            for j in others:
                trial = in_a.copy()
                trial[i], trial[j] = False, True
                score = _score(counts, trial)
                if score < candidate_score:
                    candidate, candidate_score = trial, score
        if n % 2 == 1:
            for i in members:
                trial = in_a.copy()
                trial[i] = False
                score = _score(counts, trial)
                if score < candidate_score:
                    candidate, candidate_score = _normalized(trial), score
        if candidate is None:
            break
        in_a, best = candidate, candidate_score
    return in_a, best


def balanced_split(
    per_image_class_counts: Mapping[int, Sequence[int]],
    cfg: SplitConfig,
    seed: int,
) -> SplitResult:
    """
    Halve the images so every class is split as evenly as possible.

    Minimizes the maximum relative imbalance over classes, ties broken by the
    mean. Side sizes differ by at most one (side A is never the smaller).
    Small inputs are enumerated exactly; larger ones use ``n_candidates``
    seeded random partitions refined by local search.

    Raises:
        DatasetError: fewer than two images
    """
    image_ids = sorted(per_image_class_counts)
    n = len(image_ids)
    if n < 2:
        raise DatasetError("A split needs at least two images")
    counts = np.asarray([per_image_class_counts[i] for i in image_ids], dtype=np.int64)
    size_a = math.ceil(n / 2)

    best_mask: np.ndarray | None = None
    best_score = (math.inf, math.inf)
    if math.comb(n, size_a) <= cfg.exhaustive_limit:
        for chosen in itertools.combinations(range(n), size_a):
            in_a = np.zeros(n, dtype=bool)
            in_a[list(chosen)] = True
            score = _score(counts, in_a)
            if score < best_score:
                best_mask, best_score = in_a, score
        method = "exhaustive"
    else:
        rng = make_rng(seed, "split")
        for _ in range(cfg.n_candidates):
            in_a = np.zeros(n, dtype=bool)
            in_a[rng.permutation(n)[:size_a]] = True
            in_a, score = _local_search(counts, in_a, cfg.local_search_steps)
            if score < best_score:
                best_mask, best_score = in_a, score
        method = "local_search"

    assert best_mask is not None
    values = _imbalances(counts, best_mask)
    present = counts.sum(axis=0) > 0
    side_a_counts = counts[best_mask].sum(axis=0)
    side_b_counts = counts[~best_mask].sum(axis=0)
    result = SplitResult(
        side_a=tuple(image_ids[i] for i in np.flatnonzero(best_mask)),
        side_b=tuple(image_ids[i] for i in np.flatnonzero(~best_mask)),
        max_relative_imbalance=float(values.max(initial=0.0)),
        median_relative_imbalance=float(np.median(values[present])) if present.any() else 0.0,
        mean_relative_imbalance=float(values.mean()) if values.size else 0.0,
        per_class=tuple(
            (int(a), int(b)) for a, b in zip(side_a_counts, side_b_counts, strict=True)
        ),
    )
    logger.info(
        "balanced_split_found",
        images=n,
        method=method,
        max_imbalance=result.max_relative_imbalance,
        median_imbalance=result.median_relative_imbalance,
    )
    return result
