"""Hard-negative mining around the linear SVM solver"""

import numpy as np

from app.core.exceptions import TrainingError
from app.core.metrics import HARD_NEGATIVES_MINED_TOTAL
from app.training.schema import MiningReport, SvmConfig, SvmSolution
from app.training.svm import train_linear_svm
from app.utils.logger import get_logger
from app.utils.rng import make_rng

logger = get_logger(__name__)

RESIDUAL_TOLERANCE = 1e-6


def initial_cache(
    image_ids: np.ndarray, per_image: int, seed: int, class_id: int
) -> np.ndarray:
    """Up to ``per_image`` random negative rows from every image (sorted row indices)."""
    rng = make_rng(seed, "mining", class_id)
    chosen: list[np.ndarray] = []
    for image_id in np.unique(image_ids):
        rows = np.flatnonzero(image_ids == image_id)
        take = min(per_image, rows.size)
        if take:
            chosen.append(rng.choice(rows, size=take, replace=False))
    if not chosen and image_ids.size:
        chosen.append(rng.choice(image_ids.size, size=1))
    return np.unique(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)


def mine_hard_negatives(
    positives: np.ndarray,
    negatives: np.ndarray,
    negative_image_ids: np.ndarray,
    class_id: int,
    cfg: SvmConfig,
    seed: int,
) -> tuple[SvmSolution, MiningReport]:
    """
    Train one class's SVM with a growing negative cache.

    Each round trains on positives plus the cache, scores every eligible
    negative and adds the uncached ones scoring above ``hard_threshold``.
    Stops when a round adds nothing or after ``max_rounds``. Nothing is ever
    evicted, so at convergence the solution is optimal for the full pool.

    Raises:
        TrainingError: no positives or no negatives for the class
    """
    positives = np.atleast_2d(np.asarray(positives, dtype=np.float64))
    negatives = np.asarray(negatives, dtype=np.float64)
    if positives.shape[0] == 0 or positives.size == 0:
        raise TrainingError(f"Class {class_id} has no positive examples")
    if negatives.shape[0] == 0:
        raise TrainingError(f"Class {class_id} has no negative-eligible regions")

    in_cache = np.zeros(negatives.shape[0], dtype=bool)
    seed_rows = initial_cache(
        np.asarray(negative_image_ids), cfg.initial_negatives_per_image, seed, class_id
    )
    in_cache[seed_rows] = True

    solution: SvmSolution | None = None
    converged = False
    rounds = 0
    for rounds in range(1, cfg.max_rounds + 1):
        X = np.vstack([positives, negatives[in_cache]])
        y = np.concatenate([np.ones(positives.shape[0]), -np.ones(int(in_cache.sum()))])
        solution = train_linear_svm(X, y, cfg)
        scores = negatives @ solution.weights + solution.bias
        hard = (scores > cfg.hard_threshold) & ~in_cache
        added = int(hard.sum())
        logger.info(
            "hard_negatives_mined",
            class_id=class_id,
            round=rounds,
            added=added,
            cache_size=int(in_cache.sum()),
            objective=solution.objective,
        )
        if not added:
            converged = True
            break
        HARD_NEGATIVES_MINED_TOTAL.labels(class_id=str(class_id)).inc(added)
        in_cache |= hard

    assert solution is not None
    scores = negatives @ solution.weights + solution.bias
    residual = int(np.sum((scores > cfg.hard_threshold + RESIDUAL_TOLERANCE) & ~in_cache))
    report = MiningReport(
        class_id=class_id,
        rounds=rounds,
        cache_size=int(in_cache.sum()),
        positives=int(positives.shape[0]),
        objective=solution.objective,
        residual_violators=residual,
        converged=converged,
    )
    return solution, report
