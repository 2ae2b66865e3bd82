"""Primal linear SVM: averaged subgradient descent, then active-set and dual refinement"""

import numpy as np
from scipy.optimize import minimize

from app.core.exceptions import TrainingError
from app.core.metrics import SVM_SOLVER_ITERATIONS
from app.training.schema import SvmConfig, SvmSolution
from app.utils.logger import get_logger

logger = get_logger(__name__)

POLISH_BANDS = (0.5, 0.2, 0.1, 0.05, 0.01, 1e-3, 1e-4)
POLISH_ROUNDS = 25
STALL_EVALUATIONS = 5


def svm_objective(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray, C: float
) -> float:
    """``0.5 * (|w|^2 + b^2) + C * sum(max(0, 1 - y (X w + b)))``; the bias is regularized."""
    margins = y * (X @ weights + bias)
    return float(0.5 * (weights @ weights + bias * bias) + C * np.maximum(0.0, 1.0 - margins).sum())


def _objective(v: np.ndarray, Z: np.ndarray, C: float) -> float:
    return float(0.5 * (v @ v) + C * np.maximum(0.0, 1.0 - Z @ v).sum())


def _polish(v: np.ndarray, Z: np.ndarray, C: float) -> np.ndarray:
    """
    Re-solve the optimality conditions on a guessed margin set.

    Points with margin below ``1 - band`` get the full dual weight C, points
    within ``band`` of the margin get weights solving ``Z_M v = 1``, the rest
    none. A candidate replaces ``v`` only when it lowers the objective.
    """
    best = _objective(v, Z, C)
    for _ in range(POLISH_ROUNDS):
        improved = False
        for band in POLISH_BANDS:
            margins = Z @ v
            violators = margins < 1.0 - band
            on_margin = np.abs(margins - 1.0) <= band
            base = C * Z[violators].sum(axis=0)
            if on_margin.any():
                Z_m = Z[on_margin]
                rhs = 1.0 - Z_m @ base
                alpha, *_ = np.linalg.lstsq(Z_m @ Z_m.T, rhs, rcond=None)
                candidate = base + Z_m.T @ np.clip(alpha, 0.0, C)
            else:
                candidate = base
            value = _objective(candidate, Z, C)
            if value < best - 1e-15 * max(1.0, abs(best)):
                v, best, improved = candidate, value, True
        if not improved:
            break
    return v


def _dual_refine(v: np.ndarray, Z: np.ndarray, C: float) -> np.ndarray:
    """
    Solve the box-constrained dual ``min 0.5 |Z^T a|^2 - sum(a)``, ``0 <= a <= C``.

    With the bias regularized there is no equality constraint, so L-BFGS-B
    applies directly; ``v = Z^T a``. Warm-started from the margins of ``v``.
    """
    margins = Z @ v
    start = np.where(margins < 1.0, C, 0.0)

    def dual(alpha: np.ndarray) -> tuple[float, np.ndarray]:
        w = Z.T @ alpha
        return 0.5 * float(w @ w) - float(alpha.sum()), Z @ w - 1.0

    result = minimize(
        dual,
        start,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, C)] * Z.shape[0],
        options={"maxiter": 5000, "ftol": 1e-16, "gtol": 1e-12},
    )
    candidate = Z.T @ result.x
    if _objective(candidate, Z, C) < _objective(v, Z, C):
        return candidate
    return v


def train_linear_svm(X: np.ndarray, y: np.ndarray, cfg: SvmConfig) -> SvmSolution:
    """
    Minimize ``0.5 * (|w|^2 + b^2) + C * sum(hinge)`` for labels in {-1, +1}.

    Full-batch subgradient steps of size 1/t with iterate averaging; the best
    of the last and averaged iterates is tracked every ``eval_every`` steps,
    so ``history`` never increases. An active-set polish and a dual
    box-QP solve then refine the best point, each kept only if it helps.

    Raises:
        TrainingError: empty input or labels of one sign only
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise TrainingError("SVM training needs a non-empty (n, d) matrix with one label per row")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("SVM labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("SVM training needs at least one positive and one negative example")

    C = cfg.C
    Z = y[:, None] * np.hstack([X, np.ones((X.shape[0], 1))])
    v = np.zeros(Z.shape[1])
    average = np.zeros_like(v)
    best_v = v.copy()
    best = _objective(v, Z, C)
    history = [best]
    stalled = 0
    iterations = 0

    for t in range(1, cfg.max_iters + 1):
        iterations = t
        active = (Z @ v) < 1.0
        gradient = v - C * Z[active].sum(axis=0)
        v = v - gradient / t
        average += (v - average) / t
        if t % cfg.eval_every:
            continue
        previous = best
        for candidate in (v, average):
            value = _objective(candidate, Z, C)
            if value < best:
                best, best_v = value, candidate.copy()
        history.append(best)
        if previous - best <= cfg.tolerance * max(1.0, abs(best)):
            stalled += 1
            if stalled >= STALL_EVALUATIONS:
                break
        else:
            stalled = 0

    best_v = _dual_refine(_polish(best_v, Z, C), Z, C)
    best = _objective(best_v, Z, C)
    if best < history[-1]:
        history.append(best)
    SVM_SOLVER_ITERATIONS.observe(iterations)
    logger.debug(
        "svm_trained", examples=X.shape[0], dim=X.shape[1], iterations=iterations, objective=best
    )
    return SvmSolution(
        weights=best_v[:-1].copy(),
        bias=float(best_v[-1]),
        objective=best,
        iterations=iterations,
        history=history,
    )
