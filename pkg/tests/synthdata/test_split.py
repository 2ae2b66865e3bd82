import itertools
import math

import numpy as np
import pytest

from app.core.exceptions import DatasetError
from app.synthdata import SplitConfig, balanced_split, relative_imbalance


def oracle(counts: np.ndarray) -> float:
    n = counts.shape[0]
    best = math.inf
    for chosen in itertools.combinations(range(n), math.ceil(n / 2)):
        in_a = np.zeros(n, dtype=bool)
        in_a[list(chosen)] = True
        a, b = counts[in_a].sum(axis=0), counts[~in_a].sum(axis=0)
        best = min(best, max(relative_imbalance(x, y) for x, y in zip(a, b)))
    return best


def test_relative_imbalance():
    assert relative_imbalance(3, 1) == 0.5
    assert relative_imbalance(2, 2) == 0.0
    assert relative_imbalance(0, 0) == 0.0


def test_matches_exhaustive_optimum():
    rng = np.random.default_rng(17)
    for trial in range(30):
        n = int(rng.integers(6, 11))
        counts = rng.integers(0, 4, size=(n, 3))
        by_image = {i: list(row) for i, row in enumerate(counts)}
        result = balanced_split(by_image, SplitConfig(), trial)
        assert result.max_relative_imbalance == pytest.approx(oracle(counts), abs=1e-12)
        assert len(result.side_a) - len(result.side_b) in (0, 1)
        assert sorted(result.side_a + result.side_b) == list(range(n))


def test_local_search_path():
    rng = np.random.default_rng(5)
    counts = rng.integers(0, 5, size=(40, 4))
    cfg = SplitConfig(exhaustive_limit=0, n_candidates=4, local_search_steps=20)
    first = balanced_split({i: list(r) for i, r in enumerate(counts)}, cfg, seed=3)
    again = balanced_split({i: list(r) for i, r in enumerate(counts)}, cfg, seed=3)
    assert first == again
    assert (len(first.side_a), len(first.side_b)) == (20, 20)
    totals = counts.sum(axis=0)
    for (a, b), total in zip(first.per_class, totals):
        assert a + b == total
    assert first.max_relative_imbalance < 0.2


def test_odd_count_puts_extra_image_on_side_a():
    result = balanced_split({1: [1], 2: [1], 3: [0]}, SplitConfig(), seed=0)
    assert len(result.side_a) == 2
    assert result.max_relative_imbalance == 0.0


def test_needs_two_images():
    with pytest.raises(DatasetError):
        balanced_split({0: [1, 2]}, SplitConfig(), seed=0)
