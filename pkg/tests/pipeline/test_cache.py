import numpy as np
import pytest

from app.core.exceptions import MissingArtifactError, StaleArtifactError
from app.pipeline import FeatureBlock, FeatureCache


@pytest.fixture
def cache(tmp_path) -> FeatureCache:
    return FeatureCache(tmp_path / "features" / "abc", "abc" * 10)


def test_blocks_load_bit_identical(cache, rng):
    features = rng.normal(size=(7, 5)) * 1e-300
    features[0, 0] = np.nextafter(1.0, 2.0)
    cache.store(FeatureBlock(3, features, n_proposals=5))
    cache.finalize({3: 5}, dim=5, layer_tag="hog", mean=np.array([0.1, 0.2, 0.3]))

    block = cache.load(3)
    assert block.features.tobytes() == features.tobytes()
    assert block.proposal_features.shape == (5, 5)
    assert block.gt_features.shape == (2, 5)
    np.testing.assert_array_equal(cache.mean(), [0.1, 0.2, 0.3])


def test_complete_only_after_manifest(cache):
    cache.store(FeatureBlock(0, np.zeros((1, 2)), 1))
    assert not cache.is_complete([0])
    cache.finalize({0: 1}, dim=2, layer_tag="hog", mean=np.zeros(3))
    assert cache.is_complete([0])
    assert not cache.is_complete([0, 1])


def test_missing_block_file_is_incomplete(cache):
    cache.store(FeatureBlock(0, np.zeros((1, 2)), 1))
    cache.finalize({0: 1, 1: 1}, dim=2, layer_tag="hog", mean=np.zeros(3))
    assert not cache.is_complete([0, 1])
    with pytest.raises(MissingArtifactError) as exc_info:
        cache.load(1)
    assert exc_info.value.stage == "extract"


def test_missing_manifest_names_extract(cache):
    with pytest.raises(MissingArtifactError) as exc_info:
        cache.require()
    assert exc_info.value.stage == "extract"


def test_foreign_manifest_is_stale(tmp_path):
    directory = tmp_path / "features" / "shared"
    FeatureCache(directory, "old").finalize({}, dim=1, layer_tag="hog", mean=np.zeros(1))
    with pytest.raises(StaleArtifactError):
        FeatureCache(directory, "new").require()
    assert not FeatureCache(directory, "new").is_complete([])
