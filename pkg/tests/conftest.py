import tomllib
from pathlib import Path

import numpy as np
import pytest

from app.features.extractors.hog import HogExtractor
from app.features.schema import HogConfig
from app.geometry import BoxCorners
from app.imaging import Image, WarpConfig

SQUARE_BOX = BoxCorners(12, 12, 36, 36)


@pytest.fixture
def square_image() -> Image:
    """48x48 RGB, white square on black at ``SQUARE_BOX``."""
    pixels = np.zeros((48, 48, 3))
    pixels[12:36, 12:36, :] = 1.0
    return Image(pixels)


@pytest.fixture
def warp_cfg() -> WarpConfig:
    return WarpConfig(out_size=32, padding=4, mode="warp")


@pytest.fixture
def hog_extractor() -> HogExtractor:
    return HogExtractor(input_size=32, channels=3, cfg=HogConfig())


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


TINY_TOML = """\
# small enough for unit tests: two classes, a dozen images
[dataset]
image_size = 48
classes = ["disc", "square"]
similarity_groups = []
objects_per_image = [1, 2]
object_size = [12, 20]
train_images = 8
test_images = 4

[proposer.grid]
scales = [16.0, 24.0]

[warp]
out_size = 32
padding = 4

[extractor]
kind = "hog"

[proposer.jitter]
count = 4

[svm]
max_iters = 300
max_rounds = 3
initial_negatives_per_image = 5

[visualize]
units = ["1,1,0"]
k = 4
"""


@pytest.fixture
def tiny_toml(tmp_path) -> Path:
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML, encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def tiny_raw() -> dict:
    return tomllib.loads(TINY_TOML)
