import numpy as np
import pytest

from app.core.exceptions import DatasetError
from app.geometry import BoxCorners, pairwise_iou
from app.geometry.schema import boxes_to_array
from app.synthdata import DatasetConfig, generate_scene, shape_mask, tight_box

CFG = DatasetConfig(train_images=4, test_images=2)


@pytest.mark.parametrize("kind", ["disc", "square", "ring"])
def test_symmetric_shapes_fill_their_box(kind):
    mask = shape_mask(kind, cx=20, cy=15, half=6, height=40, width=40)
    assert tight_box(mask) == BoxCorners(14, 9, 26, 21)


def test_triangle_points_up():
    mask = shape_mask("triangle", cx=20, cy=20, half=8, height=40, width=40)
    rows = np.flatnonzero(mask.any(axis=1))
    assert mask[rows[0]].sum() < mask[rows[-1]].sum()
    assert tight_box(mask).y_max == 28


def test_ring_has_a_hole():
    mask = shape_mask("ring", cx=20, cy=20, half=8, height=40, width=40)
    assert not mask[20, 20]
    assert mask[20, 13]


def test_empty_mask_rejected():
    with pytest.raises(DatasetError):
        tight_box(np.zeros((5, 5), dtype=bool))


def test_scene_is_deterministic():
    image_a, annotation_a = generate_scene(CFG, 3, seed=11)
    image_b, annotation_b = generate_scene(CFG, 3, seed=11)
    np.testing.assert_array_equal(image_a.pixels, image_b.pixels)
    assert annotation_a == annotation_b
    other, _ = generate_scene(CFG, 4, seed=11)
    assert not np.array_equal(image_a.pixels, other.pixels)


def test_scene_objects_are_valid():
    for image_id in range(20):
        image, annotation = generate_scene(CFG, image_id, seed=2)
        assert image.pixels.shape == (96, 96, 3)
        assert np.array_equal(np.rint(image.pixels * 255) / 255, image.pixels)
        low, high = CFG.objects_per_image
        assert low <= len(annotation.objects) <= high
        for obj in annotation.objects:
            assert 0 <= obj.class_id < len(CFG.classes)
            assert 0 <= obj.box.x_min < obj.box.x_max <= 96
            assert 0 <= obj.box.y_min < obj.box.y_max <= 96
            assert obj.box.width <= CFG.object_size[1]
        boxes = boxes_to_array(annotation.boxes())
        overlaps = pairwise_iou(boxes, boxes) - np.eye(len(boxes))
        assert overlaps.max(initial=0.0) == 0.0


def test_grayscale_scene():
    image, _ = generate_scene(DatasetConfig(channels=1), 0, seed=0)
    assert image.channels == 1


def test_unplaceable_objects():
    cfg = DatasetConfig(image_size=32, objects_per_image=(5, 5), object_size=(28, 30))
    with pytest.raises(DatasetError, match="Could not place"):
        generate_scene(cfg, 0, seed=0)


def test_config_validation():
    with pytest.raises(ValueError):
        DatasetConfig(classes=["disc", "disc"])
    with pytest.raises(ValueError):
        DatasetConfig(classes=["disc"], similarity_groups=[["square", "disc"]])
    assert CFG.split_of(3) == "train" and CFG.split_of(4) == "test"
    assert CFG.similarity_group_ids() == [[1, 2]]
