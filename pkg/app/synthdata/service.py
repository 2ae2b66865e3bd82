"""Deterministic scene rendering"""

import numpy as np

from app.core.exceptions import DatasetError
from app.geometry import BoxCorners
from app.imaging import Image, quantize
from app.synthdata.schema import AnnotatedObject, Annotation, DatasetConfig, ShapeKind
from app.utils.rng import make_rng

PLACEMENT_ATTEMPTS = 100


def shape_mask(kind: ShapeKind, cx: int, cy: int, half: int, height: int, width: int) -> np.ndarray:
    """Boolean mask of the shape, tested at pixel centres (col + 0.5, row + 0.5)."""
    px = np.arange(width)[None, :] + 0.5 - cx
    py = np.arange(height)[:, None] + 0.5 - cy
    if kind == "disc":
        return px**2 + py**2 <= half**2
    if kind == "ring":
        r2 = px**2 + py**2
        return (r2 <= half**2) & (r2 >= (0.5 * half) ** 2)
    if kind == "square":
        return (np.abs(px) < half) & (np.abs(py) < half)
    if kind == "triangle":
        # apex at the top centre, base along the bottom edge
        depth = py + half
        return (depth >= 0) & (py < half) & (np.abs(px) <= depth / 2)
    raise DatasetError(f"Unknown shape {kind!r}")


def tight_box(mask: np.ndarray) -> BoxCorners:
    """Smallest box covering every set pixel (pixel k spans [k, k + 1))."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if not rows.size:
        raise DatasetError("Shape rendered no pixels")
    return BoxCorners(float(cols[0]), float(rows[0]), float(cols[-1] + 1), float(rows[-1] + 1))


def _draw_clutter(pixels: np.ndarray, cfg: DatasetConfig, rng: np.random.Generator) -> None:
    size = cfg.image_size
    n_bars = rng.poisson(cfg.clutter_density * size * size / 1024.0)
    for _ in range(n_bars):
        length = int(rng.integers(6, max(7, size // 3)))
        thickness = int(rng.integers(1, 3))
        x = int(rng.integers(0, size))
        y = int(rng.integers(0, size))
        colour = rng.uniform(0.15, 0.7, size=pixels.shape[2])
        if rng.random() < 0.5:
            pixels[y : y + thickness, x : x + length] = colour
        else:
            pixels[y : y + length, x : x + thickness] = colour


def _disjoint(box: BoxCorners, placed: list[BoxCorners], gap: float = 1.0) -> bool:
    for other in placed:
        if (
            box.x_min < other.x_max + gap
            and other.x_min < box.x_max + gap
            and box.y_min < other.y_max + gap
            and other.y_min < box.y_max + gap
        ):
            return False
    return True


def generate_scene(cfg: DatasetConfig, image_id: int, seed: int) -> tuple[Image, Annotation]:
    """
    Render image ``image_id``: background, clutter bars, shapes, noise.

    Everything is drawn from the stream ``(seed, image_id)`` so any image can
    be regenerated alone. Objects never overlap; each GT box is the tight box
    of its rendered mask.

    Raises:
        DatasetError: objects cannot be placed within the attempt budget
    """
    rng = make_rng(seed, "scene", image_id)
    size = cfg.image_size
    channels = cfg.channels

    pixels = np.empty((size, size, channels))
    pixels[:] = rng.uniform(0.1, 0.35, size=channels)
    _draw_clutter(pixels, cfg, rng)

    low, high = cfg.objects_per_image
    n_objects = int(rng.integers(low, high + 1))
    placed: list[BoxCorners] = []
    objects: list[AnnotatedObject] = []
    for _ in range(n_objects):
        class_id = int(rng.integers(0, len(cfg.classes)))
        kind = cfg.classes[class_id]
        for _attempt in range(PLACEMENT_ATTEMPTS):
            half = int(rng.integers(cfg.object_size[0], cfg.object_size[1] + 1)) // 2
            cx = int(rng.integers(half, size - half + 1))
            cy = int(rng.integers(half, size - half + 1))
            outer = BoxCorners(cx - half, cy - half, cx + half, cy + half)
            if _disjoint(outer, placed):
                break
        else:
            raise DatasetError(
                f"Could not place object {len(objects) + 1} of {n_objects} in image {image_id} "
                f"after {PLACEMENT_ATTEMPTS} attempts"
            )
        mask = shape_mask(kind, cx, cy, half, size, size)
        pixels[mask] = rng.uniform(0.65, 1.0, size=channels)
        placed.append(outer)
        objects.append(AnnotatedObject(class_id=class_id, box=tight_box(mask)))

    if cfg.noise_level > 0:
        pixels += rng.normal(0.0, cfg.noise_level, size=pixels.shape)
    return Image(quantize(pixels)), Annotation(image_id=image_id, objects=objects)
