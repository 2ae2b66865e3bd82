"""Top-activation ranking for a single feature-map unit"""

from collections import defaultdict
from collections.abc import Sequence

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw

from app.core.exceptions import ExtractionError
from app.detection.service import nms
from app.features.extractors.conv_stack import ConvStack
from app.features.schema import ActivationHit, RegionPatch, UnitRef
from app.geometry import BoxCorners
from app.geometry.schema import boxes_to_array
from app.imaging import subtract_mean
from app.utils.logger import get_logger

logger = get_logger(__name__)

LABEL_COLOR = (255, 255, 0)


def top_activations(
    stack: ConvStack,
    unit: UnitRef,
    regions: Sequence[RegionPatch],
    k: int,
    nms_thresh: float,
    mean: np.ndarray | None = None,
) -> list[ActivationHit]:
    """
    Rank regions by the activation of ``unit``.

    Regions are sorted by activation, suppressed per image with greedy NMS
    at ``nms_thresh`` and truncated to ``k``. ``normalized`` divides by the
    largest value the unit's channel reaches anywhere in the map over all
    regions (left unscaled when that maximum is not positive).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0 or not regions:
        return []

    channel = unit.channel
    activations = np.zeros(len(regions))
    channel_max = -np.inf
    for index, region in enumerate(regions):
        pixels = region.patch.pixels if mean is None else subtract_mean(region.patch, mean)
        feature_map = stack.forward(pixels)
        h, w, c = feature_map.shape
        if not (0 <= unit.y < h and 0 <= unit.x < w and 0 <= channel < c):
            raise ExtractionError(f"Unit {unit} outside the {h}x{w}x{c} feature map")
        activations[index] = feature_map[unit.y, unit.x, channel]
        channel_max = max(channel_max, float(feature_map[:, :, channel].max()))

    by_image: dict[int, list[int]] = defaultdict(list)
    for index, region in enumerate(regions):
        by_image[region.image_id].append(index)

    survivors: list[int] = []
    for indices in by_image.values():
        boxes = boxes_to_array(regions[i].box for i in indices)
        kept = nms(boxes, activations[indices], nms_thresh)
        survivors.extend(indices[i] for i in kept)

    survivors.sort(key=lambda i: (-activations[i], i))
    scale = channel_max if channel_max > 0 else 1.0
    hits = [
        ActivationHit(
            image_id=regions[i].image_id,
            box=regions[i].box,
            activation=float(activations[i]),
            normalized=float(activations[i] / scale),
            region_index=i,
        )
        for i in survivors[:k]
    ]
    logger.debug(
        "top_activations_ranked",
        unit=unit.slug(),
        regions=len(regions),
        survivors=len(survivors),
        returned=len(hits),
    )
    return hits


def render_montage(
    hits: Sequence[ActivationHit],
    regions: Sequence[RegionPatch],
    field: BoxCorners,
    columns: int = 8,
    scale: int = 4,
    gap: int = 2,
    label: bool = True,
) -> PILImage.Image:
    """
    Grid of the ranked patches, each enlarged ``scale`` times with the unit's
    receptive field (patch coordinates) outlined in white. With ``label`` the
    normalized activation is written in yellow inside the field's upper-left
    corner.
    """
    if not hits:
        return PILImage.new("RGB", (1, 1))
    side = regions[hits[0].region_index].patch.width * scale
    columns = max(1, min(columns, len(hits)))
    rows = -(-len(hits) // columns)
    canvas = PILImage.new(
        "RGB", (columns * side + (columns - 1) * gap, rows * side + (rows - 1) * gap)
    )
    for rank, hit in enumerate(hits):
        pixels = regions[hit.region_index].patch.pixels
        levels = np.rint(pixels * 255.0).astype(np.uint8)
        if levels.shape[2] == 1:
            levels = np.repeat(levels, 3, axis=2)
        tile = PILImage.fromarray(levels).resize((side, side), PILImage.Resampling.NEAREST)
        draw = ImageDraw.Draw(tile)
        draw.rectangle(
            [
                int(field.x_min * scale),
                int(field.y_min * scale),
                max(int(field.x_max * scale) - 1, 0),
                max(int(field.y_max * scale) - 1, 0),
            ],
            outline=(255, 255, 255),
        )
        if label:
            corner = (int(field.x_min * scale) + 2, int(field.y_min * scale) + 1)
            draw.text(corner, f"{hit.normalized:.2f}", fill=LABEL_COLOR)
        row, col = divmod(rank, columns)
        canvas.paste(tile, (col * (side + gap), row * (side + gap)))
    return canvas
