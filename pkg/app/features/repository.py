"""Montage files: a PPM grid plus a ranked text sidecar"""

import io
from collections.abc import Sequence
from pathlib import Path

from PIL import Image as PILImage

from app.core.service.atomic import atomic_write_bytes, atomic_write_text
from app.features.schema import ActivationHit, UnitRef
from app.utils.formatting import fmt_box, fmt_float

MONTAGE_HEADER = "# rank image_id x_min y_min x_max y_max activation normalized"


def format_hits(unit: UnitRef, hits: Sequence[ActivationHit]) -> str:
    lines = [f"# unit y={unit.y} x={unit.x} channel={unit.channel}", MONTAGE_HEADER]
    for rank, hit in enumerate(hits, start=1):
        lines.append(
            f"{rank} {hit.image_id} {fmt_box(hit.box.as_tuple())} "
            f"{fmt_float(hit.activation)} {fmt_float(hit.normalized)}"
        )
    return "\n".join(lines) + "\n"


def save_montage(
    directory: str | Path,
    unit: UnitRef,
    montage: PILImage.Image,
    hits: Sequence[ActivationHit],
) -> tuple[Path, Path]:
    """Write ``unit_<y>_<x>_<c>.ppm`` and its ``.txt`` sidecar."""
    directory = Path(directory)
    image_path = directory / f"unit_{unit.slug()}.ppm"
    text_path = directory / f"unit_{unit.slug()}.txt"
    buffer = io.BytesIO()
    montage.convert("RGB").save(buffer, format="PPM")
    atomic_write_bytes(image_path, buffer.getvalue())
    atomic_write_text(text_path, format_hits(unit, hits))
    return image_path, text_path
