"""Dataset directory: images, annotations.txt and manifest.json"""

from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path

from pydantic import ValidationError

from app.core.exceptions import DatasetError
from app.core.service.atomic import atomic_write_text
from app.geometry import BoxCorners
from app.imaging import Image, load_image, save_image
from app.synthdata.schema import AnnotatedObject, Annotation, DatasetManifest
from app.utils.formatting import fmt_box

ANNOTATIONS_FILE = "annotations.txt"
MANIFEST_FILE = "manifest.json"
IMAGES_DIR = "images"
HEADER = "# image_id class_id x_min y_min x_max y_max"


def image_filename(image_id: int, channels: int) -> str:
    return f"{IMAGES_DIR}/{image_id:06d}.{'pgm' if channels == 1 else 'ppm'}"


def write_image(root: str | Path, image_id: int, image: Image) -> str:
    relative = image_filename(image_id, image.channels)
    save_image(image, Path(root) / relative)
    return relative


def format_annotations(annotations: Iterable[Annotation]) -> str:
    lines = [HEADER]
    for annotation in annotations:
        for obj in annotation.objects:
            lines.append(f"{annotation.image_id} {obj.class_id} {fmt_box(obj.box.as_tuple())}")
    return "\n".join(lines) + "\n"


def write_annotations(root: str | Path, annotations: Iterable[Annotation]) -> Path:
    path = Path(root) / ANNOTATIONS_FILE
    atomic_write_text(path, format_annotations(annotations))
    return path


def read_annotations(path: str | Path, image_ids: Iterable[int] = ()) -> dict[int, Annotation]:
    """Per-image annotations; ids in ``image_ids`` without objects map to empty annotations."""
    path = Path(path)
    if path.is_dir():
        path = path / ANNOTATIONS_FILE
    objects: dict[int, list[AnnotatedObject]] = defaultdict(list)
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 6:
            raise DatasetError(f"{path}:{number}: expected 6 fields, got {len(fields)}")
        try:
            image_id, class_id = int(fields[0]), int(fields[1])
            box = BoxCorners(*(float(v) for v in fields[2:6]))
        except ValueError as exc:
            raise DatasetError(f"{path}:{number}: {exc}") from exc
        objects[image_id].append(AnnotatedObject(class_id=class_id, box=box))
    result = {i: Annotation(image_id=i, objects=items) for i, items in objects.items()}
    for image_id in image_ids:
        result.setdefault(image_id, Annotation(image_id=image_id))
    return result


def write_manifest(root: str | Path, manifest: DatasetManifest) -> Path:
    path = Path(root) / MANIFEST_FILE
    atomic_write_text(path, manifest.model_dump_json(indent=2) + "\n")
    return path


def read_manifest(root: str | Path) -> DatasetManifest:
    path = Path(root) / MANIFEST_FILE
    try:
        return DatasetManifest.model_validate_json(path.read_text(encoding="utf-8"))
    except ValidationError as exc:
        message = f"Malformed dataset manifest {path}: {exc.error_count()} errors"
        raise DatasetError(message) from exc


def load_dataset_image(root: str | Path, manifest: DatasetManifest, image_id: int) -> Image:
    for entry in manifest.images:
        if entry.image_id == image_id:
            return load_image(Path(root) / entry.file)
    raise DatasetError(f"Image {image_id} is not in the dataset manifest")
