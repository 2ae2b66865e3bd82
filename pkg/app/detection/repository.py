"""Line-delimited detection files: ``image_id class_id score x_min y_min x_max y_max``"""

from collections.abc import Iterable
from pathlib import Path

from app.core.exceptions import EvaluationError
from app.core.service.atomic import atomic_write_text
from app.detection.schema import Detection
from app.geometry import BoxCorners
from app.utils.formatting import fmt_box, fmt_float

HEADER = "# image_id class_id score x_min y_min x_max y_max"


def format_detections(detections: Iterable[Detection]) -> str:
    lines = [HEADER]
    for det in detections:
        lines.append(
            f"{det.image_id} {det.class_id} {fmt_float(det.score)} {fmt_box(det.box.as_tuple())}"
        )
    return "\n".join(lines) + "\n"


def write_detections(path: str | Path, detections: Iterable[Detection]) -> Path:
    path = Path(path)
    atomic_write_text(path, format_detections(detections))
    return path


def parse_detections(text: str, source: str = "<detections>") -> list[Detection]:
    detections: list[Detection] = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 7:
            raise EvaluationError(f"{source}:{number}: expected 7 fields, got {len(fields)}")
        try:
            detections.append(
                Detection(
                    image_id=int(fields[0]),
                    class_id=int(fields[1]),
                    score=float(fields[2]),
                    box=BoxCorners(*(float(v) for v in fields[3:7])),
                )
            )
        except ValueError as exc:
            raise EvaluationError(f"{source}:{number}: {exc}") from exc
    return detections


def read_detections(path: str | Path) -> list[Detection]:
    path = Path(path)
    return parse_detections(path.read_text(encoding="utf-8"), str(path))
