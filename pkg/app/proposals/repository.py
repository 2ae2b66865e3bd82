"""Line-delimited proposal files: ``image_id x_min y_min x_max y_max source_tag``"""

from collections import defaultdict
from collections.abc import Iterable
from pathlib import Path

from app.core.exceptions import DatasetError
from app.core.service.atomic import atomic_write_text
from app.geometry import BoxCorners
from app.proposals.schema import ProposalSet
from app.utils.formatting import fmt_box

HEADER = "# image_id x_min y_min x_max y_max source_tag"


def format_proposals(proposal_sets: Iterable[ProposalSet]) -> str:
    lines = [HEADER]
    for proposal_set in proposal_sets:
        tag = proposal_set.source_tag or "-"
        for box in proposal_set.boxes:
            lines.append(f"{proposal_set.image_id} {fmt_box(box.as_tuple())} {tag}")
    return "\n".join(lines) + "\n"


def write_proposals(path: str | Path, proposal_sets: Iterable[ProposalSet]) -> Path:
    path = Path(path)
    atomic_write_text(path, format_proposals(proposal_sets))
    return path


def read_proposals(path: str | Path, image_ids: Iterable[int] = ()) -> dict[int, ProposalSet]:
    """
    Parse a proposals file into per-image sets.

    Images listed in ``image_ids`` but absent from the file get an empty set.
    """
    boxes: dict[int, list[BoxCorners]] = defaultdict(list)
    tags: dict[int, str] = {}
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 6:
            raise DatasetError(f"{path}:{number}: expected 6 fields, got {len(fields)}")
        try:
            image_id = int(fields[0])
            box = BoxCorners(*(float(v) for v in fields[1:5]))
        except ValueError as exc:
            raise DatasetError(f"{path}:{number}: {exc}") from exc
        boxes[image_id].append(box)
        tags[image_id] = fields[5]
    result = {
        image_id: ProposalSet(image_id=image_id, boxes=items, source_tag=tags[image_id])
        for image_id, items in boxes.items()
    }
    for image_id in image_ids:
        result.setdefault(image_id, ProposalSet(image_id=image_id, source_tag=""))
    return result
