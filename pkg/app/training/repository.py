"""Versioned little-endian model files with text summaries"""

import struct
from pathlib import Path

import numpy as np

from app.core.exceptions import TrainingError
from app.core.service.atomic import atomic_write_bytes, atomic_write_text
from app.training.schema import BBoxRegressor, ClassifierModel
from app.utils.formatting import fmt_float

SVM_MAGIC = b"RDETSVM\x00"
BBOX_MAGIC = b"RDETBBR\x00"
FORMAT_VERSION = 1

# magic, version, dim, n_classes
_SVM_HEADER = struct.Struct("<8sIII")
# magic, version, dim, n_classes, ridge_lambda, assign_iou
_BBOX_HEADER = struct.Struct("<8sIIIdd")


def encode_classifier(model: ClassifierModel) -> bytes:
    header = _SVM_HEADER.pack(SVM_MAGIC, FORMAT_VERSION, model.dim, model.n_classes)
    return b"".join(
        [
            header,
            np.asarray(model.class_ids, dtype="<i8").tobytes(),
            np.ascontiguousarray(model.weights, dtype="<f8").tobytes(),
            np.ascontiguousarray(model.biases, dtype="<f8").tobytes(),
        ]
    )


def _take(data: bytes, offset: int, count: int, dtype: str, path: Path) -> tuple[np.ndarray, int]:
    size = count * np.dtype(dtype).itemsize
    if offset + size > len(data):
        raise TrainingError(f"Model file {path} is truncated")
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset).copy(), offset + size


def _check_header(data: bytes, header: struct.Struct, magic: bytes, path: Path) -> tuple:
    if len(data) < header.size:
        raise TrainingError(f"Model file {path} is truncated")
    fields = header.unpack_from(data)
    if fields[0] != magic:
        raise TrainingError(f"Model file {path} has the wrong magic bytes")
    if fields[1] != FORMAT_VERSION:
        raise TrainingError(f"Model file {path} has unsupported version {fields[1]}")
    return fields


def decode_classifier(data: bytes, path: Path = Path("<bytes>")) -> ClassifierModel:
    _, _, dim, n_classes = _check_header(data, _SVM_HEADER, SVM_MAGIC, path)
    offset = _SVM_HEADER.size
    class_ids, offset = _take(data, offset, n_classes, "<i8", path)
    weights, offset = _take(data, offset, dim * n_classes, "<f8", path)
    biases, offset = _take(data, offset, n_classes, "<f8", path)
    if offset != len(data):
        raise TrainingError(f"Model file {path} has trailing bytes")
    return ClassifierModel(
        weights=weights.reshape(dim, n_classes).astype(np.float64),
        biases=biases.astype(np.float64),
        class_ids=tuple(int(c) for c in class_ids),
    )


def encode_regressor(regressor: BBoxRegressor) -> bytes:
    n_classes = len(regressor.class_ids)
    header = _BBOX_HEADER.pack(
        BBOX_MAGIC,
        FORMAT_VERSION,
        regressor.dim,
        n_classes,
        regressor.ridge_lambda,
        regressor.assign_iou,
    )
    counts = regressor.pair_counts or (0,) * n_classes
    return b"".join(
        [
            header,
            np.asarray(regressor.class_ids, dtype="<i8").tobytes(),
            np.asarray(regressor.trained, dtype="<i8").tobytes(),
            np.asarray(counts, dtype="<i8").tobytes(),
            np.ascontiguousarray(regressor.weights, dtype="<f8").tobytes(),
        ]
    )


def decode_regressor(data: bytes, path: Path = Path("<bytes>")) -> BBoxRegressor:
    _, _, dim, n_classes, ridge_lambda, assign_iou = _check_header(
        data, _BBOX_HEADER, BBOX_MAGIC, path
    )
    offset = _BBOX_HEADER.size
    class_ids, offset = _take(data, offset, n_classes, "<i8", path)
    trained, offset = _take(data, offset, n_classes, "<i8", path)
    counts, offset = _take(data, offset, n_classes, "<i8", path)
    weights, offset = _take(data, offset, n_classes * (dim + 1) * 4, "<f8", path)
    if offset != len(data):
        raise TrainingError(f"Model file {path} has trailing bytes")
    return BBoxRegressor(
        weights=weights.reshape(n_classes, dim + 1, 4).astype(np.float64),
        class_ids=tuple(int(c) for c in class_ids),
        ridge_lambda=float(ridge_lambda),
        assign_iou=float(assign_iou),
        trained=tuple(bool(t) for t in trained),
        pair_counts=tuple(int(c) for c in counts),
    )


def summarize_classifier(model: ClassifierModel, class_names: list[str] | None = None) -> str:
    lines = [f"format RDETSVM v{FORMAT_VERSION}", f"dim {model.dim}", f"classes {model.n_classes}"]
    for column, class_id in enumerate(model.class_ids):
        name = class_names[class_id] if class_names and class_id < len(class_names) else "-"
        norm = float(np.linalg.norm(model.weights[:, column]))
        lines.append(
            f"class {class_id} {name} weight_norm {fmt_float(norm)} "
            f"bias {fmt_float(float(model.biases[column]))}"
        )
    return "\n".join(lines) + "\n"


def summarize_regressor(regressor: BBoxRegressor, class_names: list[str] | None = None) -> str:
    lines = [
        f"format RDETBBR v{FORMAT_VERSION}",
        f"dim {regressor.dim}",
        f"ridge_lambda {fmt_float(regressor.ridge_lambda)}",
        f"assign_iou {fmt_float(regressor.assign_iou)}",
    ]
    counts = regressor.pair_counts or (0,) * len(regressor.class_ids)
    for index, class_id in enumerate(regressor.class_ids):
        name = class_names[class_id] if class_names and class_id < len(class_names) else "-"
        status = "trained" if regressor.trained[index] else "untrained"
        lines.append(f"class {class_id} {name} {status} pairs {counts[index]}")
    return "\n".join(lines) + "\n"


def save_classifier(
    path: str | Path, model: ClassifierModel, class_names: list[str] | None = None
) -> Path:
    path = Path(path)
    atomic_write_bytes(path, encode_classifier(model))
    atomic_write_text(path.with_suffix(".summary.txt"), summarize_classifier(model, class_names))
    return path


def load_classifier(path: str | Path) -> ClassifierModel:
    path = Path(path)
    return decode_classifier(path.read_bytes(), path)


def save_regressor(
    path: str | Path, regressor: BBoxRegressor, class_names: list[str] | None = None
) -> Path:
    path = Path(path)
    atomic_write_bytes(path, encode_regressor(regressor))
    atomic_write_text(path.with_suffix(".summary.txt"), summarize_regressor(regressor, class_names))
    return path


def load_regressor(path: str | Path) -> BBoxRegressor:
    path = Path(path)
    return decode_regressor(path.read_bytes(), path)
