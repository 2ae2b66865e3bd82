from .repository import format_detections, parse_detections, read_detections, write_detections
from .schema import Detection, DetectionConfig
from .service import detect_image, detections_from_scores, nms, refine, score_all

__all__ = [
    "Detection",
    "DetectionConfig",
    "detect_image",
    "detections_from_scores",
    "format_detections",
    "nms",
    "parse_detections",
    "read_detections",
    "refine",
    "score_all",
    "write_detections",
]
