"""Prometheus metrics definitions"""

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile

# Stage Metrics
STAGE_RUNS_TOTAL = Counter(
    "rdet_stage_runs_total",
    "Total pipeline stage runs",
    ["stage", "status"],
)

STAGE_DURATION = Histogram(
    "rdet_stage_duration_seconds",
    "Pipeline stage duration in seconds",
    ["stage"],
    buckets=[0.1, 0.5, 1, 5, 15, 60, 300, 900],
)

# Proposal Metrics
PROPOSALS_GENERATED_TOTAL = Counter(
    "rdet_proposals_generated_total",
    "Total region proposals generated",
    ["source"],
)

# Feature Metrics
FEATURES_EXTRACTED_TOTAL = Counter(
    "rdet_features_extracted_total",
    "Total feature vectors computed",
    ["extractor"],
)

FEATURE_CACHE_LOOKUPS_TOTAL = Counter(
    "rdet_feature_cache_lookups_total",
    "Feature cache lookups",
    ["result"],  # hit, miss
)

# Training Metrics
SVM_SOLVER_ITERATIONS = Histogram(
    "rdet_svm_solver_iterations",
    "Subgradient iterations per SVM solve",
    buckets=[50, 100, 250, 500, 1000, 2500, 5000, 10000],
)

HARD_NEGATIVES_MINED_TOTAL = Counter(
    "rdet_hard_negatives_mined_total",
    "Hard negatives added to SVM caches",
    ["class_id"],
)

# Detection Metrics
DETECTIONS_EMITTED_TOTAL = Counter(
    "rdet_detections_emitted_total",
    "Detections surviving NMS and the score floor",
    ["class_id"],
)


def export_metrics(path: str | Path) -> None:
    """Write the default registry in Prometheus text format."""
    write_to_textfile(str(path), REGISTRY)
