from .fp_analysis import classify_fp, fp_analysis, group_map
from .repository import (
    breakdown_record,
    format_breakdown,
    format_pr_curves,
    format_report,
    report_record,
    write_report,
)
from .schema import (
    ClassResult,
    EvaluationConfig,
    EvaluationReport,
    FpBreakdown,
    MatchResult,
    PrCurve,
)
from .service import evaluate, match_detections, pr_curve, rank_order, voc_ap

__all__ = [
    "ClassResult",
    "EvaluationConfig",
    "EvaluationReport",
    "FpBreakdown",
    "MatchResult",
    "PrCurve",
    "breakdown_record",
    "classify_fp",
    "evaluate",
    "format_breakdown",
    "format_pr_curves",
    "format_report",
    "fp_analysis",
    "group_map",
    "match_detections",
    "pr_curve",
    "rank_order",
    "report_record",
    "voc_ap",
    "write_report",
]
