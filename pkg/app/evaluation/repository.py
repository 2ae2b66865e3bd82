"""Plain-text and JSON evaluation reports, plus the PR-curve dump"""

import json
from pathlib import Path
from typing import Any

from app.core.service.atomic import atomic_write_text
from app.evaluation.schema import FP_TYPES, EvaluationReport, FpBreakdown
from app.utils.formatting import fmt_float

PR_HEADER = "# class rank recall precision"


def _ap_text(value: float | None) -> str:
    return "n/a" if value is None else f"{100.0 * value:6.2f}"


def format_report(
    reports: dict[str, EvaluationReport],
    breakdown: FpBreakdown | None = None,
    class_names: list[str] | None = None,
) -> str:
    """
    AP table with one row per detection set (``raw``, ``refined``...) and one
    column per class, then the FP breakdown when given.
    """
    if not reports:
        return ""
    first = next(iter(reports.values()))
    names = [r.name for r in first.per_class]
    lines = [
        f"# iou_thresh={fmt_float(first.iou_thresh)} mode={first.mode}",
        "set".ljust(10) + "".join(n[:10].rjust(11) for n in names) + "mAP".rjust(11),
    ]
    for label, report in reports.items():
        row = label.ljust(10)
        row += "".join(_ap_text(r.ap).rjust(11) for r in report.per_class)
        row += _ap_text(report.mean_ap).rjust(11)
        lines.append(row)

    if breakdown is not None:
        lines.append("")
        lines.extend(format_breakdown(breakdown, class_names).splitlines())
    return "\n".join(lines) + "\n"


def format_breakdown(breakdown: FpBreakdown, class_names: list[str] | None = None) -> str:
    """FP type counts per class plus a total row."""
    lines = [
        f"# false positives (top {breakdown.top_n} per class)",
        "class".ljust(12) + "".join(t.rjust(7) for t in FP_TYPES),
    ]
    for class_id, counts in sorted(breakdown.per_class.items()):
        name = class_names[class_id] if class_names else str(class_id)
        lines.append(name[:12].ljust(12) + "".join(str(counts[t]).rjust(7) for t in FP_TYPES))
    totals = breakdown.totals
    lines.append("total".ljust(12) + "".join(str(totals[t]).rjust(7) for t in FP_TYPES))
    return "\n".join(lines) + "\n"


def report_record(
    reports: dict[str, EvaluationReport], breakdown: FpBreakdown | None = None
) -> dict[str, Any]:
    record: dict[str, Any] = {}
    for label, report in reports.items():
        record[label] = {
            "iou_thresh": report.iou_thresh,
            "mode": report.mode,
            "mean_ap": report.mean_ap,
            "classes": [
                {
                    "class_id": r.class_id,
                    "name": r.name,
                    "ap": r.ap,
                    "num_gt": r.num_gt,
                    "num_detections": r.num_detections,
                    "true_positives": r.true_positives,
                }
                for r in report.per_class
            ],
        }
    if breakdown is not None:
        record["false_positives"] = breakdown_record(breakdown)
    return record


def breakdown_record(breakdown: FpBreakdown) -> dict[str, Any]:
    return {
        "top_n": breakdown.top_n,
        "per_class": {str(k): v for k, v in sorted(breakdown.per_class.items())},
        "totals": breakdown.totals,
    }


def format_pr_curves(report: EvaluationReport) -> str:
    lines = [PR_HEADER]
    for class_id, curve in sorted(report.curves.items()):
        for rank, (recall, precision) in enumerate(zip(curve.recall, curve.precision)):
            r, p = fmt_float(float(recall)), fmt_float(float(precision))
            lines.append(f"{class_id} {rank} {r} {p}")
    return "\n".join(lines) + "\n"


def write_report(
    directory: str | Path,
    reports: dict[str, EvaluationReport],
    breakdown: FpBreakdown | None = None,
    class_names: list[str] | None = None,
    stem: str = "report",
) -> dict[str, Path]:
    """Write ``<stem>.txt``, ``<stem>.json`` and ``pr_curves.txt`` (first report's curves)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "text": directory / f"{stem}.txt",
        "record": directory / f"{stem}.json",
    }
    atomic_write_text(paths["text"], format_report(reports, breakdown, class_names))
    record = report_record(reports, breakdown)
    atomic_write_text(paths["record"], json.dumps(record, indent=2, sort_keys=True) + "\n")
    if reports:
        paths["pr_curves"] = directory / "pr_curves.txt"
        atomic_write_text(paths["pr_curves"], format_pr_curves(next(iter(reports.values()))))
    return paths
