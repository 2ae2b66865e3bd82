"""Command-line entry point: one subcommand per pipeline stage"""

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import IO, NoReturn, TextIO

from app.core.exception_handlers import handle_exception
from app.core.exceptions import EXIT_OK, UsageError
from app.core.metrics import export_metrics
from app.core.settings import settings
from app.pipeline import FULL_CHAIN, StageReport, load_config, run_stage
from app.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

STAGE_HELP = {
    "gen-data": "render the synthetic dataset",
    "propose": "write region proposals for every image",
    "extract": "warp proposals and fill the feature cache",
    "train-svm": "train per-class SVMs with hard-negative mining",
    "train-bbreg": "train per-class box regressors",
    "detect": "score, suppress and refine detections",
    "evaluate": "AP per class and mAP report",
    "analyze": "false-positive type breakdown",
    "visualize": "top-activation montages per feature-map unit",
    "ablate": "compare extractor variants",
    "split": "class-balanced two-way split",
    "tune-nms": "grid-search per-class NMS thresholds",
}

TEXT_SUFFIXES = (".txt", ".json")


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting and keeps stdout for data"""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")

    def _print_message(self, message: str, file: IO[str] | None = None) -> None:
        # help, usage and --version are informational: standard error only
        super()._print_message(message, sys.stderr)


def _common_options() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML pipeline config (defaults if omitted)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted override such as svm.C=0.5 (repeatable)",
    )
    common.add_argument("--output-dir", type=Path, help="run directory (overrides run_dir)")
    common.add_argument("--jobs", type=int, help="worker cap (default: RDET_JOBS or all cores)")
    common.add_argument(
        "--stdout", action="store_true", help="also write the stage's data output to stdout"
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    return common


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="rdet",
        description="Region-proposal object detection pipeline over a run directory",
    )
    parser.add_argument("--version", action="version", version=f"rdet {settings.APP_VERSION}")
    common = _common_options()
    subparsers = parser.add_subparsers(
        dest="command", metavar="COMMAND", parser_class=ArgumentParser
    )
    for name, text in STAGE_HELP.items():
        sub = subparsers.add_parser(name, parents=[common], help=text, description=text)
        if name == "visualize":
            sub.add_argument(
                "--unit",
                dest="units",
                action="append",
                default=[],
                metavar="Y,X,C",
                help="feature-map unit (repeatable; default from config)",
            )
            sub.add_argument("--k", type=int, help="top activations per unit")
        if name == "ablate":
            sub.add_argument(
                "--variant",
                dest="variants",
                action="append",
                default=[],
                help="hog, conv or conv:<layers> (repeatable; default from config)",
            )
    subparsers.add_parser(
        "all", parents=[common], help="run gen-data through analyze", description="full chain"
    )
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        setup_logging(level="DEBUG")
    elif args.quiet:
        setup_logging(level="WARNING")


def _write_stdout(report: StageReport, stream: TextIO) -> None:
    for path in report.outputs:
        if path.suffix in TEXT_SUFFIXES and path.is_file():
            stream.write(path.read_text(encoding="utf-8"))
            return
    stream.write(json.dumps(report.summary, indent=2, sort_keys=True, default=str) + "\n")


def _execute(args: argparse.Namespace) -> list[StageReport]:
    if args.jobs is not None and args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    jobs = args.jobs if args.jobs is not None else settings.JOBS
    cfg = load_config(args.config, args.overrides, run_dir=args.output_dir)
    if args.command == "all":
        stages = list(FULL_CHAIN)
    else:
        stages = [args.command]
    reports = []
    for stage in stages:
        report = run_stage(
            cfg,
            stage,
            jobs=jobs,
            units=getattr(args, "units", ()),
            k=getattr(args, "k", None),
            variants=getattr(args, "variants", ()),
        )
        logger.info(
            "stage_report",
            stage=report.stage,
            fingerprint=report.fingerprint[:12],
            cache_hit=report.cache_hit,
            summary=report.summary,
        )
        reports.append(report)
    return reports


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    """
    Parse ``argv`` and run the requested stage.

    Returns:
        0 on success, otherwise the exit code of the error that stopped the
        run (2 usage, 3 missing or stale artifact, 4 config, 1 anything else)
    """
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        return handle_exception(exc)
    if args.command is None:
        parser.print_help(sys.stderr)
        return handle_exception(UsageError("a subcommand is required"))

    _configure_logging(args)
    try:
        reports = _execute(args)
        if args.stdout:
            for report in reports:
                _write_stdout(report, stdout)
        return EXIT_OK
    except Exception as exc:
        return handle_exception(exc)
    finally:
        if settings.METRICS_ENABLED and settings.METRICS_TEXTFILE:
            export_metrics(settings.METRICS_TEXTFILE)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
