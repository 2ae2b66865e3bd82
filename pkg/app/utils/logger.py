"""Structured logging configuration using structlog"""

import logging
import sys

import structlog
from structlog.types import Processor

from app.core.settings import settings


def setup_logging(level: str | None = None, log_format: str | None = None) -> None:
    """
    Configure structured logging based on environment settings.

    Logs always go to standard error; standard output is reserved for data
    written with ``--stdout``.

    Args:
        level: Optional level overriding ``settings.LOG_LEVEL``
        log_format: Optional renderer overriding ``settings.LOG_FORMAT``
    """
    level_name = (level or settings.LOG_LEVEL).upper()
    renderer = log_format or settings.LOG_FORMAT

    # Standard library logging configuration
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name, logging.INFO),
        force=True,
    )

    # Build processors list
    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,  # Merge context variables
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_log_level,  # Add log level
        structlog.stdlib.add_logger_name,  # Add logger name
        structlog.processors.TimeStamper(fmt="iso"),  # ISO 8601 timestamps
        structlog.processors.StackInfoRenderer(),  # Stack traces
        structlog.processors.format_exc_info,  # Exception formatting
    ]

    if renderer == "json":
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=False,
    )


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """
    Get a configured logger instance.

    Args:
        name: Optional logger name (usually __name__)

    Returns:
        Configured structlog logger
    """
    return structlog.get_logger(name)


# Initialize logging on module import
setup_logging()

# Default logger instance
logger = get_logger(__name__)

__all__ = ["logger", "get_logger", "setup_logging"]
