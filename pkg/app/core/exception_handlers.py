"""Top-level exception handlers for the command line"""

import sys
import traceback
from typing import TextIO

from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import EXIT_CONFIG, EXIT_FAILURE, RdetError
from app.schemas.errors import ErrorDetail, ErrorRecord
from app.utils.logger import get_logger

logger = get_logger(__name__)


def validation_details(exc: PydanticValidationError) -> list[ErrorDetail]:
    """Convert pydantic errors to ErrorDetail entries keyed by dotted config path."""
    details = []
    for error in exc.errors():
        field_path = ".".join(str(loc) for loc in error.get("loc", []))
        details.append(
            ErrorDetail(
                field=field_path if field_path else None,
                message=error.get("msg", "Validation error"),
                code=error.get("type", "VALIDATION_ERROR").upper(),
            )
        )
    return details


def rdet_exception_handler(exc: RdetError, stream: TextIO | None = None) -> int:
    """
    Handle RdetError errors.

    Args:
        exc: RdetError instance
        stream: Where the single error line goes (standard error by default)

    Returns:
        Process exit code
    """
    record = exc.to_error_record()
    logger.error(
        "rdet_exception",
        error_type=exc.error_type,
        error_code=exc.error_code,
        message=exc.message,
        exit_code=exc.exit_code,
        stage=record.stage,
        details=[detail.model_dump() for detail in record.details],
    )
    print(record.to_line(), file=stream or sys.stderr)
    return exc.exit_code


def validation_exception_handler(
    exc: PydanticValidationError, stream: TextIO | None = None
) -> int:
    """Handle pydantic validation errors that escaped config loading."""
    details = validation_details(exc)
    record = ErrorRecord(
        type="invalid_request_error",
        code="config_error",
        message="; ".join(f"{d.field}: {d.message}" for d in details) or "Validation failed",
        exit_code=EXIT_CONFIG,
        details=details,
    )
    logger.error("validation_exception", details=[d.model_dump() for d in details])
    print(record.to_line(), file=stream or sys.stderr)
    return EXIT_CONFIG


def generic_exception_handler(exc: Exception, stream: TextIO | None = None) -> int:
    """Handle anything unexpected: log the traceback, report a generic error line."""
    logger.error(
        "unhandled_exception",
        error_class=exc.__class__.__name__,
        error=str(exc),
        traceback=traceback.format_exc(),
    )
    record = ErrorRecord(
        type="api_error",
        code="internal_error",
        message=f"{exc.__class__.__name__}: {exc}",
        exit_code=EXIT_FAILURE,
    )
    print(record.to_line(), file=stream or sys.stderr)
    return EXIT_FAILURE


def handle_exception(exc: BaseException, stream: TextIO | None = None) -> int:
    """Dispatch to the most specific handler; mirrors handler registration priority."""
    if isinstance(exc, RdetError):
        return rdet_exception_handler(exc, stream)
    if isinstance(exc, PydanticValidationError):
        return validation_exception_handler(exc, stream)
    if isinstance(exc, Exception):
        return generic_exception_handler(exc, stream)
    raise exc
