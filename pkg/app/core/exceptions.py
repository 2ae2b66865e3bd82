"""Custom exception classes"""

from app.schemas.errors import ErrorDetail, ErrorRecord

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_CONFIG = 4


class RdetError(Exception):
    """Base exception for all pipeline errors"""

    def __init__(
        self,
        message: str,
        error_type: str = "domain_error",
        error_code: str = "internal_error",
        exit_code: int = EXIT_FAILURE,
        details: list[ErrorDetail] | None = None,
    ):
        """
        Initialize pipeline exception.

        Args:
            message: Human-readable error message
            error_type: Error type category
            error_code: Specific, machine-parsable error code
            exit_code: Process exit status the CLI reports
            details: Field-level error details
        """
        super().__init__(message)
        self.message = message
        self.error_type = error_type
        self.error_code = error_code
        self.exit_code = exit_code
        self.details = details or []

    @property
    def stage(self) -> str | None:
        return None

    def to_error_record(self) -> ErrorRecord:
        """Convert exception to ErrorRecord schema"""
        return ErrorRecord(
            type=self.error_type,
            code=self.error_code,
            message=self.message,
            exit_code=self.exit_code,
            stage=self.stage,
            details=self.details,
        )


class UsageError(RdetError):
    """Command-line usage error"""

    def __init__(self, message: str = "Invalid command-line usage"):
        super().__init__(
            message=message,
            error_type="invalid_request_error",
            error_code="usage_error",
            exit_code=EXIT_USAGE,
        )


class ConfigError(RdetError):
    """Configuration file or override error"""

    def __init__(
        self,
        message: str = "Configuration validation failed",
        details: list[ErrorDetail] | None = None,
    ):
        super().__init__(
            message=message,
            error_type="invalid_request_error",
            error_code="config_error",
            exit_code=EXIT_CONFIG,
            details=details or [],
        )


class MissingArtifactError(RdetError):
    """An upstream stage output is absent"""

    def __init__(self, stage: str, artifact: str, message: str | None = None):
        self._stage = stage
        self.artifact = artifact
        message = message or f"Missing artifact {artifact}: run stage '{stage}' first"
        super().__init__(
            message=message,
            error_type="artifact_error",
            error_code="missing_artifact",
            exit_code=EXIT_MISSING_ARTIFACT,
            details=[ErrorDetail(field=stage, message=message, code="ARTIFACT_NOT_FOUND")],
        )

    @property
    def stage(self) -> str | None:
        return self._stage


class StaleArtifactError(MissingArtifactError):
    """An upstream stage output was produced under a different configuration"""

    def __init__(self, stage: str, artifact: str, expected: str, found: str):
        message = (
            f"Artifact {artifact} was built with config {found[:12]}, "
            f"expected {expected[:12]}: re-run stage '{stage}'"
        )
        super().__init__(stage=stage, artifact=artifact, message=message)
        self.error_code = "stale_artifact"


class GeometryError(RdetError, ValueError):
    """Box geometry outside an operation's domain (degenerate or non-finite)"""

    def __init__(self, message: str):
        super().__init__(message=message, error_code="geometry_error")


class ImageDecodeError(RdetError):
    """Malformed or truncated image file"""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(message=f"Cannot decode {path}: {reason}", error_code="image_decode_error")


class ExtractionError(RdetError):
    """Feature extractor received input it cannot process"""

    def __init__(self, message: str):
        super().__init__(message=message, error_code="extraction_error")


class DatasetError(RdetError):
    """Dataset generation or split error"""

    def __init__(self, message: str):
        super().__init__(message=message, error_code="dataset_error")


class TrainingError(RdetError):
    """Training data is unusable (single-class input, no positives, empty pools)"""

    def __init__(self, message: str):
        super().__init__(message=message, error_code="training_error")


class EvaluationError(RdetError):
    """Evaluation inputs are inconsistent"""

    def __init__(self, message: str, details: list[ErrorDetail] | None = None):
        super().__init__(message=message, error_code="evaluation_error", details=details)
