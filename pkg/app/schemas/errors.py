"""Error record schemas"""

from pydantic import BaseModel, Field


class ErrorDetail(BaseModel):
    """Field-level error detail"""

    field: str | None = Field(None, description="Config key or input field with the error")
    message: str = Field(..., description="Specific error message")
    code: str = Field(..., description="Error code for this field")


class ErrorRecord(BaseModel):
    """Machine-readable error emitted by the CLI on failure"""

    type: str = Field(..., description="Error type category")
    code: str = Field(..., description="Error code")
    message: str = Field(..., description="Human-readable error message")
    exit_code: int = Field(..., description="Process exit status")
    stage: str | None = Field(None, description="Pipeline stage the error points at")
    details: list[ErrorDetail] = Field(default_factory=list, description="Field-level details")

    def to_line(self) -> str:
        """Render as a single ``key=value`` line suitable for grep and parsers."""
        parts = [f"error={self.code}", f"exit={self.exit_code}"]
        if self.stage:
            parts.append(f"stage={self.stage}")
        message = self.message.replace("\\", "\\\\").replace('"', '\\"').replace("\n", " ")
        parts.append(f'message="{message}"')
        return " ".join(parts)
