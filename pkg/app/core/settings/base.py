"""Base settings configuration"""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class BaseAppSettings(BaseSettings):
    """Base runtime settings shared by every profile"""

    model_config = SettingsConfigDict(
        env_prefix="RDET_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "rdet"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False
    ENVIRONMENT: Literal["local", "batch"] = "local"

    # Workers
    JOBS: int | None = Field(
        None, ge=1, description="Worker cap for per-image parallel work (None = all cores)"
    )

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["json", "console"] = "json"

    # Prometheus
    METRICS_ENABLED: bool = True
    METRICS_TEXTFILE: str | None = Field(
        None, description="Write the metrics registry here after each CLI invocation"
    )
