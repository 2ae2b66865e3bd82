"""Local development settings"""

from app.core.settings.base import BaseAppSettings


class LocalSettings(BaseAppSettings):
    """Settings for interactive runs on a workstation"""

    ENVIRONMENT: str = "local"
    DEBUG: bool = True
    LOG_LEVEL: str = "DEBUG"
    LOG_FORMAT: str = "console"  # Human-readable on a terminal
