"""Batch (unattended) run settings"""

from app.core.settings.base import BaseAppSettings


class BatchSettings(BaseAppSettings):
    """Settings for unattended pipeline runs whose logs are collected"""

    ENVIRONMENT: str = "batch"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"
