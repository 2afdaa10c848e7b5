"""
Runtime settings for the laboratory.
Read from the environment (and an optional .env file) through pydantic-settings.
"""

import os
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings: worker count, output location, logging level, default seed."""
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1, description="Worker threads")
    output_dir: Path = Field(Path("output"), description="Root directory for every artifact")
    log_level: str = Field("INFO", description="Logging level")
    master_seed: int = Field(20240601, ge=0, description="Default master seed")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the cached settings instance."""
    return Settings()
