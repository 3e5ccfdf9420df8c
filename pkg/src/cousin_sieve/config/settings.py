"""Runtime settings and configuration."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..models.schemas import OutputFormat

# Environment variable naming the key=value config file passed via --config.
CONFIG_FILE_ENV = "COUSIN_SIEVE_CONFIG"


class Settings(BaseSettings):
    """Settings with environment variable and config-file support."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="forbid",
    )

    # Sieve Configuration
    sieve_limit: int = Field(
        default=1_000_000,
        description="Default sieve bound for commands that need a prime table",
    )

    segment_size: int = Field(
        default=2**15,
        description="Segment length in 64-bit words of odd numbers",
    )

    cache_path: Optional[Path] = Field(
        default=None,
        description="Optional binary prime-cache file",
    )

    materialize_cap: int = Field(
        default=1_000_000,
        description="Largest n for which survivor sets are materialised",
    )

    # Expansion Configuration
    expansion_max_primes: int = Field(
        default=12,
        description="Largest odd-prime count the full term expansion accepts",
    )

    expansion_node_budget: int = Field(
        default=2_000_000,
        description="Live-term visits before d0 falls back to simulation",
    )

    # Bounds Configuration
    figure_max_prime: int = Field(
        default=1000,
        description="Largest p_v the figure series will sieve for",
    )

    # Sweep Configuration
    sweep_overrides: Dict[str, Dict[str, int]] = Field(
        default_factory=dict,
        description="Per-lemma grid overrides, e.g. {\"L4\": {\"m_max\": 1000}}",
    )

    max_workers: int = Field(
        default=1,
        description="Worker processes used by lemma sweeps",
    )

    # Output Configuration
    output_format: str = Field(
        default="table",
        description="Output format: table, json or csv",
    )

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level",
    )

    log_format: str = Field(
        default="console",
        description="Log format: json or console",
    )

    debug: bool = Field(
        default=False,
        description="Enable debug mode",
    )

    @field_validator("sieve_limit")
    @classmethod
    def validate_sieve_limit(cls, v: int) -> int:
        if v < 2:
            raise ValueError("sieve_limit must be at least 2")
        return v

    @field_validator("segment_size")
    @classmethod
    def validate_segment_size(cls, v: int) -> int:
        if v <= 0 or v & (v - 1):
            raise ValueError("segment_size must be a positive power of two")
        return v

    @field_validator("output_format")
    @classmethod
    def validate_output_format(cls, v: str) -> str:
        try:
            return OutputFormat(v.lower()).value
        except ValueError:
            choices = ", ".join(f.value for f in OutputFormat)
            raise ValueError(f"output_format must be one of {choices}") from None

    @field_validator("max_workers", "expansion_max_primes", "figure_max_prime")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance, honouring a --config file if one is set."""
    config_file = os.environ.get(CONFIG_FILE_ENV)
    if config_file:
        return Settings(_env_file=config_file)
    return Settings()
