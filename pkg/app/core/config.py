"""Application configuration management."""

from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables (prefix ``HOSC_``)."""

    model_config = SettingsConfigDict(
        env_prefix="HOSC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Logging level",
    )
    workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes used by DTS search and simulation sweeps",
    )

    # Difference triangle sets
    dts_scope_cap_max: int = Field(
        default=4096,
        ge=1,
        description="Largest scope cap accepted by the DTS search",
    )
    dts_time_budget_s: float = Field(
        default=60.0,
        gt=0,
        description="Default wall-clock budget of a DTS search in seconds",
    )
    family_materialize_cap: int = Field(
        default=5000,
        ge=1,
        description="Largest L for which an infinite-family member is materialized",
    )

    # Decoder
    debug_syndrome_check: bool = Field(
        default=False,
        description="Recompute every window syndrome after each decoder advance",
    )
    schedule: Literal["oldest-first", "newest-first"] = Field(
        default="oldest-first",
        description="Constraint visiting order within a decoding iteration",
    )

    # Simulation defaults
    min_bit_errors: int = Field(
        default=100,
        ge=1,
        description="Stop a point after this many post-decoding bit errors",
    )
    max_bits: int = Field(
        default=10**10,
        ge=1,
        description="Stop a point after this many information bits",
    )
    zero_error_multiplier: float = Field(
        default=10.0,
        gt=0,
        description="Bits required for a zero-error point, as a multiple of 1/target BER",
    )
    target_ber: float = Field(
        default=1e-7,
        gt=0,
        lt=1,
        description="Output BER target used by the zero-error convention",
    )
    frame_rectangles: int = Field(
        default=64,
        ge=1,
        description="Data rectangles per terminated simulation frame",
    )
    streams: int = Field(
        default=4,
        ge=1,
        description="Independent RNG substreams per simulated point",
    )
    frames_per_task: int = Field(
        default=1,
        ge=1,
        description="Frames simulated by one stream in one round",
    )

    @property
    def is_debug(self) -> bool:
        """Check if debug logging is enabled."""
        return self.log_level == "DEBUG"


@lru_cache
def get_settings() -> Settings:
    """
    Get cached toolkit settings.

    Returns:
        Settings instance loaded from environment variables.
    """
    return Settings()
