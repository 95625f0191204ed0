"""Monte-Carlo simulation configuration and results."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import get_settings
from app.models.code import HoscSpec


def _settings_default(name: str):  # type: ignore[no-untyped-def]
    return lambda: getattr(get_settings(), name)


class SimConfig(BaseModel):
    """One simulated code over a list of crossover probabilities."""

    model_config = ConfigDict(frozen=True)

    spec: HoscSpec
    window: int = Field(..., ge=1, description="Decoding window W in rectangles")
    iterations: int = Field(..., ge=1, description="Passes I per window advance")
    probabilities: tuple[float, ...] = Field(..., min_length=1, description="BSC crossover p")
    seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit master seed")
    min_bit_errors: int = Field(default_factory=_settings_default("min_bit_errors"), ge=1)
    max_bits: int = Field(default_factory=_settings_default("max_bits"), ge=1)
    zero_error_multiplier: float = Field(
        default_factory=_settings_default("zero_error_multiplier"),
        gt=0,
    )
    target_ber: float = Field(default_factory=_settings_default("target_ber"), gt=0, lt=1)
    frame_rectangles: int = Field(
        default_factory=_settings_default("frame_rectangles"),
        ge=1,
        description="Data rectangles per terminated frame",
    )
    streams: int = Field(default_factory=_settings_default("streams"), ge=1)
    frames_per_task: int = Field(default_factory=_settings_default("frames_per_task"), ge=1)
    schedule: Literal["oldest-first", "newest-first"] = Field(
        default_factory=_settings_default("schedule"),
    )
    terminate: bool = Field(default=True, description="Send the encoder termination tail")

    @field_validator("probabilities")
    @classmethod
    def _check_probabilities(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        for p in value:
            if not 0.0 <= p <= 0.5:
                raise ValueError(f"crossover probability {p} outside [0, 0.5]")
        return value

    @property
    def zero_error_bits(self) -> int:
        """Information bits required before a point without errors is accepted."""
        return int(round(self.zero_error_multiplier / self.target_ber))

    def label(self) -> tuple[int | float, ...]:
        """(L, M, S/L, C, W, I, rate, window bits)."""
        s = self.spec
        return (
            s.L,
            s.M,
            s.block_side,
            s.chains,
            self.window,
            self.iterations,
            round(s.rate or 0.0, 6),
            s.window_bits(self.window),
        )


class SimPoint(BaseModel):
    """Measurements at one crossover probability."""

    p: float
    input_ber: float = Field(..., description="Measured channel flip rate")
    output_ber: float = Field(..., description="bit_errors / bits")
    bits: int = Field(..., description="Information bits simulated")
    bit_errors: int = Field(..., description="Information bits wrong after decoding")
    channel_bits: int
    channel_errors: int
    coded_bits: int = Field(..., description="Coded bits of the data rectangles")
    frames: int
    zero_error: bool = Field(default=False, description="No error after the zero-error budget")
    elapsed_s: float = Field(default=0.0, description="Wall time, excluded from result files")

    @property
    def bits_per_second(self) -> float:
        return self.bits / self.elapsed_s if self.elapsed_s > 0 else 0.0


class SimResult(BaseModel):
    """All points of one sweep."""

    spec_hash: str
    seed: int
    label: tuple[int | float, ...]
    points: list[SimPoint] = Field(default_factory=list)
