"""Component code and higher-order staircase code models."""

from enum import Enum
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from app.core.errors import StructuralFailureError
from app.models.dts import DifferenceTriangleSet
from app.models.net import NetSpec


class ComponentCodeSpec(BaseModel):
    """Shortened extended Hamming code of length n with r = m + 1 parity bits.

    Column i of the parity-check matrix is the integer ``columns[i]``: bits 0..m-1 hold the
    coordinate label, bit m is the overall-parity row. The last r columns are the parity
    positions of the systematic encoder.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=4, description="Codeword length (M+1)S")
    r: int = Field(..., ge=2, description="Parity bits")
    m: int = Field(..., ge=1, description="Base Hamming parameter, r = m + 1")
    shorten: int = Field(..., ge=0, description="Removed coordinates 2^m - n")
    columns: tuple[int, ...] = Field(..., description="Parity-check columns as r-bit integers")

    @property
    def k(self) -> int:
        """Information length."""
        return self.n - self.r

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def parity_check(self) -> NDArray[np.uint8]:
        """The r x n parity-check matrix, row b holding bit b of every column."""
        cols = np.asarray(self.columns, dtype=np.int64)
        return ((cols[None, :] >> np.arange(self.r)[:, None]) & 1).astype(np.uint8)


class Syndrome(NamedTuple):
    """An r-bit syndrome value and whether it changed since the last decode attempt."""

    value: int
    dirty: bool = True


class DecodeKind(str, Enum):
    """Bounded-distance decoding verdict."""

    NO_ERROR = "no-error"
    FLIP = "flip"
    DETECTED = "detected-uncorrectable"


class DecodeOutcome(NamedTuple):
    kind: DecodeKind
    position: int | None = None


class HoscSpec(BaseModel):
    """A fully resolved higher-order staircase code."""

    model_config = ConfigDict(frozen=True)

    L: int = Field(..., ge=1, description="Rulers in the DTS")  # noqa: N815
    M: int = Field(..., ge=1, description="Ruler order minus one")  # noqa: N815
    block_side: int = Field(..., ge=1, description="Block side S/L")
    chains: int = Field(default=1, ge=1, description="Circularly chained copies C")
    r: int | None = Field(default=None, description="Component parity bits")
    dts: DifferenceTriangleSet
    net: NetSpec
    component: ComponentCodeSpec | None = Field(
        default=None,
        description="Absent for structure-only specs",
    )
    combined_ruler: tuple[int, ...] = Field(
        ...,
        description="Sorted delays d_0 < ... < d_{L(M+1)-1}",
    )
    perm_assignment: tuple[int, ...] = Field(..., description="Net index of each delay")
    ruler_of_delay: tuple[int, ...] = Field(..., description="Ruler index of each delay")

    @property
    def S(self) -> int:  # noqa: N802
        """Number of columns in the L newest blocks."""
        return self.L * self.block_side

    @property
    def n(self) -> int:
        """Component codeword length (M+1)S."""
        return (self.M + 1) * self.S

    @property
    def d_max(self) -> int:
        return self.combined_ruler[-1]

    @property
    def rate(self) -> float | None:
        if self.r is None:
            return None
        return 1 - self.r / self.S

    @property
    def delays(self) -> int:
        return len(self.combined_ruler)

    def window_bits(self, W: int) -> int:  # noqa: N803
        """Decoding window footprint W*C*(S/L)^2*L in bits."""
        return W * self.chains * self.block_side**2 * self.L


class ConstraintId(NamedTuple):
    """Component codeword of chain ``chain`` at time ``time`` (a multiple of L), row ``row``."""

    chain: int
    time: int
    row: int


class PositionRef(NamedTuple):
    """Cell (i, j) of block B_block of chain ``chain``."""

    chain: int
    block: int
    i: int
    j: int


class Membership(NamedTuple):
    """A position seen from one of its constraints, with its codeword column."""

    constraint: ConstraintId
    position: PositionRef
    column: int


class StructureReport(BaseModel):
    """Outcome of the degree and overlap checks over a horizon."""

    horizon: int
    constraints_checked: int = 0
    positions_checked: int = 0
    max_overlap: int = 0
    degree_violations: list[str] = Field(default_factory=list)
    overlap_violations: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.degree_violations and not self.overlap_violations

    def raise_for_failure(self) -> None:
        """
        Raise when any check failed.

        Raises:
            StructuralFailureError: Naming the first offending position or constraint pair
        """
        if self.passed:
            return
        first = (self.overlap_violations or self.degree_violations)[0]
        raise StructuralFailureError(
            f"structure check failed ({len(self.degree_violations)} degree, "
            f"{len(self.overlap_violations)} overlap violations): {first}"
        )


class DecoderStats(BaseModel):
    """Counters of a decoder window."""

    advances: int = 0
    iterations: int = Field(default=0, description="Passes over the window")
    flips: int = 0
    detected: int = Field(default=0, description="Visits ending in detected-uncorrectable")
    refused: int = Field(default=0, description="Flips aimed at frozen or emitted bits")
