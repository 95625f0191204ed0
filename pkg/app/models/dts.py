"""Ruler and difference triangle set models."""

from enum import Enum
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field


class Ruler(BaseModel):
    """An ordered set of distinct integer marks."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={"example": {"marks": [0, 6, 7]}},
    )

    marks: tuple[int, ...] = Field(..., min_length=2, description="Marks d_0, ..., d_M")

    @property
    def order(self) -> int:
        return len(self.marks)

    @property
    def length(self) -> int:
        """Largest pairwise difference."""
        return max(self.marks) - min(self.marks)

    @property
    def is_normalized(self) -> bool:
        return self.marks[0] == 0 and all(
            a < b for a, b in zip(self.marks, self.marks[1:])
        )

    def differences(self) -> list[tuple[int, int, int]]:
        """Signed differences d_k1 - d_k2 for k1 != k2, with their indices."""
        return [
            (self.marks[k1] - self.marks[k2], k1, k2)
            for k1 in range(self.order)
            for k2 in range(self.order)
            if k1 != k2
        ]

    def distances(self) -> list[int]:
        """Positive differences between all mark pairs."""
        return [d for d, _, _ in self.differences() if d > 0]

    def normalized(self) -> "Ruler":
        ordered = sorted(self.marks)
        return Ruler(marks=tuple(x - ordered[0] for x in ordered))

    def reflected(self) -> "Ruler":
        """Mirror image of the normalized ruler; it has the same distances."""
        norm = self.normalized()
        top = norm.marks[-1]
        return Ruler(marks=tuple(sorted(top - x for x in norm.marks)))

    def scaled(self, factor: int) -> "Ruler":
        return Ruler(marks=tuple(factor * x for x in self.marks))

    def __str__(self) -> str:
        return "(" + ",".join(str(x) for x in self.marks) + ")"


class DtsCertificate(BaseModel):
    """Derived quantities of a difference triangle set."""

    model_config = ConfigDict(frozen=True)

    scope: int = Field(..., description="Largest ruler length")
    sum_of_lengths: int = Field(..., description="Sum of ruler lengths")
    is_perfect: bool = Field(..., description="Distance set is exactly {1, ..., L(M+1)M/2}")
    distance_set: tuple[int, ...] = Field(..., description="Sorted positive differences")


class DifferenceTriangleSet(BaseModel):
    """L rulers of order M+1 whose signed differences are all distinct."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"rulers": [{"marks": [0, 6, 7]}, {"marks": [0, 2, 5]}]}
        },
    )

    rulers: tuple[Ruler, ...] = Field(..., min_length=1, description="The L rulers")
    certificate: DtsCertificate | None = Field(
        default=None,
        description="Filled in by validation",
    )

    @property
    def L(self) -> int:  # noqa: N802
        return len(self.rulers)

    @property
    def M(self) -> int:  # noqa: N802
        return self.rulers[0].order - 1

    @property
    def scope(self) -> int:
        return max(r.length for r in self.rulers)

    @property
    def sum_of_lengths(self) -> int:
        return sum(r.length for r in self.rulers)

    @property
    def is_normalized(self) -> bool:
        return all(r.is_normalized for r in self.rulers)

    def as_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(r.marks for r in self.rulers)

    def canonical_key(self) -> tuple[tuple[int, ...], ...]:
        """Sort key used to order search results deterministically."""
        return tuple(sorted(r.normalized().marks for r in self.rulers))

    def __str__(self) -> str:
        return "{" + ",".join(str(r) for r in self.rulers) + "}"


class SearchObjective(str, Enum):
    """Optimality criterion of the DTS search."""

    MIN_SCOPE = "min-scope"
    MIN_SUM_OF_LENGTHS = "min-sum-of-lengths"
    PARETO = "pareto"


class ParetoPoint(BaseModel):
    """One (scope, sum-of-lengths) point on the search front."""

    model_config = ConfigDict(frozen=True)

    scope: int
    sum_of_lengths: int


class DtsSearchResult(BaseModel):
    """Outcome of a DTS search."""

    L: int  # noqa: N815
    M: int  # noqa: N815
    objective: SearchObjective
    scope_cap: int
    dtss: list[DifferenceTriangleSet] = Field(default_factory=list)
    front: list[ParetoPoint] = Field(
        default_factory=list,
        description="Optimal objective points reached (one point unless pareto)",
    )
    partial: bool = Field(default=False, description="Time budget ran out")
    proven_infeasible: bool = Field(
        default=False,
        description="Exhaustion finished without any DTS within the scope cap",
    )
    nodes: int = Field(default=0, description="Search tree nodes visited")

    @property
    def best_scope(self) -> int | None:
        return min((p.scope for p in self.front), default=None)

    @property
    def best_sum_of_lengths(self) -> int | None:
        return min((p.sum_of_lengths for p in self.front), default=None)


class FamilyMember(BaseModel):
    """One member of an iterated self-combination family."""

    index: int = Field(..., description="Iteration i")
    L: int = Field(..., description="Number of rulers L_i")  # noqa: N815
    sum_of_lengths: int = Field(..., description="Sum-of-lengths S_i")
    dts: DifferenceTriangleSet | None = Field(
        default=None,
        description="Materialized DTS when requested and under the size cap",
    )


class MemoryMetrics(BaseModel):
    """Encoder and decoder memory of a code built on a DTS."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    encode_mem: int = Field(..., description="(S/L)^2 * sum of ruler lengths, in bits")
    decode_mem: int = Field(..., description="(S/L)^2 * L * scope, in bits")
    ratio_vs_L1: Fraction | None = Field(  # noqa: N815
        default=None,
        description="Encoding memory relative to the L=1 code at equal S",
    )
