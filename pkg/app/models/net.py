"""Net models: M+1 invertible 2x2 matrices over the integers modulo the block side."""

from math import gcd

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.errors import InvalidArgumentError

Matrix = tuple[int, int, int, int]

IDENTITY: Matrix = (1, 0, 0, 1)


def determinant(matrix: Matrix, m: int) -> int:
    a, b, c, d = matrix
    return (a * d - b * c) % m


class NetSpec(BaseModel):
    """M+1 invertible matrices over Z_m, stored row-major as (a, b, c, d)."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "block_side": 5,
                "matrices": [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 1]],
            }
        },
    )

    block_side: int = Field(..., ge=1, description="Grid side m = S/L")
    matrices: tuple[Matrix, ...] = Field(..., min_length=1, description="Matrices, identity first")

    @model_validator(mode="after")
    def _check_matrices(self) -> "NetSpec":
        m = self.block_side
        reduced = tuple(tuple(x % m for x in a) for a in self.matrices)
        if reduced[0] != tuple(x % m for x in IDENTITY):
            raise InvalidArgumentError(f"first matrix must be the identity, got {self.matrices[0]}")
        for index, matrix in enumerate(self.matrices):
            if gcd(determinant(matrix, m), m) != 1:
                raise InvalidArgumentError(f"matrix {index} {matrix} is not invertible mod {m}")
        return self

    @property
    def M(self) -> int:  # noqa: N802
        return len(self.matrices) - 1

    def __str__(self) -> str:
        rows = "; ".join(f"[[{a},{b}],[{c},{d}]]" for a, b, c, d in self.matrices)
        return f"net(m={self.block_side}: {rows})"
