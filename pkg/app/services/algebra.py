"""Modular rings, small finite fields and sharply 2-transitive affine groups.

Field elements of GF(p^k) are integers in [0, q) whose base-p digits are the polynomial
coefficients, digit i being the coefficient of x^i. Sorting the coefficient vectors
lexicographically with the constant term last therefore gives the natural integer order,
which is the [q] labeling used by ``AffinePerm``.
"""

from functools import lru_cache
from math import gcd

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from app.core.errors import InvalidArgumentError

# Monic modulus polynomials, coefficients from x^0 upwards.
_MODULUS_POLYNOMIALS: dict[int, tuple[int, tuple[int, ...]]] = {
    2: (2, (0, 1)),
    3: (3, (0, 1)),
    4: (2, (1, 1, 1)),  # x^2 + x + 1
    5: (5, (0, 1)),
    7: (7, (0, 1)),
    8: (2, (1, 1, 0, 1)),  # x^3 + x + 1
    9: (3, (1, 0, 1)),  # x^2 + 1
    11: (11, (0, 1)),
    13: (13, (0, 1)),
    16: (2, (1, 1, 0, 0, 1)),  # x^4 + x + 1
}

SUPPORTED_FIELD_ORDERS: tuple[int, ...] = tuple(sorted(_MODULUS_POLYNOMIALS))


def lpf(m: int) -> int:
    """
    Least prime factor of m.

    Args:
        m: Integer, at least 2

    Returns:
        The least prime dividing m

    Raises:
        InvalidArgumentError: If m < 2
    """
    if m < 2:
        raise InvalidArgumentError(f"lpf is undefined for m={m}")
    if m % 2 == 0:
        return 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return f
        f += 2
    return m


def is_invertible_mod(x: int, m: int) -> bool:
    """Return True iff x is a unit of Z_m."""
    if m < 1:
        raise InvalidArgumentError(f"modulus must be positive, got {m}")
    return gcd(x % m, m) == 1


class ModRing(BaseModel):
    """The ring of integers modulo ``modulus``."""

    model_config = ConfigDict(frozen=True)

    modulus: int = Field(..., ge=1, description="Ring modulus m")

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def add(self, x: int, y: int) -> int:
        return (x + y) % self.modulus

    def sub(self, x: int, y: int) -> int:
        return (x - y) % self.modulus

    def mul(self, x: int, y: int) -> int:
        return (x * y) % self.modulus

    def neg(self, x: int) -> int:
        return (-x) % self.modulus

    def is_unit(self, x: int) -> bool:
        return is_invertible_mod(x, self.modulus)

    def inv(self, x: int) -> int:
        """
        Multiplicative inverse.

        Raises:
            InvalidArgumentError: If x is not a unit
        """
        if not self.is_unit(x):
            raise InvalidArgumentError(f"{x} is not invertible modulo {self.modulus}")
        if self.modulus == 1:
            return 0
        return pow(x % self.modulus, -1, self.modulus)

    def elements(self) -> range:
        return range(self.modulus)


class SmallField:
    """GF(q) for the prime powers q <= 16, with precomputed operation tables."""

    def __init__(self, q: int) -> None:
        """
        Build addition, multiplication and inverse tables.

        Args:
            q: Field order, one of ``SUPPORTED_FIELD_ORDERS``

        Raises:
            InvalidArgumentError: If q is not a supported prime power
        """
        if q not in _MODULUS_POLYNOMIALS:
            raise InvalidArgumentError(
                f"unsupported field order {q}; supported: {SUPPORTED_FIELD_ORDERS}"
            )
        self.q = q
        self.p, self.modulus = _MODULUS_POLYNOMIALS[q]
        self.k = len(self.modulus) - 1

        self.add_table: NDArray[np.int64] = np.zeros((q, q), dtype=np.int64)
        self.mul_table: NDArray[np.int64] = np.zeros((q, q), dtype=np.int64)
        for x in range(q):
            for y in range(q):
                self.add_table[x, y] = self._encode(
                    [(a + b) % self.p for a, b in zip(self._digits(x), self._digits(y))]
                )
                product = self._poly_mul(self._digits(x), self._digits(y))
                self.mul_table[x, y] = self._encode(product)

        self.neg_table: NDArray[np.int64] = np.array(
            [int(np.flatnonzero(self.add_table[x] == 0)[0]) for x in range(q)], dtype=np.int64
        )
        self.inv_table: NDArray[np.int64] = np.zeros(q, dtype=np.int64)
        for x in range(1, q):
            self.inv_table[x] = int(np.flatnonzero(self.mul_table[x] == 1)[0])

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.k):
            out.append(x % self.p)
            x //= self.p
        return out

    def _encode(self, coeffs: list[int]) -> int:
        value = 0
        for c in reversed(coeffs):
            value = value * self.p + c
        return value

    def _poly_mul(self, a: list[int], b: list[int]) -> list[int]:
        prod = [0] * (2 * self.k - 1)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % self.p
        # Reduce by the monic modulus from the top degree down.
        for deg in range(len(prod) - 1, self.k - 1, -1):
            lead = prod[deg]
            if lead:
                for i, mc in enumerate(self.modulus):
                    prod[deg - self.k + i] = (prod[deg - self.k + i] - lead * mc) % self.p
        return prod[: self.k]

    def add(self, x: int, y: int) -> int:
        return int(self.add_table[x, y])

    def mul(self, x: int, y: int) -> int:
        return int(self.mul_table[x, y])

    def neg(self, x: int) -> int:
        return int(self.neg_table[x])

    def inv(self, x: int) -> int:
        if x == 0:
            raise InvalidArgumentError("zero has no multiplicative inverse")
        return int(self.inv_table[x])

    def elements(self) -> range:
        return range(self.q)

    def __repr__(self) -> str:
        return f"SmallField(q={self.q})"


@lru_cache
def small_field(q: int) -> SmallField:
    """Cached field constructor."""
    return SmallField(q)


class AffinePerm(BaseModel):
    """The map x -> a*x + b on GF(q), exposed as a permutation of [q]."""

    model_config = ConfigDict(frozen=True)

    q: int = Field(..., description="Field order")
    a: int = Field(..., ge=1, description="Nonzero multiplier")
    b: int = Field(..., ge=0, description="Translation")
    mapping: tuple[int, ...] = Field(..., description="Image of each element of [q]")

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    @classmethod
    def build(cls, field: SmallField, a: int, b: int) -> "AffinePerm":
        if a == 0:
            raise InvalidArgumentError("affine multiplier must be nonzero")
        mapping = tuple(field.add(field.mul(a, x), b) for x in field.elements())
        return cls(q=field.q, a=a, b=b, mapping=mapping)


def sharply_2_transitive_group(q: int) -> list[AffinePerm]:
    """
    Affine group of GF(q), a sharply 2-transitive group of order q(q-1).

    Args:
        q: Prime power <= 16

    Returns:
        The q(q-1) affine permutations ordered by (a, b)

    Raises:
        InvalidArgumentError: If q is not a supported prime power
    """
    field = small_field(q)
    return [AffinePerm.build(field, a, b) for a in range(1, q) for b in range(q)]


def is_sharply_2_transitive(group: list[AffinePerm], q: int) -> bool:
    """Exhaustive check: the images of the base pair (0, 1) hit every ordered pair once."""
    if q < 2:
        return False
    seen: set[tuple[int, int]] = set()
    for g in group:
        image = (g(0), g(1))
        if image[0] == image[1] or image in seen:
            return False
        seen.add(image)
    return len(seen) == q * (q - 1)
