"""Shortened extended Hamming component codes with syndrome-domain decoding."""

import logging
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from app.core.errors import InvalidArgumentError
from app.models.code import ComponentCodeSpec, DecodeKind, DecodeOutcome, Syndrome

logger = logging.getLogger(__name__)


def gf2_rank(rows: list[int]) -> int:
    """Rank over GF(2) of integer bitset rows."""
    basis: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in basis:
                basis[top] = row
                break
            row ^= basis[top]
    return len(basis)


def gf2_inverse(matrix: NDArray[np.uint8]) -> NDArray[np.uint8]:
    """
    Inverse of a square binary matrix by Gauss-Jordan elimination.

    Raises:
        InvalidArgumentError: If the matrix is singular
    """
    size = matrix.shape[0]
    work = np.concatenate([matrix % 2, np.eye(size, dtype=np.uint8)], axis=1).astype(np.uint8)
    for col in range(size):
        pivots = np.flatnonzero(work[col:, col]) + col
        if pivots.size == 0:
            raise InvalidArgumentError("matrix is singular over GF(2)")
        pivot = pivots[0]
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        others = np.flatnonzero(work[:, col])
        others = others[others != col]
        work[others] ^= work[col]
    return work[:, size:]


def build(n: int, r: int | None = None) -> ComponentCodeSpec:
    """
    Build a shortened extended Hamming code of length n.

    The lowest 2^m - n coordinate labels of the length-2^m code are removed. The parity
    positions are the r rightmost linearly independent columns, moved to the end.

    Args:
        n: Codeword length
        r: Parity bits; defaults to one more than the smallest m with 2^m >= n

    Returns:
        The component code spec

    Raises:
        InvalidArgumentError: If n < 4, 2^(r-1) < n or n cannot host r parity bits
    """
    if n < 4:
        raise InvalidArgumentError(f"component length must be at least 4, got {n}")
    if r is None:
        m = max((n - 1).bit_length(), 1)
    else:
        m = r - 1
        if m < 1 or 2**m < n:
            raise InvalidArgumentError(f"r={r} parity bits cannot label {n} coordinates")
    r = m + 1
    if n <= r:
        raise InvalidArgumentError(f"length {n} leaves no information bits with r={r}")

    shorten = 2**m - n
    columns = [label | (1 << m) for label in range(shorten, 2**m)]
    if gf2_rank(columns) != r:
        raise InvalidArgumentError(f"length {n} is too short for a full-rank check with r={r}")

    basis: dict[int, int] = {}
    pivots: list[int] = []
    for position in range(n - 1, -1, -1):
        row = columns[position]
        while row:
            top = row.bit_length() - 1
            if top not in basis:
                basis[top] = row
                pivots.append(position)
                break
            row ^= basis[top]
        if len(pivots) == r:
            break
    pivot_set = set(pivots)
    order = [p for p in range(n) if p not in pivot_set] + sorted(pivot_set)
    return ComponentCodeSpec(
        n=n,
        r=r,
        m=m,
        shorten=shorten,
        columns=tuple(columns[p] for p in order),
    )


class ExtendedHammingCode:
    """Encoder and syndrome decoder tables for one component code."""

    def __init__(self, spec: ComponentCodeSpec) -> None:
        """
        Precompute the parity generator and the syndrome lookup.

        Args:
            spec: Component code spec
        """
        self.spec = spec
        self.n = spec.n
        self.r = spec.r
        self.k = spec.k
        self.overall_bit = 1 << spec.m
        self.parity_check = spec.parity_check
        self.weights = (1 << np.arange(self.r, dtype=np.int64)).astype(np.int64)

        h_info = self.parity_check[:, : self.k]
        h_parity = self.parity_check[:, self.k :]
        self.parity_generator: NDArray[np.int32] = (
            (gf2_inverse(h_parity).astype(np.int32) @ h_info.astype(np.int32)) % 2
        ).astype(np.int32)
        self.position_of: dict[int, int] = {col: pos for pos, col in enumerate(spec.columns)}
        self.columns = np.asarray(spec.columns, dtype=np.int64)

    def parity(self, info: NDArray[np.uint8]) -> NDArray[np.uint8]:
        """Parity bits of one or more info words (last axis of length k)."""
        return ((info.astype(np.int32) @ self.parity_generator.T) % 2).astype(np.uint8)

    def encode(self, info: NDArray[np.uint8]) -> NDArray[np.uint8]:
        if info.shape[-1] != self.k:
            raise InvalidArgumentError(f"info length {info.shape[-1]} != {self.k}")
        return np.concatenate([info.astype(np.uint8), self.parity(info)], axis=-1)

    def syndromes(self, words: NDArray[np.uint8]) -> NDArray[np.int64]:
        """Integer syndromes of one or more words (last axis of length n)."""
        bits = (words.astype(np.int32) @ self.parity_check.T.astype(np.int32)) % 2
        return bits.astype(np.int64) @ self.weights

    def error_position(self, value: int) -> int | None:
        """Position to flip for a nonzero syndrome, or None if only detection is possible."""
        if not value & self.overall_bit:
            return None
        return self.position_of.get(value)

    def decode(self, value: int) -> DecodeOutcome:
        if value == 0:
            return DecodeOutcome(DecodeKind.NO_ERROR)
        position = self.error_position(value)
        if position is None:
            return DecodeOutcome(DecodeKind.DETECTED)
        return DecodeOutcome(DecodeKind.FLIP, position)


@lru_cache(maxsize=32)
def code_for(spec: ComponentCodeSpec) -> ExtendedHammingCode:
    """Cached code tables for a spec."""
    return ExtendedHammingCode(spec)


def encode_systematic(spec: ComponentCodeSpec, info: NDArray[np.uint8]) -> NDArray[np.uint8]:
    """
    Systematic encoding: info in the first n - r coordinates, parity in the last r.

    Raises:
        InvalidArgumentError: If the info length is not n - r
    """
    return code_for(spec).encode(np.asarray(info, dtype=np.uint8))


def syndrome(spec: ComponentCodeSpec, word: NDArray[np.uint8]) -> Syndrome:
    """
    Syndrome of a length-n word.

    Raises:
        InvalidArgumentError: If the word length is not n
    """
    word = np.asarray(word, dtype=np.uint8)
    if word.shape != (spec.n,):
        raise InvalidArgumentError(f"word shape {word.shape} != ({spec.n},)")
    return Syndrome(int(code_for(spec).syndromes(word)))


def bdd_decode(spec: ComponentCodeSpec, synd: Syndrome) -> DecodeOutcome:
    """
    Bounded-distance decoding with double-error detection.

    A flip is returned only when the overall-parity bit signals an odd-weight error and the
    syndrome equals a parity-check column; every other nonzero syndrome is detected.
    """
    return code_for(spec).decode(synd.value)
