"""Tests for the shortened extended Hamming component code."""

import itertools

import numpy as np
import pytest

from app.core.errors import InvalidArgumentError
from app.models.code import DecodeKind, Syndrome
from app.services import hamming


@pytest.mark.parametrize(("n", "r"), [(8, 4), (12, 5), (16, 5), (24, 6), (72, 8)])
def test_default_parity_bits(n: int, r: int) -> None:
    """r is one more than the smallest m with 2^m >= n."""
    spec = hamming.build(n)
    assert spec.r == r
    assert spec.k == n - r
    assert len(spec.columns) == n


def test_explicit_parity_bits() -> None:
    """An explicit r must match what the shortened labels can support."""
    assert hamming.build(12, r=5) == hamming.build(12)
    with pytest.raises(InvalidArgumentError):
        hamming.build(16, r=6)


@pytest.mark.parametrize(("n", "r"), [(3, None), (5, 3), (4, 4), (6, 5)])
def test_rejects_impossible_lengths(n: int, r: int | None) -> None:
    """Too short, too few labels, no information bits or a rank-deficient check."""
    with pytest.raises(InvalidArgumentError):
        hamming.build(n, r)


@pytest.mark.parametrize("n", [8, 12, 16, 24])
def test_columns_distinct_with_overall_parity(n: int) -> None:
    """Distinct odd-weight columns give minimum distance at least four."""
    spec = hamming.build(n)
    assert len(set(spec.columns)) == n
    assert all(col >> spec.m & 1 for col in spec.columns)
    assert hamming.gf2_rank(list(spec.columns)) == spec.r


@pytest.mark.parametrize("n", [8, 12, 16, 24])
def test_encode_is_systematic_with_zero_syndrome(n: int, rng: np.random.Generator) -> None:
    """
    Info occupies the first k coordinates and codewords have zero syndrome.

    Args:
        n: Code length
        rng: Seeded generator
    """
    spec = hamming.build(n)
    for _ in range(50):
        info = rng.integers(0, 2, size=spec.k, dtype=np.uint8)
        word = hamming.encode_systematic(spec, info)
        assert np.array_equal(word[: spec.k], info)
        assert hamming.syndrome(spec, word).value == 0
        assert hamming.bdd_decode(spec, hamming.syndrome(spec, word)).kind is DecodeKind.NO_ERROR


@pytest.mark.slow
@pytest.mark.parametrize("n", [72, 144, 216])
def test_encode_zero_syndrome_at_production_sizes(n: int) -> None:
    """
    A hundred thousand random info words encode to codewords.

    Args:
        n: Code length
    """
    spec = hamming.build(n)
    infos = np.random.default_rng(n).integers(0, 2, size=(100_000, spec.k), dtype=np.uint8)
    words = hamming.encode_systematic(spec, infos)
    assert words.shape == (100_000, n)
    assert np.array_equal(words[:, : spec.k], infos)
    assert not hamming.code_for(spec).syndromes(words).any()
    for word in words[:: 10_000]:
        assert hamming.syndrome(spec, word).value == 0


@pytest.mark.parametrize("n", [8, 12, 16, 24])
def test_single_errors_corrected_double_errors_detected(
    n: int,
    rng: np.random.Generator,
) -> None:
    """
    Every weight-1 pattern is located; every weight-2 pattern is detected and never flipped.

    Args:
        n: Code length
        rng: Seeded generator
    """
    spec = hamming.build(n)
    word = hamming.encode_systematic(spec, rng.integers(0, 2, size=spec.k, dtype=np.uint8))

    for position in range(n):
        received = word.copy()
        received[position] ^= 1
        outcome = hamming.bdd_decode(spec, hamming.syndrome(spec, received))
        assert outcome.kind is DecodeKind.FLIP
        assert outcome.position == position

    for first, second in itertools.combinations(range(n), 2):
        received = word.copy()
        received[[first, second]] ^= 1
        outcome = hamming.bdd_decode(spec, hamming.syndrome(spec, received))
        assert outcome.kind is DecodeKind.DETECTED
        assert outcome.position is None


def test_unmatched_odd_syndrome_is_detected() -> None:
    """An odd-parity syndrome that is not a column of the shortened code is only detected."""
    spec = hamming.build(12)
    missing = next(v for v in range(1 << spec.r) if v >> spec.m & 1 and v not in spec.columns)
    assert hamming.bdd_decode(spec, Syndrome(missing)).kind is DecodeKind.DETECTED


def test_small_code_minimum_weight() -> None:
    """The (16, 11) code has minimum nonzero weight four."""
    spec = hamming.build(16)
    weights = [
        int(hamming.encode_systematic(spec, np.array(bits, dtype=np.uint8)).sum())
        for bits in itertools.product((0, 1), repeat=spec.k)
        if any(bits)
    ]
    assert min(weights) == 4


def test_shape_errors() -> None:
    """Wrong word and info lengths are rejected."""
    spec = hamming.build(8)
    with pytest.raises(InvalidArgumentError):
        hamming.syndrome(spec, np.zeros(7, dtype=np.uint8))
    with pytest.raises(InvalidArgumentError):
        hamming.encode_systematic(spec, np.zeros(5, dtype=np.uint8))


def test_gf2_inverse_round_trip(rng: np.random.Generator) -> None:
    """
    A @ inv(A) is the identity over GF(2); singular matrices are rejected.

    Args:
        rng: Seeded generator
    """
    found = 0
    while found < 10:
        matrix = rng.integers(0, 2, size=(6, 6), dtype=np.uint8)
        if hamming.gf2_rank([int("".join(map(str, row)), 2) for row in matrix]) < 6:
            continue
        inverse = hamming.gf2_inverse(matrix)
        product = (matrix.astype(np.int32) @ inverse.astype(np.int32)) % 2
        assert np.array_equal(product, np.eye(6, dtype=np.int32))
        found += 1
    with pytest.raises(InvalidArgumentError):
        hamming.gf2_inverse(np.ones((3, 3), dtype=np.uint8))
