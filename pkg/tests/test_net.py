"""Tests for grid permutations and (M+1, m)-nets."""

import numpy as np
import pytest

from app.core.errors import ConstraintViolationError, InvalidArgumentError
from app.models.net import IDENTITY, NetSpec
from app.services.algebra import lpf
from app.services.net import (
    GridPermutation,
    apply,
    check_all_pairs,
    check_pair,
    example_involution_net,
    example_shift_net,
    grid_permutations,
    verify_net,
)

_FAMILIES = (example_shift_net, example_involution_net)


def test_transpose_and_shear() -> None:
    """[[0,1],[1,0]] transposes; [[0,1],[1,1]] reads entry (j, i+j)."""
    block = np.arange(25, dtype=np.uint8).reshape(5, 5)
    transpose = GridPermutation((0, 1, 1, 0), 5)
    assert np.array_equal(apply(transpose, block), block.T)

    shear = GridPermutation((0, 1, 1, 1), 5)
    permuted = apply(shear, block)
    for i in range(5):
        for j in range(5):
            assert permuted[i, j] == block[j, (i + j) % 5]


def test_permutation_inverse_tables() -> None:
    """Inverse tables undo the forward map."""
    perm = GridPermutation((2, 1, 1, 1), 7)
    for i in range(7):
        for j in range(7):
            r, c = perm(i, j)
            assert (perm.inv_row[r, c], perm.inv_col[r, c]) == (i, j)
    assert perm.is_bijection


def test_singular_matrix_rejected() -> None:
    """det = 2 has no inverse mod 4."""
    with pytest.raises(InvalidArgumentError):
        GridPermutation((1, 1, 1, 3), 4)
    with pytest.raises(InvalidArgumentError):
        check_pair(IDENTITY, (2, 0, 0, 1), 4)


def test_apply_checks_block_shape() -> None:
    """The block must be m x m."""
    with pytest.raises(InvalidArgumentError):
        apply(GridPermutation(IDENTITY, 4), np.zeros((4, 5), dtype=np.uint8))


def test_net_spec_requires_identity_first() -> None:
    """The first matrix is the identity."""
    with pytest.raises(InvalidArgumentError):
        NetSpec(block_side=5, matrices=((0, 1, 1, 0), IDENTITY))


@pytest.mark.parametrize("family", _FAMILIES)
def test_example_families_are_nets(family) -> None:  # noqa: ANN001
    """Both example families satisfy the pairwise and the brute-force check."""
    for m, M in [(5, 5), (7, 3), (8, 2), (9, 3), (16, 2)]:  # noqa: N806
        net = family(M, m)
        assert net.M == M
        assert check_all_pairs(net)
        assert verify_net(net)


def test_pairwise_check_matches_brute_force() -> None:
    """For every m up to 30 and every admissible M the two checks agree on both families."""
    for m in range(1, 31):
        top = 3 if m == 1 else lpf(m)
        for M in range(1, top + 1):  # noqa: N806
            for family in _FAMILIES:
                net = family(M, m)
                assert check_all_pairs(net) is verify_net(net) is True


def test_non_nets_fail_both_checks() -> None:
    """Matrices whose cross term is a zero divisor do not form a net."""
    bad = NetSpec(block_side=4, matrices=(IDENTITY, (0, 1, 1, 0), (0, 1, 1, 1), (0, 1, 1, 2)))
    assert not check_all_pairs(bad)
    assert not verify_net(bad)

    repeated = NetSpec(block_side=5, matrices=(IDENTITY, IDENTITY))
    assert not check_all_pairs(repeated)
    assert not verify_net(repeated)


def test_pairwise_check_against_random_matrices(rng: np.random.Generator) -> None:
    """
    Random invertible pairs: the algebraic test agrees with counting row intersections.

    Args:
        rng: Seeded generator
    """
    for _ in range(200):
        m = int(rng.integers(2, 13))
        pair = []
        while len(pair) < 2:
            matrix = tuple(int(x) for x in rng.integers(0, m, size=4))
            try:
                GridPermutation(matrix, m)  # type: ignore[arg-type]
            except InvalidArgumentError:
                continue
            pair.append(matrix)
        net = NetSpec(block_side=m, matrices=(IDENTITY, *pair))
        expected = check_all_pairs(net)
        assert verify_net(net) is expected


def test_shift_net_rejects_too_many_permutations() -> None:
    """M is limited by the least prime factor of m."""
    with pytest.raises(ConstraintViolationError):
        example_shift_net(3, 10)
    with pytest.raises(ConstraintViolationError):
        example_involution_net(4, 9)


def test_grid_permutations_cached() -> None:
    """Equal nets share one tabulation."""
    assert grid_permutations(example_shift_net(2, 8)) is grid_permutations(example_shift_net(2, 8))
