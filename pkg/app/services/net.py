"""Construction and verification of (M+1, m)-nets given by 2x2 matrices over Z_m.

Cells follow the row-vector convention: matrix A = [[a, b], [c, d]] sends (i, j) to
(i*a + j*c, i*b + j*d) mod m, and the permuted block has entry B[pi(i, j)] at (i, j).
"""

import logging
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from app.core.errors import ConstraintViolationError, InvalidArgumentError
from app.models.net import IDENTITY, Matrix, NetSpec, determinant
from app.services.algebra import is_invertible_mod, lpf

logger = logging.getLogger(__name__)


class GridPermutation:
    """Bijection of the m x m grid induced by one net matrix."""

    def __init__(self, matrix: Matrix, m: int) -> None:
        """
        Tabulate the permutation and its inverse.

        Args:
            matrix: Row-major (a, b, c, d), invertible mod m
            m: Grid side

        Raises:
            InvalidArgumentError: If the matrix is singular mod m
        """
        if not is_invertible_mod(determinant(matrix, m), m):
            raise InvalidArgumentError(f"matrix {matrix} is not invertible mod {m}")
        a, b, c, d = matrix
        i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        self.matrix = matrix
        self.m = m
        self.src_row: NDArray[np.int64] = (i * a + j * c) % m
        self.src_col: NDArray[np.int64] = (i * b + j * d) % m

        self.inv_row: NDArray[np.int64] = np.empty((m, m), dtype=np.int64)
        self.inv_col: NDArray[np.int64] = np.empty((m, m), dtype=np.int64)
        self.inv_row[self.src_row, self.src_col] = i
        self.inv_col[self.src_row, self.src_col] = j

    def __call__(self, i: int, j: int) -> tuple[int, int]:
        return int(self.src_row[i, j]), int(self.src_col[i, j])

    @property
    def is_bijection(self) -> bool:
        cells = self.src_row * self.m + self.src_col
        return np.unique(cells).size == self.m * self.m

    def row_cells(self) -> NDArray[np.int64]:
        """Flattened source cell of every (row, column) of the permuted block."""
        return self.src_row * self.m + self.src_col


def apply(perm: GridPermutation, block: NDArray[np.uint8]) -> NDArray[np.uint8]:
    """
    Permute a block: output entry (i, j) is the input entry at perm(i, j).

    Args:
        perm: Grid permutation
        block: m x m array

    Returns:
        The permuted block

    Raises:
        InvalidArgumentError: If the block is not m x m
    """
    if block.shape != (perm.m, perm.m):
        raise InvalidArgumentError(f"block shape {block.shape} does not match grid side {perm.m}")
    return block[perm.src_row, perm.src_col]


@lru_cache(maxsize=64)
def grid_permutations(net: NetSpec) -> tuple[GridPermutation, ...]:
    """Grid permutations of every matrix of the net, in order."""
    return tuple(GridPermutation(matrix, net.block_side) for matrix in net.matrices)


def check_pair(first: Matrix, second: Matrix, m: int) -> bool:
    """
    Pairwise net condition: c*d' - d*c' is a unit of Z_m.

    Args:
        first: Matrix (a, b, c, d)
        second: Matrix (a', b', c', d')
        m: Modulus

    Returns:
        True iff the two matrices can belong to the same net

    Raises:
        InvalidArgumentError: If either matrix is singular mod m
    """
    for matrix in (first, second):
        if not is_invertible_mod(determinant(matrix, m), m):
            raise InvalidArgumentError(f"matrix {matrix} is not invertible mod {m}")
    _, _, c, d = first
    _, _, c2, d2 = second
    return is_invertible_mod(c * d2 - d * c2, m)


def check_all_pairs(net: NetSpec) -> bool:
    """True iff check_pair holds for every pair of distinct net matrices."""
    matrices = net.matrices
    return all(
        check_pair(matrices[k1], matrices[k2], net.block_side)
        for k1 in range(len(matrices))
        for k2 in range(k1 + 1, len(matrices))
    )


def _check_admissible(M: int, m: int) -> None:  # noqa: N803
    if M < 1:
        raise InvalidArgumentError(f"M must be positive, got {M}")
    if m < 1:
        raise InvalidArgumentError(f"block side must be positive, got {m}")
    if m >= 2 and M > lpf(m):
        raise ConstraintViolationError(f"M={M} exceeds lpf({m})={lpf(m)}")


def example_shift_net(M: int, m: int) -> NetSpec:  # noqa: N803
    """
    Identity plus the matrices [[0, 1], [1, z]] for z = 0..M-1.

    z = 0 is the transpose; z = 1 sends (i, j) to (j, i + j).

    Raises:
        ConstraintViolationError: If M > lpf(m)
    """
    _check_admissible(M, m)
    matrices = [IDENTITY] + [(0, 1, 1, z % m) for z in range(M)]
    return NetSpec(block_side=m, matrices=tuple(tuple(x % m for x in a) for a in matrices))


def example_involution_net(M: int, m: int) -> NetSpec:  # noqa: N803
    """
    Identity plus the involutions [[-z, 1 - z^2], [1, z]] for z = 0..M-1.

    Raises:
        ConstraintViolationError: If M > lpf(m)
    """
    _check_admissible(M, m)
    matrices = [IDENTITY] + [(-z, 1 - z * z, 1, z) for z in range(M)]
    return NetSpec(block_side=m, matrices=tuple(tuple(x % m for x in a) for a in matrices))


def verify_net(net: NetSpec) -> bool:
    """
    Brute-force net check.

    For every pair of distinct permutations and every pair of rows, the source cells of the
    two permuted rows must meet in exactly one grid cell.

    Args:
        net: Candidate net

    Returns:
        True iff all checks pass
    """
    m = net.block_side
    perms = grid_permutations(net)
    if not all(p.is_bijection for p in perms):
        return False

    incidence = []
    for perm in perms:
        rows = np.zeros((m, m * m), dtype=np.int64)
        rows[np.repeat(np.arange(m), m), perm.row_cells().ravel()] = 1
        incidence.append(rows)

    for k1 in range(len(perms)):
        for k2 in range(k1 + 1, len(perms)):
            overlap = incidence[k1] @ incidence[k2].T
            if not np.all(overlap == 1):
                logger.debug(f"net rows of permutations {k1} and {k2} overlap: {overlap.max()}")
                return False
    return True
