"""Binary symmetric channel and counter-based random streams."""

import numpy as np
from numpy.typing import NDArray

from app.core.errors import InvalidArgumentError


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """
    Philox generator for the substream ``key`` of ``seed``.

    Args:
        seed: 64-bit master seed
        key: Substream path, e.g. (point index, stream index, round)

    Returns:
        An independent, platform-stable generator
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def bsc(bits: NDArray[np.uint8], p: float, rng: np.random.Generator) -> NDArray[np.uint8]:
    """
    Flip each bit independently with probability p.

    Args:
        bits: Array of 0/1 values
        p: Crossover probability in [0, 0.5]
        rng: Random generator

    Returns:
        The received bits, same shape as the input

    Raises:
        InvalidArgumentError: If p is outside [0, 0.5]
    """
    if not 0.0 <= p <= 0.5:
        raise InvalidArgumentError(f"crossover probability {p} outside [0, 0.5]")
    bits = np.asarray(bits, dtype=np.uint8)
    if p == 0.0:
        return bits.copy()
    flips = rng.random(bits.shape) < p
    return bits ^ flips.astype(np.uint8)
