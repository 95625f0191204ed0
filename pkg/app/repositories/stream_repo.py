"""Bit-packed rectangle streams.

A stream is a 24-byte header followed by rectangles. The header holds the magic
``HOSCSTRM`` and four little-endian uint32 values: rows, columns, the number of trailing
termination rectangles and a reserved zero. Each rectangle is its bits in row-major
order, packed LSB first into little-endian 64-bit words and zero padded to a whole word.
"""

import logging
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np
from numpy.typing import NDArray

from app.core.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

MAGIC = b"HOSCSTRM"
_HEADER = struct.Struct("<8sIIII")


def packed_size(shape: tuple[int, int]) -> int:
    """Bytes per packed rectangle."""
    bits = shape[0] * shape[1]
    return 8 * -(-bits // 64)


def pack_rectangle(rect: NDArray[np.uint8]) -> bytes:
    bits = np.asarray(rect, dtype=np.uint8).reshape(-1) & 1
    padded = np.zeros(packed_size(rect.shape) * 8, dtype=np.uint8)
    padded[: bits.size] = bits
    return np.packbits(padded, bitorder="little").tobytes()


def unpack_rectangle(data: bytes, shape: tuple[int, int]) -> NDArray[np.uint8]:
    """
    Inverse of :func:`pack_rectangle`.

    Raises:
        InvalidArgumentError: If ``data`` is not exactly one packed rectangle
    """
    if len(data) != packed_size(shape):
        raise InvalidArgumentError(f"expected {packed_size(shape)} bytes, got {len(data)}")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    return bits[: shape[0] * shape[1]].reshape(shape)


class StreamRepository:
    """Reads and writes packed rectangle streams on binary handles or files."""

    def __init__(self, shape: tuple[int, int]) -> None:
        """
        Initialize the repository.

        Args:
            shape: Rectangle shape (rows, columns) of every stream handled
        """
        self.shape = shape
        self.record = packed_size(shape)

    def write(
        self,
        handle: BinaryIO,
        rects: list[NDArray[np.uint8]],
        tail: list[NDArray[np.uint8]] | None = None,
    ) -> int:
        """
        Write a stream.

        Args:
            handle: Binary output
            rects: Data rectangles
            tail: Termination rectangles written after the data

        Returns:
            Number of rectangles written

        Raises:
            InvalidArgumentError: If a rectangle has the wrong shape
        """
        tail = tail or []
        handle.write(_HEADER.pack(MAGIC, self.shape[0], self.shape[1], len(tail), 0))
        for rect in [*rects, *tail]:
            if rect.shape != self.shape:
                raise InvalidArgumentError(f"rectangle shape {rect.shape} != {self.shape}")
            handle.write(pack_rectangle(rect))
        return len(rects) + len(tail)

    def read(
        self,
        handle: BinaryIO,
    ) -> tuple[list[NDArray[np.uint8]], list[NDArray[np.uint8]]]:
        """
        Read a whole stream.

        Args:
            handle: Binary input

        Returns:
            (data rectangles, termination rectangles)

        Raises:
            InvalidArgumentError: On a bad header, a shape mismatch or a truncated record
        """
        header = handle.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise InvalidArgumentError("stream is shorter than its header")
        magic, rows, cols, tail_count, _ = _HEADER.unpack(header)
        if magic != MAGIC:
            raise InvalidArgumentError("not a rectangle stream")
        if (rows, cols) != self.shape:
            raise InvalidArgumentError(
                f"stream holds {rows}x{cols} rectangles, expected {self.shape}"
            )

        rects = []
        while chunk := handle.read(self.record):
            if len(chunk) != self.record:
                raise InvalidArgumentError("stream ends inside a rectangle")
            rects.append(unpack_rectangle(chunk, self.shape))
        if tail_count > len(rects):
            raise InvalidArgumentError(f"stream announces {tail_count} tail rectangles")
        split = len(rects) - tail_count
        logger.debug(f"read {split} data and {tail_count} tail rectangles")
        return rects[:split], rects[split:]

    def save(
        self,
        path: Path | str,
        rects: list[NDArray[np.uint8]],
        tail: list[NDArray[np.uint8]] | None = None,
    ) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("wb") as handle:
            self.write(handle, rects, tail)
        return target

    def load(self, path: Path | str) -> tuple[list[NDArray[np.uint8]], list[NDArray[np.uint8]]]:
        with Path(path).open("rb") as handle:
            return self.read(handle)
