"""Streaming recursive encoder and sliding-window syndrome-domain decoder.

Both sides exchange rectangles: uint8 arrays of shape (C*S/L, L*S/L) holding the L newest
blocks of every chain for one constraint period. Rectangle t < 0 is known zero padding.
"""

import logging
from enum import IntEnum
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from app.core.config import get_settings
from app.core.errors import InternalConsistencyError, InvalidArgumentError
from app.models.code import DecoderStats, HoscSpec
from app.services.construction import CodeLayout, layout_for
from app.services.hamming import ExtendedHammingCode, code_for

logger = logging.getLogger(__name__)

Schedule = Literal["oldest-first", "newest-first"]


def _require_component(spec: HoscSpec) -> ExtendedHammingCode:
    if spec.component is None:
        raise InvalidArgumentError("structure-only specs cannot encode or decode")
    return code_for(spec.component)


def rectangle_shape(spec: HoscSpec) -> tuple[int, int]:
    return spec.chains * spec.block_side, spec.L * spec.block_side


def info_shape(spec: HoscSpec) -> tuple[int, int]:
    """Information bits per rectangle: S - r leading columns of every row."""
    if spec.r is None:
        raise InvalidArgumentError("structure-only specs carry no information bits")
    return spec.chains * spec.block_side, spec.S - spec.r


def min_window(spec: HoscSpec) -> int:
    """Smallest window covering the ruler span: ceil(d_max / L) + 1."""
    return -(-spec.d_max // spec.L) + 1


class StreamEncoder:
    """Recursive encoder keeping the rectangles its next constraints reach back to."""

    def __init__(self, spec: HoscSpec) -> None:
        """
        Start from the all-zero history.

        Args:
            spec: Encodable spec

        Raises:
            InvalidArgumentError: If the spec has no component code
        """
        self.spec = spec
        self.code = _require_component(spec)
        self.layout: CodeLayout = layout_for(spec)
        self.ring_size = self.layout.back + 1
        self.ring = np.zeros((self.ring_size, *rectangle_shape(spec)), dtype=np.uint8)
        self.t = 0
        self.info_cols = spec.S - self.code.r

    @property
    def time(self) -> int:
        """Constraint time n = tL of the next rectangle."""
        return self.t * self.spec.L

    def encode_step(self, info: NDArray[np.uint8]) -> NDArray[np.uint8]:
        """
        Encode one rectangle.

        Args:
            info: C*(S/L)*(S-r) bits, flat or shaped (C*S/L, S-r)

        Returns:
            The coded rectangle

        Raises:
            InvalidArgumentError: If the info size is wrong
        """
        shape = info_shape(self.spec)
        info = np.asarray(info, dtype=np.uint8)
        if info.size != shape[0] * shape[1]:
            raise InvalidArgumentError(f"expected {shape[0] * shape[1]} info bits, got {info.size}")

        slot = self.t % self.ring_size
        rect = self.ring[slot]
        rect[:] = 0
        rect[:, : self.info_cols] = info.reshape(shape) & 1

        slots = (self.t + self.layout.col_rect_offset) % self.ring_size
        words = self.layout.gather_words(self.ring, slots)
        parity = self.code.parity(words[..., : self.code.k])
        rect[:, self.info_cols :] = parity.reshape(shape[0], self.code.r)
        self.t += 1
        return rect.copy()

    def terminate(self) -> list[NDArray[np.uint8]]:
        """Tail of ``scope`` rectangles with zero information and regular parity."""
        zeros = np.zeros(info_shape(self.spec), dtype=np.uint8)
        return [self.encode_step(zeros) for _ in range(self.layout.scope_rectangles)]


def init_encoder(spec: HoscSpec) -> StreamEncoder:
    return StreamEncoder(spec)


def encode_step(encoder: StreamEncoder, info: NDArray[np.uint8]) -> NDArray[np.uint8]:
    return encoder.encode_step(info)


class RectKind(IntEnum):
    """How much of a rectangle the decoder may change."""

    DATA = 0
    TAIL = 1
    FROZEN = 2
    PADDING = 3


class DecoderWindow:
    """Sliding window of W rectangles with one syndrome per active constraint.

    Constraint periods t_new - W + 1 .. t_new are active. Bits of older rectangles stay in the
    ring as read-only context for the active constraints.
    """

    def __init__(
        self,
        spec: HoscSpec,
        window: int,
        iterations: int = 3,
        schedule: Schedule | None = None,
        dirty_only: bool = True,
        check_syndromes: bool | None = None,
    ) -> None:
        """
        Prime the window with zero padding.

        Args:
            spec: Encodable spec
            window: W, at least ceil(d_max / L) + 1
            iterations: I, passes over the window per advance
            schedule: Constraint order within a pass; configured default if omitted
            dirty_only: Visit only constraints whose syndrome changed since their last visit
            check_syndromes: Recompute all syndromes after each advance (debug)

        Raises:
            InvalidArgumentError: If W is below the ruler span, I < 1 or the spec is not encodable
        """
        settings = get_settings()
        self.spec = spec
        self.code = _require_component(spec)
        self.layout = layout_for(spec)
        if window < min_window(spec):
            raise InvalidArgumentError(f"W={window} is below the minimum {min_window(spec)}")
        if iterations < 1:
            raise InvalidArgumentError(f"I must be positive, got {iterations}")
        self.W = window
        self.iterations = iterations
        self.schedule: Schedule = schedule or settings.schedule
        self.dirty_only = dirty_only
        self.check_syndromes = (
            settings.debug_syndrome_check if check_syndromes is None else check_syndromes
        )
        self.stats = DecoderStats()

        b, C, S = spec.block_side, spec.chains, spec.S  # noqa: N806
        self.ring_size = window + self.layout.back
        self.ring = np.zeros((self.ring_size, C * b, S), dtype=np.uint8)
        self.kinds = np.full(self.ring_size, RectKind.PADDING, dtype=np.int8)
        self.frozen_upto = np.full(self.ring_size, S, dtype=np.int64)
        self.syndromes = np.zeros((window, C, b), dtype=np.int64)
        self.dirty = np.zeros((window, C, b), dtype=bool)
        self.active = np.zeros(window, dtype=bool)
        self.t_new = -1

        perms = self.layout.perms
        inv_rows = np.stack([p.inv_row for p in perms], axis=-1)
        inv_cols = np.stack([p.inv_col for p in perms], axis=-1)
        self.member_rows = inv_rows
        self.member_cols = self.layout.member_col_base[:, None, None, :] + inv_cols[None]
        self.member_dt = self.layout.member_dt
        self.member_shift = np.array([0] + [1] * spec.M, dtype=np.int64)
        self.check_columns = self.code.columns

    @property
    def t_old(self) -> int:
        return self.t_new - self.W + 1

    def _frozen_for(self, kind: RectKind) -> int:
        if kind is RectKind.DATA:
            return 0
        if kind is RectKind.TAIL:
            return self.spec.S - self.code.r
        return self.spec.S

    def _push(self, rect: NDArray[np.uint8] | None, kind: RectKind) -> NDArray[np.uint8] | None:
        self.t_new += 1
        slot = self.t_new % self.ring_size
        period = self.t_new % self.W
        if rect is None:
            self.ring[slot] = 0
        else:
            if rect.shape != self.ring.shape[1:]:
                raise InvalidArgumentError(
                    f"rectangle shape {rect.shape} != {self.ring.shape[1:]}"
                )
            self.ring[slot] = rect & 1
        self.kinds[slot] = kind
        self.frozen_upto[slot] = self._frozen_for(kind)
        self.ring[slot][:, : self.frozen_upto[slot]] = 0

        if kind in (RectKind.DATA, RectKind.TAIL):
            words = self.layout.gather_words(self.ring, self._slots(self.t_new))
            self.syndromes[period] = self.code.syndromes(words)
            self.dirty[period] = True
            self.active[period] = True
        else:
            self.syndromes[period] = 0
            self.dirty[period] = False
            self.active[period] = False

        for _ in range(self.iterations):
            flips = self._pass()
            self.stats.iterations += 1
            if self.dirty_only and flips == 0 and not self.dirty.any():
                break
        if self.check_syndromes:
            self.verify_syndromes()
        self.stats.advances += 1

        out_slot = self.t_old % self.ring_size
        if self.t_old >= 0 and self.kinds[out_slot] == RectKind.DATA:
            return self.ring[out_slot].copy()
        return None

    def _slots(self, t: int) -> NDArray[np.int64]:
        return (t + self.layout.col_rect_offset) % self.ring_size

    def _pass(self) -> int:
        if not self.dirty_only:
            self.dirty[self.active] = True
        times = range(self.t_old, self.t_new + 1)
        if self.schedule == "newest-first":
            times = range(self.t_new, self.t_old - 1, -1)

        flips = 0
        for t in times:
            period = t % self.W
            if not self.active[period]:
                continue
            flat = self.dirty[period].reshape(-1)
            start = 0
            while True:
                pending = np.flatnonzero(flat[start:])
                if pending.size == 0:
                    break
                index = start + int(pending[0])
                start = index + 1
                flat[index] = False
                chain, row = divmod(index, self.spec.block_side)
                value = int(self.syndromes[period, chain, row])
                if value == 0:
                    continue
                position = self.code.error_position(value)
                if position is None:
                    self.stats.detected += 1
                    continue
                if self._flip(t, chain, row, position):
                    flips += 1
        return flips

    def _flip(self, t: int, chain: int, row: int, column: int) -> bool:
        layout = self.layout
        target = t + int(layout.col_rect_offset[column])
        cell_row = int(layout.gather_rows[chain, row, column])
        cell_col = int(layout.gather_cols[0, row, column])
        slot = target % self.ring_size
        if target < self.t_old or cell_col < self.frozen_upto[slot]:
            self.stats.refused += 1
            return False

        self.ring[slot, cell_row, cell_col] ^= 1
        self.stats.flips += 1

        b, C = self.spec.block_side, self.spec.chains  # noqa: N806
        src_chain, x = divmod(cell_row, b)
        u, y = divmod(cell_col, b)
        for k in range(self.spec.M + 1):
            tc = target + int(self.member_dt[u, k])
            if tc < self.t_old or tc > self.t_new:
                continue
            period = tc % self.W
            if not self.active[period]:
                continue
            c = (src_chain + int(self.member_shift[k])) % C
            rho = int(self.member_rows[x, y, k])
            self.syndromes[period, c, rho] ^= int(self.check_columns[self.member_cols[u, x, y, k]])
            self.dirty[period, c, rho] = True
        return True

    def verify_syndromes(self) -> None:
        """
        Recompute every active syndrome from the window bits.

        Raises:
            InternalConsistencyError: If an incrementally kept syndrome is stale
        """
        for t in range(max(self.t_old, 0), self.t_new + 1):
            period = t % self.W
            if not self.active[period]:
                continue
            fresh = self.code.syndromes(self.layout.gather_words(self.ring, self._slots(t)))
            if not np.array_equal(fresh, self.syndromes[period]):
                raise InternalConsistencyError(f"syndromes of period {t} are stale")

    def decode_advance(self, incoming: NDArray[np.uint8]) -> NDArray[np.uint8] | None:
        """
        Shift in a received rectangle, run I passes and release the oldest rectangle.

        Args:
            incoming: Received rectangle

        Returns:
            The decided rectangle leaving the window, or None while padding drains

        Raises:
            InvalidArgumentError: If the rectangle shape is wrong
        """
        return self._push(np.asarray(incoming, dtype=np.uint8), RectKind.DATA)

    def flush(self, tail: list[NDArray[np.uint8]] | None = None) -> list[NDArray[np.uint8]]:
        """
        Drain the window after the last data rectangle.

        Received tail rectangles enter with their information bits frozen to zero; the rest
        of the W - 1 pushes are fully frozen zero rectangles.

        Args:
            tail: Received termination rectangles from the encoder, if any

        Returns:
            The remaining decided data rectangles
        """
        out: list[NDArray[np.uint8]] = []
        pushes = 0
        for rect in tail or []:
            decided = self._push(np.asarray(rect, dtype=np.uint8), RectKind.TAIL)
            pushes += 1
            if decided is not None:
                out.append(decided)
        while pushes < self.W - 1:
            decided = self._push(None, RectKind.FROZEN)
            pushes += 1
            if decided is not None:
                out.append(decided)
        logger.debug(f"flushed {len(out)} rectangles, stats {self.stats}")
        return out


def init_decoder(
    spec: HoscSpec,
    window: int,
    iterations: int = 3,
    schedule: Schedule | None = None,
    dirty_only: bool = True,
) -> DecoderWindow:
    return DecoderWindow(spec, window, iterations, schedule, dirty_only)


def decode_advance(window: DecoderWindow, incoming: NDArray[np.uint8]) -> NDArray[np.uint8] | None:
    return window.decode_advance(incoming)


def flush(
    window: DecoderWindow,
    tail: list[NDArray[np.uint8]] | None = None,
) -> list[NDArray[np.uint8]]:
    return window.flush(tail)
