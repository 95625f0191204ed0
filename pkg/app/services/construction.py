"""Assembly of higher-order staircase codes and their position/constraint incidence.

Block B_m of chain c sits in rectangle t = (m + L - 1) // L at slot u = m - (tL - L + 1),
so rectangle t carries the L newest blocks at constraint time n = tL. Codeword columns run
oldest delay first; the last S columns are the row of the current rectangle.
"""

import logging
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import NDArray

from app.core.errors import InternalConsistencyError, InvalidArgumentError
from app.models.code import ConstraintId, HoscSpec, Membership, PositionRef, StructureReport
from app.models.dts import DifferenceTriangleSet
from app.models.net import NetSpec
from app.services import dts as dts_service
from app.services import hamming
from app.services.net import GridPermutation, grid_permutations, verify_net

logger = logging.getLogger(__name__)

_MAX_REPORTED = 20


def combined_ruler(dts: DifferenceTriangleSet) -> list[tuple[int, int, int]]:
    """
    Sorted delays L*d_k^(l) + l with their (ruler l, mark k).

    Raises:
        InternalConsistencyError: If two delays coincide
    """
    L = dts.L  # noqa: N806
    entries = sorted(
        (L * mark + ell, ell, k)
        for ell, ruler in enumerate(dts.rulers)
        for k, mark in enumerate(ruler.marks)
    )
    delays = [d for d, _, _ in entries]
    if len(set(delays)) != len(delays):
        raise InternalConsistencyError(f"combined ruler {delays} has a repeated delay")
    return entries


def build_spec(
    L: int,  # noqa: N803
    M: int,  # noqa: N803
    block_side: int,
    chains: int,
    dts: DifferenceTriangleSet,
    net: NetSpec,
    r: int | None = None,
    structure_only: bool = False,
    validate: bool = True,
) -> HoscSpec:
    """
    Resolve a higher-order staircase code.

    Args:
        L: Rulers in the DTS
        M: Ruler order minus one
        block_side: S/L
        chains: Number of circularly chained copies C
        dts: Normalized (L, M)-DTS
        net: (M+1, S/L)-net with the identity first
        r: Component parity bits; the smallest extended Hamming code by default
        structure_only: Skip the component code (no encoding or decoding possible)
        validate: Check the DTS property and the net; disable only to study broken inputs

    Returns:
        The resolved spec

    Raises:
        InvalidArgumentError: On parameter mismatches, an unverified net or r >= S
        NotADtsError: If validation finds a repeated difference
        InternalConsistencyError: If the combined ruler is inconsistent
    """
    if chains < 1:
        raise InvalidArgumentError(f"chain count must be positive, got {chains}")
    if dts.L != L or dts.M != M:
        raise InvalidArgumentError(f"DTS is ({dts.L},{dts.M}), expected ({L},{M})")
    if net.M != M or net.block_side != block_side:
        raise InvalidArgumentError(
            f"net is ({net.M + 1},{net.block_side}), expected ({M + 1},{block_side})"
        )
    if not dts.is_normalized:
        raise InvalidArgumentError(f"DTS {dts} is not normalized")
    if validate:
        dts = dts_service.validate(dts)
        if not verify_net(net):
            raise InvalidArgumentError(f"{net} is not a net")

    entries = combined_ruler(dts)
    newest = entries[:L]
    if [d for d, _, _ in newest] != list(range(L)) or any(k != 0 for _, _, k in newest):
        raise InternalConsistencyError("the L newest delays must be 0..L-1 and unpermuted")

    component = None
    parity_bits = None
    if not structure_only:
        component = hamming.build((M + 1) * L * block_side, r)
        if component.r >= L * block_side:
            raise InvalidArgumentError(
                f"r={component.r} parity bits do not fit in S={L * block_side} columns"
            )
        parity_bits = component.r

    spec = HoscSpec(
        L=L,
        M=M,
        block_side=block_side,
        chains=chains,
        r=parity_bits,
        dts=dts,
        net=net,
        component=component,
        combined_ruler=tuple(d for d, _, _ in entries),
        perm_assignment=tuple(k for _, _, k in entries),
        ruler_of_delay=tuple(ell for _, ell, _ in entries),
    )
    logger.debug(f"built spec L={L} M={M} S/L={block_side} C={chains} delays={spec.combined_ruler}")
    return spec


def named_family(spec: HoscSpec) -> str:
    """Classical code family recovered by the parameters, if any."""
    L, M, b, C = spec.L, spec.M, spec.block_side, spec.chains  # noqa: N806
    if b == 1 and M == 1 and C == 1:
        return "continuously interleaved"
    if L == 1 and M == 1 and C == 1:
        return "staircase"
    if L == 1 and C == 1:
        return "generalized staircase"
    if M == 1 and C == 1:
        return "tiled diagonal zipper"
    if M == 1 and C == 2:
        return "OFEC-like"
    if M == 1:
        return "multiply-chained zipper"
    return "higher-order staircase"


class CodeLayout:
    """Index tables that place codeword columns and block cells into the rectangle stream."""

    def __init__(self, spec: HoscSpec) -> None:
        """
        Tabulate the layout.

        Args:
            spec: Resolved code spec
        """
        self.spec = spec
        self.L = spec.L
        self.M = spec.M
        self.b = spec.block_side
        self.C = spec.chains
        self.K = spec.delays
        self.n = spec.n
        self.perms: tuple[GridPermutation, ...] = grid_permutations(spec.net)

        b, K = self.b, self.K  # noqa: N806
        slot = np.arange(self.n) // b
        within = np.arange(self.n) % b
        kprime = K - 1 - slot
        delay = np.asarray(spec.combined_ruler, dtype=np.int64)[kprime]
        perm_of = np.asarray(spec.perm_assignment, dtype=np.int64)[kprime]

        self.col_delay: NDArray[np.int64] = delay
        self.col_prev_chain: NDArray[np.bool_] = kprime >= self.L
        self.col_rect_offset: NDArray[np.int64] = (self.L - 1 - delay) // self.L
        self.col_slot_u: NDArray[np.int64] = (self.L - 1 - delay) % self.L

        src_row = np.empty((b, self.n), dtype=np.int64)
        src_col = np.empty((b, self.n), dtype=np.int64)
        for col in range(self.n):
            perm = self.perms[perm_of[col]]
            src_row[:, col] = perm.src_row[:, within[col]]
            src_col[:, col] = perm.src_col[:, within[col]]
        self.col_src_row = src_row
        self.col_src_col = src_col

        # Gather tables for the rectangle stream, shape (C, b, n) after broadcasting.
        chain = np.arange(self.C)[:, None, None]
        source_chain = (chain - self.col_prev_chain[None, None, :].astype(np.int64)) % self.C
        self.gather_rows: NDArray[np.int64] = source_chain * b + src_row[None, :, :]
        self.gather_cols: NDArray[np.int64] = (
            self.col_slot_u[None, :] * b + src_col
        )[None, :, :]

        # Memberships by rectangle slot u and mark k.
        self.kprime_of: dict[tuple[int, int], int] = {
            (ell, k): kp
            for kp, (ell, k) in enumerate(zip(spec.ruler_of_delay, spec.perm_assignment))
        }
        self.member_dt = np.empty((self.L, self.M + 1), dtype=np.int64)
        self.member_col_base = np.empty((self.L, self.M + 1), dtype=np.int64)
        for u in range(self.L):
            ell = self.L - 1 - u
            for k in range(self.M + 1):
                self.member_dt[u, k] = spec.dts.rulers[ell].marks[k]
                self.member_col_base[u, k] = (K - 1 - self.kprime_of[(ell, k)]) * b

    @cached_property
    def back(self) -> int:
        """Rectangles before the current one that a constraint can reach."""
        return -int(self.col_rect_offset.min())

    @cached_property
    def scope_rectangles(self) -> int:
        """Constraint periods a block stays active: the DTS scope."""
        return int(self.member_dt.max())

    def gather_words(self, rects: NDArray[np.uint8], slots: NDArray[np.int64]) -> NDArray[np.uint8]:
        """
        Codewords of all C*b constraints of one time step.

        Args:
            rects: Ring of rectangles, shape (R, C*b, L*b)
            slots: Ring slot of each codeword column, shape (n,)

        Returns:
            Words of shape (C, b, n)
        """
        return rects[slots[None, None, :], self.gather_rows, self.gather_cols]

    def cell_memberships(self, u: int, x: int, y: int) -> list[tuple[int, int, int, int]]:
        """
        Constraints containing cell (x, y) of the slot-u block of a rectangle.

        Returns:
            (rectangle offset, chain shift, row, column) for each mark k
        """
        out = []
        for k in range(self.M + 1):
            perm = self.perms[k]
            rho = int(perm.inv_row[x, y])
            j = int(perm.inv_col[x, y])
            column = int(self.member_col_base[u, k]) + j
            out.append((int(self.member_dt[u, k]), 0 if k == 0 else 1, rho, column))
        return out


@lru_cache(maxsize=16)
def layout_for(spec: HoscSpec) -> CodeLayout:
    """Cached layout tables."""
    return CodeLayout(spec)


def rectangle_of_block(spec: HoscSpec, block: int) -> tuple[int, int]:
    """(rectangle t, slot u) holding block B_block."""
    t = (block + spec.L - 1) // spec.L
    return t, block - (t * spec.L - spec.L + 1)


def constraint_members(spec: HoscSpec, cid: ConstraintId) -> list[Membership]:
    """
    Positions of one component codeword, oldest column first.

    Args:
        spec: Resolved spec
        cid: Constraint (chain, time n in L*Z, row)

    Returns:
        The (M+1)S memberships in column order

    Raises:
        InvalidArgumentError: If the constraint is outside the spec
    """
    if cid.time % spec.L or not 0 <= cid.chain < spec.chains or not 0 <= cid.row < spec.block_side:
        raise InvalidArgumentError(f"{cid} is not a constraint of this spec")
    layout = layout_for(spec)
    members = []
    for col in range(spec.n):
        chain = (cid.chain - int(layout.col_prev_chain[col])) % spec.chains
        block = cid.time - int(layout.col_delay[col])
        position = PositionRef(
            chain,
            block,
            int(layout.col_src_row[cid.row, col]),
            int(layout.col_src_col[cid.row, col]),
        )
        members.append(Membership(cid, position, col))
    return members


def memberships(spec: HoscSpec, pos: PositionRef) -> list[Membership]:
    """
    The M+1 constraints protecting a position, in order of the mark index k.

    Raises:
        InvalidArgumentError: If the position is outside the spec
    """
    b = spec.block_side
    if not 0 <= pos.chain < spec.chains or not (0 <= pos.i < b and 0 <= pos.j < b):
        raise InvalidArgumentError(f"{pos} is not a position of this spec")
    layout = layout_for(spec)
    t, u = rectangle_of_block(spec, pos.block)
    out = []
    for dt, shift, row, col in layout.cell_memberships(u, pos.i, pos.j):
        cid = ConstraintId((pos.chain + shift) % spec.chains, (t + dt) * spec.L, row)
        out.append(Membership(cid, pos, col))
    return out


def verify_structure(spec: HoscSpec, horizon: int) -> StructureReport:
    """
    Check degree M+1 of every steady-state position and overlap <= 1 of every constraint pair.

    Constraints at times 0, L, ..., (horizon-1)L are scanned. A position is steady when its
    rectangle is not padding and all its constraints fall inside the horizon.

    Args:
        spec: Resolved spec
        horizon: Number of constraint periods

    Returns:
        The report; call ``raise_for_failure`` to turn violations into an error

    Raises:
        InvalidArgumentError: If the horizon is not longer than the DTS scope
    """
    layout = layout_for(spec)
    L, b, C, n = spec.L, spec.block_side, spec.chains, spec.n  # noqa: N806
    if horizon <= layout.scope_rectangles:
        raise InvalidArgumentError(
            f"horizon {horizon} must exceed the DTS scope {layout.scope_rectangles}"
        )

    # Constraint index: (t * C + c) * b + row; member block index m offset by d_max.
    t = np.arange(horizon)[:, None, None, None]
    c = np.arange(C)[None, :, None, None]
    rows = np.arange(b)[None, None, :, None]
    cols = np.arange(n)[None, None, None, :]
    shape = (horizon, C, b, n)
    con_ids = np.broadcast_to((t * C + c) * b + rows, shape).ravel()
    chain = np.broadcast_to((c - layout.col_prev_chain[cols].astype(np.int64)) % C, shape)
    block = np.broadcast_to(t * L - layout.col_delay[cols], shape)
    cell_i = np.broadcast_to(layout.col_src_row[rows, cols], shape)
    cell_j = np.broadcast_to(layout.col_src_col[rows, cols], shape)
    n_blocks = horizon * L + spec.d_max
    pos_ids = (
        ((chain * n_blocks + (block + spec.d_max)) * b + cell_i) * b + cell_j
    ).ravel()

    report = StructureReport(horizon=horizon, constraints_checked=horizon * C * b)

    # Degree of steady-state positions.
    unique_pos, counts = np.unique(pos_ids, return_counts=True)
    degree = dict(zip(unique_pos.tolist(), counts.tolist()))
    last_time = (horizon - 1) * L
    for m in range(-L + 1, last_time + 1):
        rect, u = rectangle_of_block(spec, m)
        latest = (rect + int(layout.member_dt[u].max())) * L
        if rect < 0 or latest > last_time:
            continue
        for ch in range(C):
            base = (ch * n_blocks + (m + spec.d_max)) * b * b
            for cell in range(b * b):
                report.positions_checked += 1
                got = degree.get(base + cell, 0)
                if got != spec.M + 1 and len(report.degree_violations) < _MAX_REPORTED:
                    report.degree_violations.append(
                        f"{PositionRef(ch, m, cell // b, cell % b)} has {got} memberships"
                    )

    # Pairwise overlaps: constraints sharing a position, grouped by position.
    order = np.lexsort((con_ids, pos_ids))
    sorted_pos = pos_ids[order]
    sorted_con = con_ids[order]
    n_con = horizon * C * b
    keys = [np.empty(0, dtype=np.int64)]
    for offset in range(1, int(counts.max())):
        same = sorted_pos[offset:] == sorted_pos[:-offset]
        keys.append(sorted_con[:-offset][same] * n_con + sorted_con[offset:][same])
    pair_keys, pair_counts = np.unique(np.concatenate(keys), return_counts=True)
    report.max_overlap = int(pair_counts.max()) if pair_counts.size else 0
    for key, count in zip(pair_keys.tolist(), pair_counts.tolist()):
        first, second = divmod(key, n_con)
        if first == second:
            message = f"{_constraint_of(first, C, b, L)} holds a position twice"
        elif count > 1:
            message = (
                f"{_constraint_of(first, C, b, L)} and {_constraint_of(second, C, b, L)} "
                f"share {count} positions"
            )
        else:
            continue
        report.overlap_violations.append(message)
        if len(report.overlap_violations) >= _MAX_REPORTED:
            break

    logger.info(
        f"structure check over {horizon} periods: {report.positions_checked} positions, "
        f"max overlap {report.max_overlap}, passed={report.passed}"
    )
    return report


def _constraint_of(index: int, C: int, b: int, L: int) -> ConstraintId:  # noqa: N803
    rest, row = divmod(index, b)
    t, chain = divmod(rest, C)
    return ConstraintId(chain, t * L, row)
