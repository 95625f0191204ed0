"""Difference triangle sets: validation, bounds, search, combining and memory metrics."""

import logging
import math
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import NamedTuple

from app.core.config import get_settings
from app.core.errors import (
    InternalConsistencyError,
    InvalidArgumentError,
    InvalidRulerError,
    NotADtsError,
    RefusedError,
    UnsupportedError,
)
from app.models.dts import (
    DifferenceTriangleSet,
    DtsCertificate,
    DtsSearchResult,
    FamilyMember,
    MemoryMetrics,
    ParetoPoint,
    Ruler,
    SearchObjective,
)
from app.services.algebra import AffinePerm, sharply_2_transitive_group

logger = logging.getLogger(__name__)

# Shortest ruler with distinct differences, indexed by order M+1.
OPTIMAL_RULER_LENGTHS: dict[int, int] = {
    2: 1,
    3: 3,
    4: 6,
    5: 11,
    6: 17,
    7: 25,
    8: 34,
    9: 44,
    10: 55,
    11: 72,
}

_DEADLINE_CHECK_EVERY = 4096

RulerInput = Ruler | Sequence[int]


def _as_ruler(candidate: RulerInput) -> Ruler:
    if isinstance(candidate, Ruler):
        return candidate
    marks = tuple(int(x) for x in candidate)
    if len(marks) < 2:
        raise InvalidRulerError(f"ruler {marks} needs at least two marks")
    return Ruler(marks=marks)


def validate(candidate: DifferenceTriangleSet | Sequence[RulerInput]) -> DifferenceTriangleSet:
    """
    Check the defining property of a difference triangle set.

    Args:
        candidate: A DTS or a list of rulers (Ruler models or mark sequences)

    Returns:
        The validated DTS with its certificate attached

    Raises:
        InvalidArgumentError: If the list is empty or the rulers differ in order
        InvalidRulerError: If a ruler repeats a mark
        NotADtsError: If two signed differences coincide
    """
    raw = candidate.rulers if isinstance(candidate, DifferenceTriangleSet) else candidate
    rulers = tuple(_as_ruler(r) for r in raw)
    if not rulers:
        raise InvalidArgumentError("a DTS needs at least one ruler")

    order = rulers[0].order
    for index, ruler in enumerate(rulers):
        if ruler.order != order:
            raise InvalidArgumentError(
                f"ruler {index} has order {ruler.order}, expected {order}"
            )
        if len(set(ruler.marks)) != ruler.order:
            raise InvalidRulerError(f"ruler {index} {ruler} repeats a mark")

    seen: dict[int, tuple[int, int, int]] = {}
    for index, ruler in enumerate(rulers):
        for difference, k1, k2 in ruler.differences():
            if difference <= 0:
                continue
            where = (index, k1, k2)
            if difference in seen:
                raise NotADtsError(difference, seen[difference], where)
            seen[difference] = where

    dts = DifferenceTriangleSet(rulers=rulers)
    return dts.model_copy(update={"certificate": certify(dts)})


def certify(dts: DifferenceTriangleSet) -> DtsCertificate:
    """
    Compute scope, sum-of-lengths, distance set and perfectness.

    Args:
        dts: A valid DTS

    Returns:
        The certificate
    """
    distances = sorted(d for ruler in dts.rulers for d in ruler.distances())
    needed = dts.L * (dts.M + 1) * dts.M // 2
    return DtsCertificate(
        scope=dts.scope,
        sum_of_lengths=dts.sum_of_lengths,
        is_perfect=distances == list(range(1, needed + 1)),
        distance_set=tuple(distances),
    )


def greedy_dts(L: int, M: int) -> DifferenceTriangleSet:  # noqa: N803
    """
    A normalized (L, M)-DTS built ruler by ruler, each new mark the smallest that keeps all
    differences distinct. Not optimal, but immediate for any parameters.

    Raises:
        InvalidArgumentError: If L < 1 or M < 1
    """
    _check_l(L)
    if M < 1:
        raise InvalidArgumentError(f"M must be positive, got {M}")
    used: set[int] = set()
    rulers = []
    for _ in range(L):
        marks = [0]
        candidate = 1
        while len(marks) < M + 1:
            new = {candidate - x for x in marks}
            if not new & used and len(new) == len(marks):
                marks.append(candidate)
                used |= new
            candidate += 1
        rulers.append(marks)
    return validate(rulers)


def _check_l(L: int) -> None:  # noqa: N803
    if L < 1:
        raise InvalidArgumentError(f"L must be positive, got {L}")


def scope_lower_bound(L: int, M: int, generic: bool = False) -> int:  # noqa: N803
    """
    Lower bound on the scope of an (L, M)-DTS.

    Args:
        L: Number of rulers
        M: Ruler order minus one
        generic: Use the trivial L(M+1)M/2 bound, valid for every M

    Returns:
        The bound

    Raises:
        InvalidArgumentError: If L < 1 or M < 1
        UnsupportedError: If M is outside 1..4 and generic is not set
    """
    _check_l(L)
    if M < 1:
        raise InvalidArgumentError(f"M must be positive, got {M}")
    if generic:
        return L * (M + 1) * M // 2
    if M == 1:
        return L
    if M == 2:
        return 3 * L if L % 4 in (0, 1) else 3 * L + 1
    if M == 3:
        return 6 * L
    if M == 4:
        return 10 * L if L % 2 == 0 else 10 * L + 1
    raise UnsupportedError(f"no strengthened scope bound for M={M}; pass generic=True")


def sum_of_lengths_lower_bound(L: int, M: int) -> int:  # noqa: N803
    """
    Lower bound on the sum of ruler lengths of an (L, M)-DTS.

    Raises:
        InvalidArgumentError: If L < 1
        UnsupportedError: If M is outside 1..4
    """
    _check_l(L)
    if M == 1:
        bound = Fraction(L * (L + 1), 2)
    elif M == 2:
        if L % 4 in (0, 1):
            bound = Fraction(3 * L * (3 * L + 1), 4)
        else:
            bound = Fraction((3 * L - 1) * 3 * L, 4) + Fraction(3 * L + 1, 2)
    elif M == 3:
        bound = Fraction(5 * L * L + L)
    elif M == 4:
        bound = 9 * L * L + Fraction(3 * L, 2) + (Fraction(1, 2) if L % 2 else 0)
    else:
        raise UnsupportedError(f"no sum-of-lengths bound for M={M}")
    return math.ceil(bound)


def sum_of_lengths_limit_ratio(M: int) -> Fraction:  # noqa: N803
    """Leading coefficient of the sum-of-lengths bound over the optimal single-ruler length."""
    leading = {1: Fraction(1, 2), 2: Fraction(9, 4), 3: Fraction(5), 4: Fraction(9)}
    if M not in leading:
        raise UnsupportedError(f"no sum-of-lengths bound for M={M}")
    return leading[M] / OPTIMAL_RULER_LENGTHS[M + 1]


# ---------------------------------------------------------------------------
# Optimal search
# ---------------------------------------------------------------------------


class _BranchTask(NamedTuple):
    L: int
    M: int
    first_length: int
    scope_max: int
    slen_max: int
    find_all: bool
    # time.monotonic() value shared by every branch and level of one search
    deadline: float


class _BranchOutcome(NamedTuple):
    solutions: list[tuple[tuple[int, ...], ...]]
    nodes: int
    timed_out: bool


class _RulerSearch:
    """Depth-first search placing normalized rulers in increasing length order."""

    def __init__(self, task: _BranchTask) -> None:
        self.L = task.L
        self.M = task.M
        self.scope_max = task.scope_max
        self.slen_max = task.slen_max
        self.find_all = task.find_all
        self.deadline = task.deadline
        self.per_ruler = task.M * (task.M + 1) // 2
        self.solutions: list[tuple[tuple[int, ...], ...]] = []
        self.nodes = 0
        self.timed_out = False

    @property
    def _stop(self) -> bool:
        return self.timed_out or (not self.find_all and bool(self.solutions))

    def _tick(self) -> None:
        self.nodes += 1
        if self.nodes % _DEADLINE_CHECK_EVERY == 0 and time.monotonic() > self.deadline:
            self.timed_out = True

    def run(self, first_length: int) -> None:
        self._place_ruler(0, 0, [], 0, 0, first_length)

    def _place_ruler(
        self,
        index: int,
        used: int,
        rulers: list[tuple[int, ...]],
        slen: int,
        prev_len: int,
        forced: int | None = None,
    ) -> None:
        if index == self.L:
            self.solutions.append(tuple(rulers))
            return
        free = self.scope_max - used.bit_count()
        if free < (self.L - index) * self.per_ruler:
            return

        after = self.L - index - 1
        if forced is not None:
            lengths: range | list[int] = [forced]
        else:
            lengths = range(prev_len + 1, self.scope_max - after + 1)
        for lam in lengths:
            if slen + lam * (after + 1) + after * (after + 1) // 2 > self.slen_max:
                break
            self._tick()
            if self._stop:
                return
            if (used >> lam) & 1:
                continue
            self._fill(index, used | (1 << lam), rulers, slen + lam, lam, [0])
            if self._stop:
                return

    def _fill(
        self,
        index: int,
        used: int,
        rulers: list[tuple[int, ...]],
        slen: int,
        lam: int,
        marks: list[int],
    ) -> None:
        if len(marks) == self.M:
            # Reflection: first gap below last gap.
            if self.M >= 2 and not marks[1] < lam - marks[-1]:
                return
            self._place_ruler(index + 1, used, [*rulers, (*marks, lam)], slen, lam)
            return

        room = self.M - 1 - len(marks)
        for x in range(marks[-1] + 1, lam - room):
            if len(marks) == 1 and 2 * x >= lam - self.M + 2:
                break
            self._tick()
            if self._stop:
                return
            new = 0
            ok = True
            for y in (*marks, lam):
                bit = 1 << abs(x - y)
                if (used | new) & bit:
                    ok = False
                    break
                new |= bit
            if ok:
                self._fill(index, used | new, rulers, slen, lam, [*marks, x])
                if self._stop:
                    return


def _search_branch(task: _BranchTask) -> _BranchOutcome:
    """Run one top-level branch (fixed first ruler length); picklable for worker pools."""
    search = _RulerSearch(task)
    search.run(task.first_length)
    return _BranchOutcome(search.solutions, search.nodes, search.timed_out)


def _min_ruler_length(M: int) -> int:  # noqa: N803
    return OPTIMAL_RULER_LENGTHS.get(M + 1, M * (M + 1) // 2)


def _enumerate(
    L: int,  # noqa: N803
    M: int,  # noqa: N803
    scope_max: int,
    slen_max: int,
    find_all: bool,
    deadline: float,
    workers: int,
) -> _BranchOutcome:
    """All DTSs (or the first one) with scope <= scope_max and sum-of-lengths <= slen_max."""
    min_len = _min_ruler_length(M)
    top = min(scope_max - (L - 1), (slen_max - L * (L - 1) // 2) // L)
    tasks = [
        _BranchTask(L, M, first, scope_max, slen_max, find_all, deadline)
        for first in range(min_len, top + 1)
    ]

    outcomes: list[_BranchOutcome] = []
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_search_branch, tasks))
    else:
        for task in tasks:
            outcome = _search_branch(task)
            outcomes.append(outcome)
            if outcome.timed_out or (outcome.solutions and not find_all):
                break

    solutions: list[tuple[tuple[int, ...], ...]] = []
    for outcome in outcomes:
        solutions.extend(outcome.solutions)
        if solutions and not find_all:
            solutions = solutions[:1]
            break
    if find_all:
        solutions.sort()
    return _BranchOutcome(
        solutions,
        sum(o.nodes for o in outcomes),
        any(o.timed_out for o in outcomes),
    )


def _to_dts(rulers: tuple[tuple[int, ...], ...]) -> DifferenceTriangleSet:
    return validate([Ruler(marks=r) for r in rulers])


def _generic_slen_bound(L: int, M: int) -> int:  # noqa: N803
    trivial = L * _min_ruler_length(M) + L * (L - 1) // 2
    if M <= 4:
        return max(trivial, sum_of_lengths_lower_bound(L, M))
    return trivial


def _incomplete(outcome: _BranchOutcome, find_all: bool) -> bool:
    """A level is incomplete when the budget cut it short before its answer was settled."""
    return outcome.timed_out and (find_all or not outcome.solutions)


def search_optimal(
    L: int,  # noqa: N803
    M: int,  # noqa: N803
    objective: SearchObjective = SearchObjective.MIN_SCOPE,
    scope_cap: int | None = None,
    time_budget: float | None = None,
    find_all: bool = True,
    workers: int | None = None,
) -> DtsSearchResult:
    """
    Search for optimal normalized difference triangle sets.

    Rulers are normalized, sorted by increasing length and reflected so that their first gap
    is smaller than their last gap. Results are in sorted canonical order.

    Args:
        L: Number of rulers
        M: Ruler order minus one
        objective: min-scope, min-sum-of-lengths or pareto
        scope_cap: Largest scope considered (defaults to the configured maximum)
        time_budget: Wall-clock budget in seconds (defaults to the configured budget)
        find_all: Return every optimal DTS instead of the first one found
        workers: Worker processes for the top-level branches

    Returns:
        The search result; ``partial`` is set when the budget ran out

    Raises:
        InvalidArgumentError: If the parameters or the scope cap are out of range
    """
    settings = get_settings()
    _check_l(L)
    if M < 1:
        raise InvalidArgumentError(f"M must be positive, got {M}")
    cap = settings.dts_scope_cap_max if scope_cap is None else scope_cap
    trivial = scope_lower_bound(L, M, generic=True)
    if not trivial <= cap <= settings.dts_scope_cap_max:
        raise InvalidArgumentError(
            f"scope cap {cap} outside [{trivial}, {settings.dts_scope_cap_max}]"
        )
    budget = settings.dts_time_budget_s if time_budget is None else time_budget
    deadline = time.monotonic() + budget
    n_workers = settings.workers if workers is None else workers

    result = DtsSearchResult(L=L, M=M, objective=objective, scope_cap=cap)
    scope_lb = scope_lower_bound(L, M, generic=M > 4)
    scope_lb = max(scope_lb, _min_ruler_length(M) + L - 1)
    slen_lb = _generic_slen_bound(L, M)
    slen_top = L * cap - L * (L - 1) // 2

    if objective is SearchObjective.MIN_SUM_OF_LENGTHS:
        for target in range(slen_lb, slen_top + 1):
            logger.debug(f"DTS search ({L},{M}): sum-of-lengths {target}")
            outcome = _enumerate(L, M, cap, target, find_all, deadline, n_workers)
            result.nodes += outcome.nodes
            if _incomplete(outcome, find_all):
                result.partial = True
            if outcome.solutions:
                found = [_to_dts(s) for s in outcome.solutions]
                result.dtss = found
                result.front = [
                    ParetoPoint(scope=min(d.scope for d in found), sum_of_lengths=target)
                ]
                break
            if result.partial:
                break
        else:
            result.proven_infeasible = True
        logger.info(f"DTS search ({L},{M}) min-sum-of-lengths: {result.front}")
        return result

    best: list[DifferenceTriangleSet] = []
    enumerate_all = find_all or objective is SearchObjective.PARETO
    for scope in range(scope_lb, cap + 1):
        logger.debug(f"DTS search ({L},{M}): scope {scope}")
        outcome = _enumerate(L, M, scope, slen_top, enumerate_all, deadline, n_workers)
        result.nodes += outcome.nodes
        if _incomplete(outcome, enumerate_all):
            result.partial = True
        if outcome.solutions:
            best = [_to_dts(s) for s in outcome.solutions]
            break
        if result.partial:
            break
    if not best:
        result.proven_infeasible = not result.partial
        logger.info(f"DTS search ({L},{M}): nothing within scope cap {cap}")
        return result

    scope_star = best[0].scope
    if objective is SearchObjective.MIN_SCOPE:
        result.dtss = best
        result.front = [
            ParetoPoint(scope=scope_star, sum_of_lengths=min(d.sum_of_lengths for d in best))
        ]
        logger.info(f"DTS search ({L},{M}) min-scope: {scope_star}")
        return result

    best_slen = min(d.sum_of_lengths for d in best)
    chosen = [d for d in best if d.sum_of_lengths == best_slen]
    result.front = [ParetoPoint(scope=scope_star, sum_of_lengths=best_slen)]
    result.dtss = chosen if find_all else chosen[:1]
    for scope in range(scope_star + 1, cap + 1):
        if best_slen <= slen_lb or result.partial:
            break
        outcome = _enumerate(L, M, scope, best_slen - 1, True, deadline, n_workers)
        result.nodes += outcome.nodes
        if outcome.timed_out:
            result.partial = True
            break
        if outcome.solutions:
            found = [_to_dts(s) for s in outcome.solutions]
            best_slen = min(d.sum_of_lengths for d in found)
            chosen = [d for d in found if d.sum_of_lengths == best_slen]
            result.front.append(ParetoPoint(scope=scope, sum_of_lengths=best_slen))
            result.dtss.extend(chosen if find_all else chosen[:1])
    logger.info(f"DTS search ({L},{M}) pareto front: {result.front}")
    return result


# ---------------------------------------------------------------------------
# Combining construction and infinite families
# ---------------------------------------------------------------------------


def combine(
    x: DifferenceTriangleSet,
    y: DifferenceTriangleSet,
    group: list[AffinePerm] | None = None,
) -> DifferenceTriangleSet:
    """
    Combine two perfect DTSs of equal M into a larger perfect DTS.

    The result is the union of Y, (L2*M(M+1)+1)*X and the rulers
    (L2*M(M+1)+1)*x^(i) + y^(j) read through each group element.

    Args:
        x: Perfect (L1, M)-DTS
        y: Perfect (L2, M)-DTS
        group: Sharply 2-transitive group on [M+1]; the affine group of GF(M+1) by default

    Returns:
        The certified perfect (L1*L2*M(M+1)+L1+L2, M)-DTS, rulers normalized

    Raises:
        InvalidArgumentError: If an input is not perfect, the orders differ or the group is wrong
        UnsupportedError: If M+1 is not a supported prime power
        InternalConsistencyError: If the output fails certification
    """
    x = validate(x)
    y = validate(y)
    if x.M != y.M:
        raise InvalidArgumentError(f"cannot combine M={x.M} with M={y.M}")
    for name, dts in (("X", x), ("Y", y)):
        assert dts.certificate is not None
        if not dts.certificate.is_perfect:
            raise InvalidArgumentError(f"{name} = {dts} is not perfect")

    M = x.M  # noqa: N806
    q = M + 1
    if group is None:
        try:
            group = sharply_2_transitive_group(q)
        except InvalidArgumentError as exc:
            raise UnsupportedError(f"M+1={q} is not a supported prime power") from exc
    if len(group) != M * q or any(len(g.mapping) != q for g in group):
        raise InvalidArgumentError(f"group must hold {M * q} permutations of [{q}]")

    factor = y.L * M * q + 1
    xs = [r.normalized() for r in x.rulers]
    ys = [r.normalized() for r in y.rulers]
    combined = [r.marks for r in ys]
    combined.extend(r.scaled(factor).marks for r in xs)
    for xr in xs:
        for yr in ys:
            for g in group:
                marks = tuple(factor * xr.marks[v] + yr.marks[g(v)] for v in range(q))
                combined.append(tuple(m - marks[0] for m in marks))

    z = validate(combined)
    expected_slen = factor**2 * x.sum_of_lengths + y.sum_of_lengths
    assert z.certificate is not None
    if not z.certificate.is_perfect or z.sum_of_lengths != expected_slen:
        raise InternalConsistencyError(
            f"combined DTS failed certification (slen {z.sum_of_lengths}, "
            f"expected {expected_slen})"
        )
    logger.debug(f"combined ({x.L},{M}) with ({y.L},{M}) into ({z.L},{M})")
    return z


def family_closed_form(L0: int, S0: int, M: int, i: int) -> tuple[int, int]:  # noqa: N803
    """
    Exact (L_i, S_i) of the i-th self-combination of a perfect (L0, M) seed.

    L_i = ((k*L0+1)^(i+1) - 1)/k and S_i = S0 * ((k*L0+1)^(2(i+1)) - 1)/((k*L0+1)^2 - 1)
    with k = M(M+1).
    """
    if i < 0:
        raise InvalidArgumentError(f"iteration index must be non-negative, got {i}")
    k = M * (M + 1)
    a = k * L0 + 1
    return (a ** (i + 1) - 1) // k, S0 * (a ** (2 * (i + 1)) - 1) // (a * a - 1)


def family_sum_of_lengths(L0: int, S0: int, M: int, L: int) -> Fraction:  # noqa: N803
    """Sum-of-lengths of the family member with L rulers: S0*L(kL+2)/(L0(kL0+2))."""
    k = M * (M + 1)
    return Fraction(S0 * L * (k * L + 2), L0 * (k * L0 + 2))


def family_limit_ratio(L0: int, S0: int, M: int) -> Fraction:  # noqa: N803
    """Limit of the memory ratio along the family as L grows."""
    if M + 1 not in OPTIMAL_RULER_LENGTHS:
        raise UnsupportedError(f"no optimal single-ruler length for order {M + 1}")
    k = M * (M + 1)
    return Fraction(S0 * k, L0 * (k * L0 + 2) * OPTIMAL_RULER_LENGTHS[M + 1])


def generate_family(
    seed: DifferenceTriangleSet,
    iterations: int,
    materialize: bool = True,
) -> list[FamilyMember]:
    """
    Iterate Z_i = combine(Z_{i-1}, Z_0) from a perfect seed.

    Args:
        seed: Perfect (L0, M)-DTS with M in {3, 4}
        iterations: Number of combining steps n; members 0..n are returned
        materialize: Build each DTS instead of reporting only (L_i, S_i)

    Returns:
        Family members in order of i

    Raises:
        UnsupportedError: If M is not 3 or 4
        InvalidArgumentError: If the seed is not perfect
        RefusedError: If a materialized member would exceed the configured size cap
    """
    seed = validate(seed)
    if seed.M not in (3, 4):
        raise UnsupportedError(f"infinite families are built for M in {{3, 4}}, got {seed.M}")
    assert seed.certificate is not None
    if not seed.certificate.is_perfect:
        raise InvalidArgumentError(f"seed {seed} is not perfect")
    if iterations < 0:
        raise InvalidArgumentError(f"iterations must be non-negative, got {iterations}")

    cap = get_settings().family_materialize_cap
    closed = [
        family_closed_form(seed.L, seed.sum_of_lengths, seed.M, i) for i in range(iterations + 1)
    ]
    if materialize and closed[-1][0] > cap:
        raise RefusedError(
            f"member {iterations} has L={closed[-1][0]} rulers, above the cap of {cap}"
        )

    members: list[FamilyMember] = []
    current: DifferenceTriangleSet | None = seed if materialize else None
    for i, (L_i, S_i) in enumerate(closed):  # noqa: N806
        if materialize and i > 0:
            assert current is not None
            current = combine(current, seed)
            if current.L != L_i or current.sum_of_lengths != S_i:
                raise InternalConsistencyError(
                    f"member {i} has (L, S) = ({current.L}, {current.sum_of_lengths}), "
                    f"expected ({L_i}, {S_i})"
                )
        members.append(FamilyMember(index=i, L=L_i, sum_of_lengths=S_i, dts=current))
    logger.info(f"generated {len(members)} family members from a ({seed.L},{seed.M}) seed")
    return members


def memory_metrics(dts: DifferenceTriangleSet, block_side: int) -> MemoryMetrics:
    """
    Encoding and decoding memory of a code built on ``dts`` with blocks of side ``block_side``.

    Args:
        dts: A valid DTS
        block_side: S/L

    Returns:
        The memory metrics; the ratio is absent when no optimal single-ruler length is tabled

    Raises:
        InvalidArgumentError: If block_side < 1
    """
    if block_side < 1:
        raise InvalidArgumentError(f"block side must be positive, got {block_side}")
    area = block_side * block_side
    len1 = OPTIMAL_RULER_LENGTHS.get(dts.M + 1)
    ratio = Fraction(dts.sum_of_lengths, dts.L * dts.L * len1) if len1 else None
    return MemoryMetrics(
        encode_mem=area * dts.sum_of_lengths,
        decode_mem=area * dts.L * dts.scope,
        ratio_vs_L1=ratio,
    )
