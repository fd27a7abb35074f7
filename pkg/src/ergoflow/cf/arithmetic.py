"""
Exact continued-fraction arithmetic.

Convergents by the three-term recursion, best-approximation gaps, distance to
the nearest integer, class membership and the shared-cell indices that make the
Birkhoff-sum estimates depend only on a digit prefix.
"""

from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Optional, Union

import structlog

from ergoflow.cf.models import AngleRep, Convergent, DigitSchedule, GapBound
from ergoflow.core.exceptions import (
    ClassViolationError,
    DegenerateAngleError,
    InsufficientPrefixError,
)
from ergoflow.core.reports import CheckResult, VerificationReport

logger = structlog.get_logger(__name__)

DEFAULT_PADDING = 10

Angle = Union[AngleRep, Fraction]


@lru_cache(maxsize=256)
def _recursion(digits: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(p_0..p_l, q_0..q_l) with seeds p_-1 = 1, p_0 = 0, q_-1 = 0, q_0 = 1."""
    ps = [0]
    qs = [1]
    p_prev, q_prev = 1, 0
    for a in digits:
        p_next = a * ps[-1] + p_prev
        q_next = a * qs[-1] + q_prev
        p_prev, q_prev = ps[-1], qs[-1]
        ps.append(p_next)
        qs.append(q_next)
    return tuple(ps), tuple(qs)


def _table(schedule: DigitSchedule, upto: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if upto > schedule.length:
        raise InsufficientPrefixError(upto, schedule.length)
    return _recursion(schedule.digits)


def _value(alpha: Angle) -> Fraction:
    return alpha.value if isinstance(alpha, AngleRep) else Fraction(alpha)


def convergents(schedule: DigitSchedule, upto: int) -> list[Convergent]:
    """
    Convergents p_n/q_n for n = 1..upto.

    Args:
        schedule: Digit schedule supplying a_1..a_upto.
        upto: Last index.

    Returns:
        The convergents in order of index.

    Raises:
        InsufficientPrefixError: If upto exceeds the available digits.
    """
    ps, qs = _table(schedule, upto)
    return [Convergent(n=n, p=ps[n], q=qs[n]) for n in range(1, upto + 1)]


def denominator(schedule: DigitSchedule, n: int) -> int:
    """q_n, with q_0 = 1."""
    _, qs = _table(schedule, n)
    return qs[n]


def numerator(schedule: DigitSchedule, n: int) -> int:
    """p_n, with p_0 = 0."""
    ps, _ = _table(schedule, n)
    return ps[n]


def denominators(schedule: DigitSchedule) -> tuple[int, ...]:
    """(q_0, ..., q_l) for the whole schedule."""
    return _recursion(schedule.digits)[1]


def approx_gap(schedule: DigitSchedule, n: int) -> GapBound:
    """Bounds 1/(q_n(q_n+q_{n+1})) < |alpha - p_n/q_n| < 1/(q_n q_{n+1}), positive iff n even."""
    _, qs = _table(schedule, n + 1)
    q_n, q_next = qs[n], qs[n + 1]
    return GapBound(
        n=n,
        lower=Fraction(1, q_n * (q_n + q_next)),
        upper=Fraction(1, q_n * q_next),
        positive=n % 2 == 0,
    )


def frac_part(value: Fraction) -> Fraction:
    return value - floor(value)


def dist_to_int(k: int, alpha: Angle) -> Fraction:
    """||k * alpha||, the distance from k * alpha to the nearest integer."""
    r = frac_part(k * _value(alpha))
    return min(r, 1 - r)


def expand_fraction(value: Fraction) -> list[int]:
    """
    Partial quotients a_1, a_2, ... of a rational in [0, 1).

    The expansion is canonical: its last digit is at least 2.
    """
    value = Fraction(value)
    if not 0 <= value < 1:
        raise ValueError(f"expected a value in [0, 1), got {value}")
    digits: list[int] = []
    x = value
    while x:
        x = 1 / x
        a = floor(x)
        digits.append(a)
        x -= a
    return digits


def angle_denominator(alpha: Angle, n: int) -> int:
    """
    q_n of the angle's own canonical expansion.

    Raises:
        InsufficientPrefixError: If the expansion has fewer than n digits.
    """
    digits = tuple(expand_fraction(_value(alpha)))
    if n > len(digits):
        raise InsufficientPrefixError(n, len(digits))
    return _recursion(digits)[1][n]


def alternate_expansion(value: Fraction) -> list[int]:
    """The non-canonical expansion [..., a - 1, 1] of a nonzero rational."""
    digits = expand_fraction(value)
    if not digits:
        return digits
    return digits[:-1] + [digits[-1] - 1, 1]


def common_prefix(left: list[int] | tuple[int, ...], right: list[int] | tuple[int, ...]) -> int:
    count = 0
    for a, b in zip(left, right):
        if a != b:
            break
        count += 1
    return count


def class_check(alpha: Angle, schedule: DigitSchedule, ell: int) -> bool:
    """
    Whether alpha shares the digits a_1..a_ell with the schedule.

    The canonical expansion is compared first; the alternate form ending in 1
    is only consulted when the canonical expansion is shorter than ell.

    Raises:
        DegenerateAngleError: If alpha is zero.
        InsufficientPrefixError: If the schedule has fewer than ell digits.
    """
    value = _value(alpha)
    if value == 0:
        raise DegenerateAngleError("the zero angle has no continued fraction")
    if ell > schedule.length:
        raise InsufficientPrefixError(ell, schedule.length)
    target = list(schedule.digits[:ell])
    canonical = expand_fraction(value)
    if len(canonical) >= ell:
        return canonical[:ell] == target
    alternate = alternate_expansion(value)
    return len(alternate) >= ell and alternate[:ell] == target


def matched_prefix_len(value: Fraction, schedule: DigitSchedule) -> int:
    return common_prefix(expand_fraction(value), schedule.digits)


def _padded_value(prefix: tuple[int, ...] | list[int]) -> Fraction:
    ps, qs = _recursion(tuple(prefix))
    return Fraction(ps[-1], qs[-1])


def representative(
    schedule: DigitSchedule,
    ell: Optional[int] = None,
    padding: int = DEFAULT_PADDING,
) -> AngleRep:
    """
    Rational angle whose expansion starts with the first ell schedule digits.

    The prefix is padded with `padding` 1-digits before the convergent is taken,
    so the canonical expansion keeps all ell digits.
    """
    ell = schedule.length if ell is None else ell
    if ell > schedule.length:
        raise InsufficientPrefixError(ell, schedule.length)
    if padding < 2:
        raise ValueError("padding must be at least 2")
    value = _padded_value(list(schedule.digits[:ell]) + [1] * padding)
    rep = AngleRep(value=value, matched_prefix_len=matched_prefix_len(value, schedule))
    logger.debug("Representative built", ell=ell, padding=padding, q=value.denominator)
    return rep


def class_members(
    schedule: DigitSchedule,
    ell: int,
    count: int,
    padding: int = DEFAULT_PADDING,
) -> list[AngleRep]:
    """
    Distinct deterministic members of the class sharing a_1..a_ell.

    Member 0 is the plain representative; member i > 0 continues the prefix with
    the digit i + 1 before the 1-padding.
    """
    if ell > schedule.length:
        raise InsufficientPrefixError(ell, schedule.length)
    members = [representative(schedule, ell, padding)]
    prefix = list(schedule.digits[:ell])
    for i in range(1, count):
        value = _padded_value(prefix + [i + 1] + [1] * padding)
        members.append(
            AngleRep(value=value, matched_prefix_len=matched_prefix_len(value, schedule))
        )
    return members[:count]


def cell_index(k: int, p_n: int, q_n: int, n: int) -> int:
    """Cell c_k with k*alpha mod 1 in (c_k/q_n, (c_k+1)/q_n)."""
    if n % 2 == 0:
        return (k * p_n) % q_n
    return (k * p_n - 1) % q_n


def same_cell_indices(a: DigitSchedule, b: DigitSchedule, n: int) -> list[int]:
    """
    Cell indices c_k for k = 1..q_n - 1, shared by every angle with digits a_1..a_n.

    Raises:
        InsufficientPrefixError: If either schedule has fewer than n digits.
        ClassViolationError: If the schedules differ within the first n digits.
    """
    if n > a.length or n > b.length:
        raise InsufficientPrefixError(n, min(a.length, b.length))
    if a.digits[:n] != b.digits[:n]:
        raise ClassViolationError(f"schedules differ within the first {n} digits")
    ps, qs = _recursion(a.digits[:n])
    p_n, q_n = ps[n], qs[n]
    return [cell_index(k, p_n, q_n, n) for k in range(1, q_n)]


def _schedule_of(alpha: AngleRep) -> DigitSchedule:
    return DigitSchedule(digits=tuple(expand_fraction(alpha.value)))


def verify_same_cell(alpha: AngleRep, beta: AngleRep, n: int) -> VerificationReport:
    """
    Brute-force check of the shared cells of k*alpha and k*beta for k < q_n.

    Both angles must have expansions longer than n so that neither equals p_n/q_n.
    """
    sa, sb = _schedule_of(alpha), _schedule_of(beta)
    if sa.length <= n or sb.length <= n:
        raise InsufficientPrefixError(n + 1, min(sa.length, sb.length))
    cells = same_cell_indices(sa, sb, n)
    q_n = len(cells) + 1
    report = VerificationReport(title="cells").with_constants(n=n, q_n=q_n)

    misses = 0
    for k, c in enumerate(cells, start=1):
        lo, hi = Fraction(c, q_n), Fraction(c + 1, q_n)
        for x in (frac_part(k * alpha.value), frac_part(k * beta.value)):
            if not lo < x < hi:
                misses += 1
                report.add(
                    CheckResult.exact(
                        "cells.membership", False, value=x, bound=f"({lo}, {hi})", k=k
                    )
                )
    report.add(
        CheckResult.exact(
            "cells.membership",
            misses == 0,
            value=misses,
            bound=0,
            detail=f"{2 * len(cells)} memberships checked",
        )
    )

    missing = set(range(q_n)) - set(cells)
    expected = {0} if n % 2 == 0 else {q_n - 1}
    report.add(
        CheckResult.exact(
            "cells.surjective",
            len(set(cells)) == len(cells) and missing == expected,
            value=len(set(cells)),
            bound=q_n - 1,
            detail=f"cell left for k=0: {sorted(missing)}",
        )
    )
    report.compute_summary()
    return report


def sandwich_report(schedule: DigitSchedule, alpha: Angle) -> VerificationReport:
    """
    Exact check of 1/(q_n+q_{n+1}) < |q_n alpha - p_n| < 1/q_{n+1} and of the sign
    of alpha - p_n/q_n for every n the shared prefix covers.
    """
    value = _value(alpha)
    expansion = expand_fraction(value)
    shared = common_prefix(expansion, schedule.digits)
    ps, qs = _recursion(schedule.digits[:shared])
    report = VerificationReport(title="cf").with_constants(shared_prefix=shared)
    for n in range(0, min(shared - 1, len(expansion) - 2) + 1):
        q_n, q_next = qs[n], qs[n + 1]
        d = abs(q_n * value - ps[n])
        lower, upper = Fraction(1, q_n + q_next), Fraction(1, q_next)
        report.add(
            CheckResult.exact(
                "cf.sandwich",
                lower < d < upper,
                value=d,
                bound=f"({lower}, {upper})",
                margin=min(d - lower, upper - d),
                k=n,
            )
        )
        diff = value - Fraction(ps[n], q_n)
        gap_lower = Fraction(1, q_n * (q_n + q_next))
        gap_upper = Fraction(1, q_n * q_next)
        report.add(
            CheckResult.exact(
                "cf.gap_sign",
                (diff > 0) == (n % 2 == 0) and gap_lower < abs(diff) < gap_upper,
                value=diff,
                bound=f"({gap_lower}, {gap_upper})",
                k=n,
            )
        )
    report.compute_summary()
    return report
