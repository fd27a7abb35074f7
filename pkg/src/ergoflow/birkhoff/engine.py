"""
Birkhoff sums over rotations and skew products.

Orbits run on the integer lattice of the skew system, and every term of a
PiecewiseFunction is evaluated as an integer ratio. A sum is either exact
(short orbits) or a dyadic enclosure accumulated with outward rounding, so no
float ever enters a verdict.
"""

from bisect import bisect_left, bisect_right
from fractions import Fraction
from functools import lru_cache
from math import floor, lcm
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

import structlog

from ergoflow.birkhoff.models import (
    Piece,
    PiecewiseFunction,
    SumReport,
    Term,
    TermKind,
    touches_pole,
)
from ergoflow.cf.arithmetic import angle_denominator, frac_part
from ergoflow.cf.models import AngleRep
from ergoflow.core.exceptions import (
    InfiniteVariationError,
    NotBoundedVariationError,
    SingularOrbitError,
)
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import DyadicAccumulator, Enclosure, Verdict, certify
from ergoflow.core.reports import CheckResult, CheckStatus
from ergoflow.geometry.metric import circle_dist
from ergoflow.geometry.models import TorusPoint
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import Lattice, lattice_for, lattice_orbit

logger = structlog.get_logger(__name__)

Number = Union[int, Fraction]
Map = Union[AngleRep, Fraction, SkewConfig]
Start = Union[TorusPoint, Number]

# orbits up to this length are summed in exact rational arithmetic
EXACT_TERM_LIMIT = 1024

_HALF = Fraction(1, 2)


def _angle(system: Map) -> Fraction:
    if isinstance(system, SkewConfig):
        return system.angle
    if isinstance(system, AngleRep):
        return system.value
    return frac_part(Fraction(system))


def _start_point(start: Start) -> TorusPoint:
    if isinstance(start, TorusPoint):
        return TorusPoint.of(start.x, start.level)
    return TorusPoint.of(start)


def _lattice(system: Map, points: Iterable[Number]) -> Lattice:
    points = list(points)
    if isinstance(system, SkewConfig):
        return lattice_for(system, *points)
    alpha = _angle(system)
    denom = lcm(alpha.denominator, *(Fraction(p).denominator for p in points))
    return Lattice(denom=denom, step=alpha.numerator * (denom // alpha.denominator), slit=0)


class _Compiled:
    """A PiecewiseFunction re-expressed on one lattice."""

    __slots__ = ("denom", "mask", "lefts", "terms")

    def __init__(self, f: PiecewiseFunction, lattice: Lattice):
        self.denom = lattice.denom
        self.mask = f.level_mask
        self.lefts = [lattice.encode(p.left) for p in f.pieces]
        self.terms = [
            tuple(
                (t.kind, t.coef.numerator, t.coef.denominator, lattice.encode(t.centre % 1))
                for t in p.terms
            )
            for p in f.pieces
        ]

    def ratios(self, x: int, level: int) -> Optional[list[tuple[int, int]]]:
        """Term values at x as (numerator, denominator); None at a pole."""
        if self.mask is not None and level != self.mask:
            return []
        D = self.denom
        out = []
        for kind, num, den, c in self.terms[bisect_right(self.lefts, x) - 1]:
            if kind == TermKind.CONSTANT:
                out.append((num, den))
                continue
            if kind in (TermKind.INVERSE, TermKind.INVERSE_SQUARE):
                d = (x - c) % D
                d = min(d, D - d)
            else:
                d = (c - x) % D
            if d == 0:
                return None
            if kind in (TermKind.INVERSE, TermKind.LEFT_INVERSE):
                out.append((num * D, den * d))
            else:
                out.append((num * D * D, den * d * d))
        return out


def _term_stream(
    system: Map, f: PiecewiseFunction, n: int, start: Start
) -> Iterator[list[tuple[int, int]]]:
    """Per-iterate term ratios along the orbit of length n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    z = _start_point(start)
    points = [z.x, *f.breakpoints(), *(t.centre % 1 for p in f.pieces for t in p.terms)]
    lattice = _lattice(system, points)
    compiled = _Compiled(f, lattice)
    for index, (x, level) in enumerate(lattice_orbit(lattice, lattice.encode(z.x), z.level, n)):
        ratios = compiled.ratios(x, level)
        if ratios is None:
            raise SingularOrbitError(index, TorusPoint(lattice.decode(x), level))
        yield ratios


def birkhoff_sum(
    system: Map,
    f: PiecewiseFunction,
    n: int,
    start: Start,
    bits: Optional[int] = None,
    exact: Optional[bool] = None,
) -> Enclosure:
    """
    S_n(Q, F)(z) = sum_{j<n} F(Q^j z) for a rotation or a skew product.

    Args:
        system: The rotation angle (AngleRep or Fraction) or a SkewConfig.
        f: The summed function.
        n: Number of terms.
        start: Starting point; a bare rational is a point of level 0.
        bits: Precision of the dyadic accumulator.
        exact: Sum in exact rationals; defaults to exact for short orbits.

    Returns:
        An enclosure of the sum (a point enclosure in exact mode).

    Raises:
        SingularOrbitError: If an orbit point is a pole of f.
    """
    exact = n <= EXACT_TERM_LIMIT if exact is None else exact
    if exact:
        total = Fraction(0)
        for ratios in _term_stream(system, f, n, start):
            for num, den in ratios:
                total += Fraction(num, den)
        return Enclosure.exact(total)
    acc = DyadicAccumulator(bits)
    for ratios in _term_stream(system, f, n, start):
        for num, den in ratios:
            acc.add_ratio(num, den)
    logger.debug("Birkhoff sum", n=n, function=f.label, bits=acc.bits)
    return acc.enclosure()


def partial_sums(
    system: Map,
    f: PiecewiseFunction,
    n: int,
    start: Start,
    bits: Optional[int] = None,
) -> Iterator[Enclosure]:
    """Stream S_0 = 0, S_1, ..., S_n as dyadic enclosures."""
    acc = DyadicAccumulator(bits)
    yield acc.enclosure()
    for ratios in _term_stream(system, f, n, start):
        for num, den in ratios:
            acc.add_ratio(num, den)
        yield acc.enclosure()


def max_abs_partial_sum(
    system: Map, f: PiecewiseFunction, n: int, start: Start, bits: Optional[int] = None
) -> Enclosure:
    """Enclosure of max_{j<n} |S_j(Q, F)(z)|."""
    lo, hi = Fraction(0), Fraction(0)
    for s in partial_sums(system, f, n - 1, start, bits):
        a = abs(s)
        lo, hi = max(lo, a.lo), max(hi, a.hi)
    return Enclosure(lo, hi)


def closest_approach(
    alpha: Union[AngleRep, Fraction], x: Number, n: int, centres: Sequence[Number]
) -> Fraction:
    """min over s < n and c in centres of ||x + s alpha - c||."""
    if n <= 0 or not centres:
        raise ValueError("need n > 0 and at least one centre")
    value = _angle(alpha)
    lattice = _lattice(value, [x, *centres])
    D = lattice.denom
    orbit = sorted(p for p, _ in lattice_orbit(lattice, lattice.encode(Fraction(x) % 1), 0, n))
    best = D
    for c in centres:
        c = lattice.encode(Fraction(c) % 1)
        i = bisect_left(orbit, c)
        for p in (orbit[i % len(orbit)], orbit[i - 1]):
            d = (p - c) % D
            best = min(best, d, D - d)
    return Fraction(best, D)


# variation and integral


def _direction(term: Term, piece: Piece) -> int:
    """Sign of the slope of a term on a piece: +1, -1, or 0 for constants."""
    if term.kind == TermKind.CONSTANT or term.coef == 0:
        return 0
    sign = 1 if term.coef > 0 else -1
    if term.kind in (TermKind.LEFT_INVERSE, TermKind.LEFT_INVERSE_SQUARE):
        return sign
    mid = frac_part((piece.left + piece.right) / 2 - term.centre)
    return -sign if mid < _HALF else sign


def _require_bounded(piece: Piece) -> None:
    if any(t.kind.has_pole and touches_pole(piece, t) for t in piece.terms):
        raise InfiniteVariationError(piece.left, piece.right)


def _value_at(piece: Piece, x: Fraction) -> Fraction:
    """Value of the piece's formula at x in its closure."""
    return sum((t.value(x) for t in piece.terms), Fraction(0))


def variation(f: PiecewiseFunction) -> Enclosure:
    """
    Total variation of f over T.

    Jumps at breakpoints (cyclically, including 0) are exact. On a piece where
    every term moves the same way the increment is exact; otherwise the
    increment is enclosed between |f(right) - f(left)| and the sum of the
    termwise increments.

    Raises:
        InfiniteVariationError: If a piece carries a pole in its closure.
    """
    lo = hi = Fraction(0)
    pieces = f.pieces
    for index, piece in enumerate(pieces):
        _require_bounded(piece)
        previous = pieces[index - 1]
        jump = abs(_value_at(piece, piece.left) - _value_at(previous, previous.right))
        lo += jump
        hi += jump
        whole = abs(_value_at(piece, piece.right) - _value_at(piece, piece.left))
        directions = {_direction(t, piece) for t in piece.terms} - {0}
        if len(directions) <= 1:
            lo += whole
            hi += whole
        else:
            lo += whole
            hi += sum(abs(t.value(piece.right) - t.value(piece.left)) for t in piece.terms)
    return Enclosure(lo, hi)


def _left_distance(term: Term, x: Fraction) -> Fraction:
    d = term.centre - x
    return d - floor(d)


def _term_integral(term: Term, a: Fraction, b: Fraction) -> LogLinearForm:
    coef = term.coef
    if term.kind == TermKind.CONSTANT:
        return LogLinearForm.rational(coef * (b - a))
    if term.kind in (TermKind.LEFT_INVERSE, TermKind.LEFT_INVERSE_SQUARE):
        da, db = _left_distance(term, a), _left_distance(term, b)
        if term.kind == TermKind.LEFT_INVERSE:
            return (LogLinearForm.log(da) - LogLinearForm.log(db)) * coef
        return LogLinearForm.rational(coef * (1 / db - 1 / da))
    da, db = circle_dist(a, term.centre), circle_dist(b, term.centre)
    rising = frac_part((a + b) / 2 - term.centre) < _HALF
    near, far = (da, db) if rising else (db, da)
    if term.kind == TermKind.INVERSE:
        return (LogLinearForm.log(far) - LogLinearForm.log(near)) * coef
    return LogLinearForm.rational(coef * (1 / near - 1 / far))


def integral(f: PiecewiseFunction) -> LogLinearForm:
    """
    Integral of f over T with respect to Lebesgue measure, in closed form.

    A level-masked function is integrated over its base.

    Raises:
        InfiniteVariationError: If a piece carries a pole in its closure.
    """
    parts: list[LogLinearForm] = []
    for piece in f.pieces:
        _require_bounded(piece)
        parts.extend(_term_integral(t, piece.left, piece.right) for t in piece.terms)
    return LogLinearForm.sum(parts)


# certified rows


def status_of(verdict: Verdict) -> CheckStatus:
    if not verdict.decided:
        return CheckStatus.UNDECIDED
    return CheckStatus.PASSED if verdict.passed else CheckStatus.FAILED


def lazy_sum(
    system: Map, f: PiecewiseFunction, n: int, start: Start
) -> Callable[[int], Enclosure]:
    """S_n(Q, F)(z) as a function of precision; computed once when exact."""
    if n <= EXACT_TERM_LIMIT:
        value = birkhoff_sum(system, f, n, start, exact=True)
        return lambda bits: value

    @lru_cache(maxsize=None)
    def compute(bits: int) -> Enclosure:
        return birkhoff_sum(system, f, n, start, bits=bits, exact=False)

    return compute


def form_at(form: LogLinearForm) -> Callable[[int], Enclosure]:
    return lru_cache(maxsize=None)(form.enclose)


def certified_report(
    name: str,
    value_at: Callable[[int], Enclosure],
    bound_at: Callable[[int], Enclosure],
    *,
    sample: TorusPoint,
    n: int,
    q_n: int,
    upper: bool = True,
    bits: Optional[int] = None,
    closest: Optional[Fraction] = None,
    k: Optional[int] = None,
    detail: str = "",
) -> SumReport:
    """
    Certify value <= bound (upper) or value >= bound, escalating precision.

    The margin is bound - value (or value - bound); the row passes iff its
    enclosure is non-negative.
    """
    value_at = lru_cache(maxsize=None)(value_at)
    bound_at = lru_cache(maxsize=None)(bound_at)

    def margin_at(b: int) -> Enclosure:
        if upper:
            return bound_at(b) - value_at(b)
        return value_at(b) - bound_at(b)

    verdict = certify(margin_at, start_bits=bits, label=name)
    used = verdict.precision_bits
    return SumReport(
        name=name,
        sample_x=sample.x,
        level=sample.level,
        n=n,
        q_n=q_n,
        value=value_at(used),
        bound=bound_at(used),
        margin=verdict.margin,
        status=status_of(verdict),
        precision_bits=used,
        closest_approach=closest,
        k=k,
        detail=detail,
    )


def info_report(
    name: str,
    value: Enclosure,
    *,
    sample: TorusPoint,
    n: int,
    q_n: int,
    bits: int,
    closest: Optional[Fraction] = None,
    k: Optional[int] = None,
    detail: str = "",
) -> SumReport:
    """A measured quantity that never affects the verdict."""
    return SumReport(
        name=name,
        sample_x=sample.x,
        level=sample.level,
        n=n,
        q_n=q_n,
        value=value,
        status=CheckStatus.INFO,
        precision_bits=bits,
        closest_approach=closest,
        k=k,
        detail=detail,
    )


# checks


def dk_check(
    f: PiecewiseFunction,
    alpha: Union[AngleRep, Fraction],
    n: int,
    samples: Iterable[Start],
    bits: Optional[int] = None,
) -> list[SumReport]:
    """
    Denjoy-Koksma: |S_{q_n}(R_alpha, F)(x) - q_n int F| <= Var(F) at each sample.

    The upper end of the variation enclosure is the bound, which keeps the
    check rigorous when a piece is not monotone.

    Raises:
        NotBoundedVariationError: If f has a pole in the closure of a piece.
        InsufficientPrefixError: If alpha has fewer than n partial quotients.
    """
    if not f.is_bounded():
        raise NotBoundedVariationError(f"{f!r} is unbounded")
    q = angle_denominator(alpha, n)
    var = variation(f)
    mean = form_at(integral(f) * q)
    bound = Enclosure.exact(var.hi)
    reports = []
    for start in samples:
        z = _start_point(start)
        total = lazy_sum(alpha, f, q, z.x)
        reports.append(
            certified_report(
                "dk",
                lambda b, total=total: abs(total(b) - mean(b)),
                lambda b: bound,
                sample=z,
                n=n,
                q_n=q,
                bits=bits,
                detail=f"Var = {fraction_str(var.hi)}" + ("" if var.is_exact else " (termwise)"),
            )
        )
    failed = sum(1 for r in reports if r.status == CheckStatus.FAILED)
    logger.info("Denjoy-Koksma checked", function=f.label, n=n, q_n=q, samples=len(reports), failed=failed)
    return reports


def admissible_samples(
    alpha: Union[AngleRep, Fraction],
    n: int,
    count: int,
    min_distance: Fraction,
    centres: Sequence[Number] = (Fraction(0),),
) -> list[Fraction]:
    """
    Up to `count` grid points whose q_n-orbit keeps min_distance from every centre.

    Candidates are midpoints of an 8*count grid visited in a stride order, so the
    accepted points spread over T; the result is sorted.
    """
    q = angle_denominator(alpha, n)
    size = 8 * max(count, 1)
    stride = (size * 5) // 8 + 1
    while lcm(stride, size) != stride * size:
        stride += 1
    found: list[Fraction] = []
    for k in range(size):
        x = Fraction(2 * ((k * stride) % size) + 1, 2 * size)
        if closest_approach(alpha, x, q, centres) >= min_distance:
            found.append(x)
            if len(found) == count:
                break
    if len(found) < count:
        logger.warning("Fewer admissible samples than requested", n=n, requested=count, found=len(found))
    return sorted(found)


def cocycle_check(system: Map, f: PiecewiseFunction, a: int, b: int, start: Start) -> CheckResult:
    """S_{a+b}(x) = S_a(x) + S_b(Q^a x), in exact arithmetic."""
    z = _start_point(start)
    points = [z.x, *f.breakpoints()]
    lattice = _lattice(system, points)
    x, level = lattice.encode(z.x), z.level
    for x, level in lattice_orbit(lattice, x, level, a + 1):
        pass
    shifted = TorusPoint(lattice.decode(x), level)
    whole = birkhoff_sum(system, f, a + b, z, exact=True).lo
    head = birkhoff_sum(system, f, a, z, exact=True).lo
    tail = birkhoff_sum(system, f, b, shifted, exact=True).lo
    return CheckResult.exact(
        "cocycle",
        whole == head + tail,
        value=whole,
        bound=head + tail,
        margin=head + tail - whole,
        sample=str(z),
        detail=f"a = {a}, b = {b}",
    )
