"""
Verified numerics.

Closed rational intervals with outward rounding onto a dyadic grid, directed
logarithms through mpmath, streaming sums, and precision escalation for sign
decisions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import mpmath
import structlog
from mpmath import libmp

logger = structlog.get_logger(__name__)

DEFAULT_PRECISION_BITS = 128
MIN_PRECISION_BITS = 64
MAX_PRECISION_BITS = 4096
PRECISION_ENV_VAR = "ERGOFLOW_PRECISION_BITS"

Number = Union[int, Fraction]


def default_precision_bits() -> int:
    """
    Starting precision for enclosures.

    Reads ERGOFLOW_PRECISION_BITS when set to an integer >= 64, otherwise 128.
    """
    raw = os.environ.get(PRECISION_ENV_VAR)
    if raw:
        try:
            bits = int(raw)
        except ValueError:
            logger.warning("Ignoring malformed precision override", value=raw)
            return DEFAULT_PRECISION_BITS
        if bits >= MIN_PRECISION_BITS:
            return bits
        logger.warning("Ignoring precision override below minimum", value=bits)
    return DEFAULT_PRECISION_BITS


def floor_to_grid(value: Fraction, bits: int) -> Fraction:
    """Largest multiple of 2^-bits not above value."""
    return Fraction((value.numerator << bits) // value.denominator, 1 << bits)


def ceil_to_grid(value: Fraction, bits: int) -> Fraction:
    """Smallest multiple of 2^-bits not below value."""
    return Fraction(-((-value.numerator << bits) // value.denominator), 1 << bits)


def _mpf_to_fraction(raw: tuple) -> Fraction:
    sign, man, exp, _ = raw
    if exp >= 0:
        value = Fraction(man << exp)
    else:
        value = Fraction(man, 1 << -exp)
    return -value if sign else value


@dataclass(frozen=True)
class Enclosure:
    """A closed interval [lo, hi] with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"Empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value: Number) -> "Enclosure":
        value = Fraction(value)
        return cls(value, value)

    @classmethod
    def hull(cls, *items: "Enclosure") -> "Enclosure":
        return cls(min(e.lo for e in items), max(e.hi for e in items))

    @staticmethod
    def coerce(value: Union["Enclosure", Number]) -> "Enclosure":
        if isinstance(value, Enclosure):
            return value
        return Enclosure.exact(value)

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Number) -> bool:
        return self.lo <= value <= self.hi

    def sign(self) -> Optional[int]:
        """+1, -1 or 0 when decided, None when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        return None

    def round_out(self, bits: int) -> "Enclosure":
        """Coarsen both endpoints outward onto the 2^-bits grid."""
        return Enclosure(floor_to_grid(self.lo, bits), ceil_to_grid(self.hi, bits))

    def __add__(self, other: Union["Enclosure", Number]) -> "Enclosure":
        other = Enclosure.coerce(other)
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: Union["Enclosure", Number]) -> "Enclosure":
        return self + (-Enclosure.coerce(other))

    def __rsub__(self, other: Number) -> "Enclosure":
        return Enclosure.coerce(other) - self

    def __mul__(self, other: Union["Enclosure", Number]) -> "Enclosure":
        if not isinstance(other, Enclosure):
            factor = Fraction(other)
            if factor >= 0:
                return Enclosure(self.lo * factor, self.hi * factor)
            return Enclosure(self.hi * factor, self.lo * factor)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Enclosure(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Enclosure":
        return self * (1 / Fraction(other))

    def __abs__(self) -> "Enclosure":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def to_decimal(self, digits: int = 20) -> str:
        """Decimal rendering of the midpoint and half-width."""
        if self.is_exact:
            return format_number(self.lo, digits)
        return (
            f"{format_number(self.midpoint, digits)}"
            f"±{format_number(self.width / 2, 3)}"
        )

    def __str__(self) -> str:
        return f"[{format_number(self.lo)}, {format_number(self.hi)}]"


def format_number(value: Fraction, digits: int = 20) -> str:
    """Decimal string for an exact rational."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    with mpmath.workdps(digits + 5):
        approx = mpmath.mpf(value.numerator) / value.denominator
        return mpmath.nstr(approx, digits)


def log_enclosure(value: Number, bits: Optional[int] = None) -> Enclosure:
    """
    Enclose log(value) for a positive rational.

    Args:
        value: Positive rational argument.
        bits: Working precision in bits.

    Returns:
        An enclosure of width about 2^-bits containing log(value).
    """
    value = Fraction(value)
    if value <= 0:
        raise ValueError(f"log of non-positive value {value}")
    if value == 1:
        return Enclosure.exact(0)
    bits = bits or default_precision_bits()
    prec = bits + 16
    p, q = value.numerator, value.denominator
    lo_arg = libmp.from_rational(p, q, prec, libmp.round_floor)
    hi_arg = libmp.from_rational(p, q, prec, libmp.round_ceiling)
    lo = _mpf_to_fraction(libmp.mpf_log(lo_arg, prec, libmp.round_floor))
    hi = _mpf_to_fraction(libmp.mpf_log(hi_arg, prec, libmp.round_ceiling))
    # a few ulps of slack on top of the directed rounding
    slack = Fraction(1 + max(abs(lo), abs(hi)).__ceil__(), 1 << (bits + 4))
    return Enclosure(lo - slack, hi + slack).round_out(bits + 8)


class DyadicAccumulator:
    """
    Streaming sum of rationals.

    Each term is rounded outward onto the 2^-bits grid, so the running total is a
    pair of integers and the result is a verified enclosure of the exact sum.
    """

    __slots__ = ("bits", "count", "_lo", "_hi")

    def __init__(self, bits: Optional[int] = None) -> None:
        self.bits = bits or default_precision_bits()
        self.count = 0
        self._lo = 0
        self._hi = 0

    def add_ratio(self, numerator: int, denominator: int) -> None:
        """Add numerator/denominator (denominator > 0)."""
        self._lo += (numerator << self.bits) // denominator
        self._hi -= ((-numerator) << self.bits) // denominator
        self.count += 1

    def add(self, value: Union[Enclosure, Number]) -> None:
        if isinstance(value, Enclosure):
            self._lo += (value.lo.numerator << self.bits) // value.lo.denominator
            self._hi -= ((-value.hi.numerator) << self.bits) // value.hi.denominator
            self.count += 1
            return
        value = Fraction(value)
        self.add_ratio(value.numerator, value.denominator)

    def enclosure(self) -> Enclosure:
        scale = 1 << self.bits
        return Enclosure(Fraction(self._lo, scale), Fraction(self._hi, scale))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a margin certification."""

    margin: Enclosure
    precision_bits: int
    decided: bool

    @property
    def passed(self) -> bool:
        return self.decided and self.margin.lo >= 0

    @property
    def failed(self) -> bool:
        return self.decided and self.margin.hi < 0


def certify(
    compute: Callable[[int], Enclosure],
    start_bits: Optional[int] = None,
    cap_bits: int = MAX_PRECISION_BITS,
    label: str = "margin",
) -> Verdict:
    """
    Decide the sign of a margin, doubling precision while it straddles zero.

    Args:
        compute: Returns an enclosure of the margin at the given precision.
        start_bits: First precision tried.
        cap_bits: Precision at which an undecided verdict is returned.
        label: Name used in log events.

    Returns:
        A Verdict; decided is False only if the cap was reached.
    """
    bits = start_bits or default_precision_bits()
    while True:
        margin = compute(bits)
        if margin.lo >= 0 or margin.hi < 0:
            return Verdict(margin=margin, precision_bits=bits, decided=True)
        if bits >= cap_bits:
            logger.warning(
                "Margin undecided at precision cap",
                label=label,
                bits=bits,
                margin=str(margin),
            )
            return Verdict(margin=margin, precision_bits=bits, decided=False)
        bits = min(bits * 2, cap_bits)
        logger.debug("Escalating precision", label=label, bits=bits)
