"""
Points and intervals on T x Z2.
"""

from fractions import Fraction
from math import floor
from typing import NamedTuple, Union

Number = Union[int, Fraction]


class TorusPoint(NamedTuple):
    """A point (x, j) with x in [0, 1) and level j in {0, 1}."""

    x: Fraction
    level: int

    @classmethod
    def of(cls, x: Number, level: int = 0) -> "TorusPoint":
        """Build a point, reducing x mod 1."""
        if level not in (0, 1):
            raise ValueError(f"level must be 0 or 1, got {level}")
        x = Fraction(x)
        return cls(x - floor(x), level)

    def flipped(self) -> "TorusPoint":
        return TorusPoint(self.x, 1 - self.level)

    def __str__(self) -> str:
        return f"({self.x}, {self.level})"


class Interval(NamedTuple):
    """A half-open interval [left, right) with 0 <= left < right <= 1."""

    left: Fraction
    right: Fraction

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def midpoint(self) -> Fraction:
        return (self.left + self.right) / 2


class Arc(NamedTuple):
    """A circle arc [left, right) on one level; right may exceed 1 when it wraps."""

    left: Fraction
    right: Fraction
    level: int

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    @property
    def midpoint(self) -> Fraction:
        mid = (self.left + self.right) / 2
        return mid - floor(mid)
