"""
Exact interval sets on T x Z2.

A TorusIntervalSet is a finite disjoint union of half-open arcs with rational
endpoints on the two levels. The canonical form keeps, per level, a sorted tuple
of merged intervals [left, right) with 0 <= left < right <= 1; an arc wrapping
through 0 is stored as its two halves and reported merged by arcs().
"""

from __future__ import annotations

import json
from bisect import bisect_right
from fractions import Fraction
from math import floor
from typing import Any, Callable, Iterable, Iterator, Optional, Union

from ergoflow.core.logforms import fraction_str
from ergoflow.geometry.models import Arc, Interval, TorusPoint

Number = Union[int, Fraction]
Level = tuple[Interval, ...]

_ONE = Fraction(1)
_ZERO = Fraction(0)

_OPERATIONS: dict[str, Callable[[bool, bool], bool]] = {
    "union": lambda a, b: a or b,
    "intersect": lambda a, b: a and b,
    "difference": lambda a, b: a and not b,
    "symdiff": lambda a, b: a != b,
}


def _split(left: Fraction, length: Fraction) -> list[Interval]:
    """Pieces of the arc [left, left + length) inside [0, 1)."""
    if length <= 0:
        return []
    if length >= 1:
        return [Interval(_ZERO, _ONE)]
    left = left - floor(left)
    right = left + length
    if right <= 1:
        return [Interval(left, right)]
    return [Interval(left, _ONE), Interval(_ZERO, right - 1)]


def _normalize(pieces: Iterable[Interval]) -> Level:
    ordered = sorted(p for p in pieces if p.right > p.left)
    merged: list[Interval] = []
    for piece in ordered:
        if merged and piece.left <= merged[-1].right:
            if piece.right > merged[-1].right:
                merged[-1] = Interval(merged[-1].left, piece.right)
        else:
            merged.append(piece)
    return tuple(merged)


def _combine_level(a: Level, b: Level, op: Callable[[bool, bool], bool]) -> Level:
    points = sorted({p for iv in a for p in iv} | {p for iv in b for p in iv})
    result: list[Interval] = []
    ia = ib = 0
    for start, end in zip(points, points[1:]):
        while ia < len(a) and a[ia].right <= start:
            ia += 1
        while ib < len(b) and b[ib].right <= start:
            ib += 1
        in_a = ia < len(a) and a[ia].left <= start
        in_b = ib < len(b) and b[ib].left <= start
        if op(in_a, in_b):
            if result and result[-1].right == start:
                result[-1] = Interval(result[-1].left, end)
            else:
                result.append(Interval(start, end))
    return tuple(result)


class TorusIntervalSet:
    """Finite union of half-open arcs on T x Z2 in canonical form."""

    __slots__ = ("_levels", "_starts")

    def __init__(self, level0: Iterable[Interval] = (), level1: Iterable[Interval] = ()):
        self._levels: tuple[Level, Level] = (_normalize(level0), _normalize(level1))
        self._starts: Optional[tuple[list[Fraction], list[Fraction]]] = None

    # construction

    @classmethod
    def empty(cls) -> "TorusIntervalSet":
        return cls()

    @classmethod
    def full(cls, levels: Iterable[int] = (0, 1)) -> "TorusIntervalSet":
        return cls.from_arcs((0, 1, j) for j in levels)

    @classmethod
    def from_arcs(cls, arcs: Iterable[tuple[Number, Number, int]]) -> "TorusIntervalSet":
        """
        Build a set from (left, right, level) arcs.

        Arcs with right < left wrap through 0; right may also exceed 1. An arc of
        length at least 1 covers the whole level.
        """
        pieces: tuple[list[Interval], list[Interval]] = ([], [])
        for left, right, level in arcs:
            left, right = Fraction(left), Fraction(right)
            if right < left:
                right += 1
            pieces[level].extend(_split(left, right - left))
        return cls(pieces[0], pieces[1])

    @classmethod
    def arc(
        cls, left: Number, length: Number, levels: Iterable[int] = (0, 1)
    ) -> "TorusIntervalSet":
        """The arc [left, left + length) mod 1 on the given levels."""
        left, length = Fraction(left), Fraction(length)
        pieces = _split(left, length)
        levels = tuple(levels)
        by_level = [pieces if j in levels else [] for j in (0, 1)]
        return cls(by_level[0], by_level[1])

    @classmethod
    def on_both_levels(cls, circle: "TorusIntervalSet") -> "TorusIntervalSet":
        """Lift a circle set stored on level 0 to both levels."""
        return cls(circle._levels[0], circle._levels[0])

    @classmethod
    def _raw(cls, level0: Level, level1: Level) -> "TorusIntervalSet":
        obj = cls.__new__(cls)
        obj._levels = (level0, level1)
        obj._starts = None
        return obj

    # queries

    def level(self, j: int) -> Level:
        """Canonical intervals on level j."""
        return self._levels[j]

    @property
    def is_empty(self) -> bool:
        return not self._levels[0] and not self._levels[1]

    def level_length(self, j: int) -> Fraction:
        """Length of the level-j part as a subset of T."""
        return sum((iv.length for iv in self._levels[j]), _ZERO)

    def measure(self) -> Fraction:
        """Normalized measure: half the total length, in [0, 1]."""
        return (self.level_length(0) + self.level_length(1)) / 2

    def __iter__(self) -> Iterator[tuple[Fraction, Fraction, int]]:
        """Canonical components as (left, right, level), sorted by (level, left)."""
        for j in (0, 1):
            for iv in self._levels[j]:
                yield iv.left, iv.right, j

    def __len__(self) -> int:
        return len(self._levels[0]) + len(self._levels[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TorusIntervalSet):
            return NotImplemented
        return self._levels == other._levels

    def __hash__(self) -> int:
        return hash(self._levels)

    def __repr__(self) -> str:
        parts = [f"[{fraction_str(l)}, {fraction_str(r)})x{{{j}}}" for l, r, j in self]
        return f"TorusIntervalSet({' u '.join(parts) or 'empty'})"

    def arcs(self) -> list[Arc]:
        """Circle arcs with the halves of a wrapping arc merged (right may exceed 1)."""
        result: list[Arc] = []
        for j in (0, 1):
            ivs = list(self._levels[j])
            if len(ivs) >= 2 and ivs[0].left == 0 and ivs[-1].right == 1:
                first, last = ivs.pop(0), ivs.pop()
                ivs.append(Interval(last.left, first.right + 1))
            result.extend(Arc(iv.left, iv.right, j) for iv in ivs)
        return sorted(result, key=lambda a: (a.level, a.left))

    def component_count(self) -> int:
        return len(self.arcs())

    def _level_starts(self, j: int) -> list[Fraction]:
        if self._starts is None:
            self._starts = ([iv.left for iv in self._levels[0]], [iv.left for iv in self._levels[1]])
        return self._starts[j]

    def contains(self, point: TorusPoint) -> bool:
        x = point.x - floor(point.x)
        ivs = self._levels[point.level]
        i = bisect_right(self._level_starts(point.level), x) - 1
        return i >= 0 and x < ivs[i].right

    __contains__ = contains

    def component_of(self, point: TorusPoint) -> Optional[Arc]:
        """The merged circle arc containing the point, if any."""
        if not self.contains(point):
            return None
        x = point.x
        for arc in self.arcs():
            if arc.level != point.level:
                continue
            if arc.left <= x < arc.right or arc.left <= x + 1 < arc.right:
                return arc
        return None

    def discontinuities(self, j: int) -> list[Fraction]:
        """Points of T where the indicator of the level-j part jumps."""
        points: set[Fraction] = set()
        for iv in self._levels[j]:
            points.add(iv.left)
            points.add(iv.right - floor(iv.right))
        ivs = self._levels[j]
        if ivs and ivs[0].left == 0 and ivs[-1].right == 1:
            points.discard(_ZERO)
        return sorted(points)

    def issubset(self, other: "TorusIntervalSet") -> bool:
        return self.difference(other).is_empty

    def isdisjoint(self, other: "TorusIntervalSet") -> bool:
        return self.intersect(other).is_empty

    # algebra

    def combine(self, other: "TorusIntervalSet", op: str) -> "TorusIntervalSet":
        """Boolean combination: union, intersect, difference or symdiff."""
        try:
            fn = _OPERATIONS[op]
        except KeyError as exc:
            raise ValueError(f"unknown set operation '{op}'") from exc
        return TorusIntervalSet._raw(
            _combine_level(self._levels[0], other._levels[0], fn),
            _combine_level(self._levels[1], other._levels[1], fn),
        )

    def union(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        return self.combine(other, "union")

    def intersect(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        return self.combine(other, "intersect")

    def difference(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        return self.combine(other, "difference")

    def symdiff(self, other: "TorusIntervalSet") -> "TorusIntervalSet":
        return self.combine(other, "symdiff")

    __or__ = union
    __and__ = intersect
    __sub__ = difference
    __xor__ = symdiff

    def complement(self) -> "TorusIntervalSet":
        return TorusIntervalSet.full().difference(self)

    def translate(self, shift: Number) -> "TorusIntervalSet":
        """Shift every endpoint by `shift` mod 1; levels are kept."""
        shift = Fraction(shift)
        if shift - floor(shift) == 0:
            return self
        pieces = [
            [p for iv in self._levels[j] for p in _split(iv.left + shift, iv.length)]
            for j in (0, 1)
        ]
        return TorusIntervalSet(pieces[0], pieces[1])

    def flip_levels(self) -> "TorusIntervalSet":
        """Image under the involution (x, j) -> (x, j + 1)."""
        return TorusIntervalSet._raw(self._levels[1], self._levels[0])

    def level_slice(self, j: int) -> "TorusIntervalSet":
        """The part on level j, kept on level j."""
        if j == 0:
            return TorusIntervalSet._raw(self._levels[0], ())
        return TorusIntervalSet._raw((), self._levels[1])

    def project(self, j: int) -> "TorusIntervalSet":
        """Projection of the level-j part to T, stored on level 0."""
        return TorusIntervalSet._raw(self._levels[j], ())

    def window(self, left: Number, right: Number) -> "TorusIntervalSet":
        """Intersection with [left, right) on both levels (no wrap)."""
        return self.intersect(TorusIntervalSet.from_arcs([(left, right, 0), (left, right, 1)]))

    # serialization

    def to_payload(self) -> list[dict[str, Any]]:
        """Canonical components as {level, left, right} with exact fraction strings."""
        return [
            {"level": j, "left": fraction_str(l), "right": fraction_str(r)} for l, r, j in self
        ]

    @classmethod
    def from_payload(cls, payload: Iterable[dict[str, Any]]) -> "TorusIntervalSet":
        return cls.from_arcs(
            (Fraction(item["left"]), Fraction(item["right"]), int(item["level"]))
            for item in payload
        )

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2)


def set_combine(a: TorusIntervalSet, b: TorusIntervalSet, op: str) -> TorusIntervalSet:
    """Exact Boolean combination of two canonical sets."""
    return a.combine(b, op)


def set_translate(s: TorusIntervalSet, shift: Number) -> TorusIntervalSet:
    """Translate every arc by shift mod 1, levels unchanged."""
    return s.translate(shift)
