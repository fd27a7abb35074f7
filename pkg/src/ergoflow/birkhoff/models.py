"""
Birkhoff-sum data models.

A PiecewiseFunction is a right-continuous function on T (optionally supported on
one level of T x Z2) given by closed-form terms on half-open pieces. Every
constructor splits pieces at the poles and antipodes of its terms, so each term
is monotone on every piece.
"""

from bisect import bisect_right
from enum import Enum
from fractions import Fraction
from math import floor
from typing import Any, Iterable, NamedTuple, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ergoflow.core.exceptions import SingularPointError
from ergoflow.core.logforms import fraction_str
from ergoflow.core.numerics import Enclosure
from ergoflow.core.reports import CheckResult, CheckStatus
from ergoflow.core.types import Rational
from ergoflow.geometry.metric import circle_dist
from ergoflow.geometry.models import TorusPoint

Number = Union[int, Fraction]

_HALF = Fraction(1, 2)


class TermKind(str, Enum):
    """Closed-form shape of a term."""

    CONSTANT = "constant"
    INVERSE = "inverse"  # coef / ||x - centre||
    INVERSE_SQUARE = "inverse_square"  # coef / ||x - centre||^2
    LEFT_INVERSE = "left_inverse"  # coef / (centre - x), for x < centre
    LEFT_INVERSE_SQUARE = "left_inverse_square"  # coef / (centre - x)^2

    @property
    def has_pole(self) -> bool:
        return self != TermKind.CONSTANT


class Term(NamedTuple):
    kind: TermKind
    coef: Fraction
    centre: Fraction = Fraction(0)

    def value(self, x: Fraction) -> Fraction:
        """Exact value at x; raises at the pole."""
        if self.kind == TermKind.CONSTANT:
            return self.coef
        if self.kind in (TermKind.INVERSE, TermKind.INVERSE_SQUARE):
            d = circle_dist(x, self.centre)
        else:
            d = self.centre - x
            if d < 0:
                d += 1
        if d == 0:
            raise SingularPointError(TorusPoint(x, 0), self.kind.value)
        if self.kind in (TermKind.INVERSE_SQUARE, TermKind.LEFT_INVERSE_SQUARE):
            return self.coef / d**2
        return self.coef / d


class Piece(NamedTuple):
    left: Fraction
    right: Fraction
    terms: tuple[Term, ...]


class PiecewiseFunction:
    """Right-continuous closed-form function on T, optionally masked to one level."""

    __slots__ = ("pieces", "level_mask", "label", "_lefts")

    def __init__(
        self,
        pieces: Iterable[Piece],
        level_mask: Optional[int] = None,
        label: str = "",
    ):
        self.pieces: tuple[Piece, ...] = tuple(pieces)
        if not self.pieces or self.pieces[0].left != 0 or self.pieces[-1].right != 1:
            raise ValueError("pieces must cover [0, 1)")
        for a, b in zip(self.pieces, self.pieces[1:]):
            if a.right != b.left:
                raise ValueError(f"pieces are not contiguous at {a.right}")
        if level_mask not in (None, 0, 1):
            raise ValueError(f"level mask must be 0, 1 or None, got {level_mask}")
        self.level_mask = level_mask
        self.label = label
        self._lefts = [p.left for p in self.pieces]

    @classmethod
    def from_parts(
        cls,
        parts: Iterable[tuple[Number, Number, Term]],
        level_mask: Optional[int] = None,
        label: str = "",
    ) -> "PiecewiseFunction":
        """
        Sum of terms restricted to arcs [left, right) mod 1.

        An arc with right <= left wraps through 0 (an arc from a to a + 1 covers
        the circle). Breakpoints are added at every arc endpoint and at the pole
        and antipode of every term.
        """
        arcs: list[tuple[Fraction, Fraction, Term]] = []
        cuts: set[Fraction] = {Fraction(0)}
        for left, right, term in parts:
            left, right = Fraction(left), Fraction(right)
            if right - left >= 1:
                pieces = [(Fraction(0), Fraction(1))]
            else:
                a = left - floor(left)
                b = right - floor(right)
                if b == 0:
                    b = Fraction(1)
                pieces = [(a, b)] if a < b else [(a, Fraction(1)), (Fraction(0), b)]
            for a, b in pieces:
                arcs.append((a, b, term))
                cuts.update((a, b % 1))
            if term.kind.has_pole:
                cuts.add(term.centre % 1)
                if term.kind in (TermKind.INVERSE, TermKind.INVERSE_SQUARE):
                    cuts.add((term.centre + _HALF) % 1)
        points = sorted(cuts) + [Fraction(1)]
        result = []
        for a, b in zip(points, points[1:]):
            terms = tuple(t for l, r, t in arcs if l <= a and b <= r)
            result.append(Piece(a, b, terms))
        return cls(result, level_mask=level_mask, label=label)

    @classmethod
    def constant(cls, value: Number, label: str = "") -> "PiecewiseFunction":
        term = Term(TermKind.CONSTANT, Fraction(value))
        return cls([Piece(Fraction(0), Fraction(1), (term,))], label=label)

    @classmethod
    def step(
        cls, steps: Iterable[tuple[Number, Number, Number]], label: str = ""
    ) -> "PiecewiseFunction":
        """Step function from (left, right, value) arcs; values add where arcs overlap."""
        return cls.from_parts(
            ((l, r, Term(TermKind.CONSTANT, Fraction(v))) for l, r, v in steps), label=label
        )

    # queries

    def piece_at(self, x: Fraction) -> Piece:
        return self.pieces[bisect_right(self._lefts, x) - 1]

    def __call__(self, z: Union[TorusPoint, Number]) -> Fraction:
        """Exact value at a point of T or T x Z2."""
        if isinstance(z, TorusPoint):
            if self.level_mask is not None and z.level != self.level_mask:
                return Fraction(0)
            x = z.x
        else:
            x = Fraction(z)
        x = x - floor(x)
        return sum((t.value(x) for t in self.piece_at(x).terms), Fraction(0))

    @property
    def poles(self) -> list[Fraction]:
        """Centres of terms with a pole, sorted."""
        return sorted({t.centre % 1 for p in self.pieces for t in p.terms if t.kind.has_pole})

    def is_bounded(self) -> bool:
        """Whether no pole lies in the closure of a piece carrying its term."""
        for piece in self.pieces:
            for t in piece.terms:
                if t.kind.has_pole and touches_pole(piece, t):
                    return False
        return True

    def breakpoints(self) -> list[Fraction]:
        return list(self._lefts)

    def scaled(self, factor: Number) -> "PiecewiseFunction":
        factor = Fraction(factor)
        return PiecewiseFunction(
            (
                Piece(p.left, p.right, tuple(Term(t.kind, t.coef * factor, t.centre) for t in p.terms))
                for p in self.pieces
            ),
            level_mask=self.level_mask,
            label=self.label,
        )

    def __add__(self, other: "PiecewiseFunction") -> "PiecewiseFunction":
        if self.level_mask != other.level_mask:
            raise ValueError("cannot add functions with different level masks")
        parts = [(p.left, p.right, t) for f in (self, other) for p in f.pieces for t in p.terms]
        return PiecewiseFunction.from_parts(parts, level_mask=self.level_mask)

    def __repr__(self) -> str:
        return f"PiecewiseFunction({self.label or 'unnamed'}, pieces={len(self.pieces)})"


def touches_pole(piece: Piece, term: Term) -> bool:
    """Pole of the term in the closure of the piece."""
    c = term.centre % 1
    if piece.left <= c <= piece.right:
        return True
    return c == 0 and piece.right == 1


class SumReport(BaseModel):
    """One Birkhoff-sum inequality instance at one sample point."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = Field(..., description="Check identifier")
    sample_x: Rational = Field(..., description="Base coordinate of the sample")
    level: int = Field(default=0, description="Level of the sample")
    n: int = Field(..., description="Convergent index")
    q_n: int = Field(..., description="Number of terms")
    value: Enclosure = Field(..., description="Enclosure of the checked quantity")
    bound: Optional[Enclosure] = Field(default=None, description="Enclosure of the bound")
    margin: Optional[Enclosure] = Field(default=None, description="bound - value, >= 0 passes")
    status: CheckStatus = Field(..., description="Outcome")
    precision_bits: int = Field(..., description="Precision that decided the margin")
    closest_approach: Optional[Rational] = Field(
        default=None, description="Min distance of the orbit to the singularities"
    )
    k: Optional[int] = Field(default=None, description="Stage or level")
    detail: str = Field(default="", description="Free-form detail")

    @property
    def passed(self) -> bool:
        return self.status in (CheckStatus.PASSED, CheckStatus.INFO)

    @property
    def decided(self) -> bool:
        return self.status != CheckStatus.UNDECIDED

    def to_check(self) -> CheckResult:
        return CheckResult(
            name=self.name,
            k=self.k,
            sample=f"({fraction_str(self.sample_x)}, {self.level})",
            value=self.value.to_decimal(),
            bound=self.bound.to_decimal() if self.bound else "",
            margin=self.margin.to_decimal() if self.margin else "",
            status=self.status,
            precision_bits=self.precision_bits,
            detail=self.detail,
        )

    def to_row(self) -> dict[str, Any]:
        """Row of the birkhoff-sum CSV schema."""
        return {
            "sample_x": fraction_str(self.sample_x),
            "level": self.level,
            "n": self.n,
            "q_n": self.q_n,
            "value": self.value.to_decimal(),
            "bound": self.bound.to_decimal() if self.bound else "",
            "margin": self.margin.to_decimal() if self.margin else "",
            "passed": self.passed,
            "closest_approach": (
                fraction_str(self.closest_approach) if self.closest_approach is not None else ""
            ),
        }
