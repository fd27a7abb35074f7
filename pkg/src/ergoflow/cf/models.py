"""
Continued-fraction data models.

A DigitSchedule is the combinatorial identity of the rotation angle: a finite
prefix of partial quotients plus the checkpoint sequences of the construction.
"""

from fractions import Fraction
from typing import NamedTuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ergoflow.core.exceptions import InsufficientPrefixError
from ergoflow.core.types import Rational


def _strictly_increasing(values: list[int]) -> bool:
    return all(a < b for a, b in zip(values, values[1:]))


class DigitSchedule(BaseModel):
    """Partial quotients a_1..a_l and the checkpoint sequences n_k, t_k."""

    model_config = ConfigDict(frozen=True)

    digits: tuple[int, ...] = Field(..., description="Partial quotients a_1, ..., a_l")
    even_checkpoints: tuple[int, ...] = Field(
        default=(), description="Even checkpoints n_1 < n_2 < ..."
    )
    odd_checkpoints: tuple[int, ...] = Field(
        default=(), description="Window checkpoints t_1 < t_2 < ..."
    )
    M: int = Field(default=3, ge=1, description="Cap for the digits after odd-stage checkpoints")

    @field_validator("digits")
    @classmethod
    def _check_digits(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(d < 1 for d in value):
            raise ValueError("partial quotients must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_checkpoints(self) -> "DigitSchedule":
        n = list(self.even_checkpoints)
        if any(v <= 0 or v % 2 for v in n):
            raise ValueError(f"even checkpoints must be positive even integers: {n}")
        if not _strictly_increasing(n):
            raise ValueError(f"even checkpoints must be strictly increasing: {n}")
        t = list(self.odd_checkpoints)
        if any(v <= 0 for v in t) or not _strictly_increasing(t):
            raise ValueError(f"odd checkpoints must be positive and strictly increasing: {t}")
        # n_1, n_3, n_5, ... sit at even list positions
        for position in range(0, len(n), 2):
            index = n[position] + 1
            if index <= len(self.digits):
                digit = self.digits[index - 1]
                if not 3 <= digit <= self.M:
                    raise ValueError(
                        f"a_{index} = {digit} must lie in [3, {self.M}] "
                        f"after checkpoint n_{position + 1} = {n[position]}"
                    )
        return self

    @property
    def length(self) -> int:
        return len(self.digits)

    def digit(self, i: int) -> int:
        """The 1-based partial quotient a_i."""
        if i < 1 or i > len(self.digits):
            raise InsufficientPrefixError(i, len(self.digits))
        return self.digits[i - 1]

    def checkpoint(self, k: int) -> int:
        """The 1-based even checkpoint n_k."""
        if k < 1 or k > len(self.even_checkpoints):
            raise IndexError(f"checkpoint n_{k} not defined")
        return self.even_checkpoints[k - 1]

    def window(self, k: int) -> int:
        """The 1-based odd checkpoint t_k."""
        if k < 1 or k > len(self.odd_checkpoints):
            raise IndexError(f"checkpoint t_{k} not defined")
        return self.odd_checkpoints[k - 1]

    def extended(
        self,
        digits: tuple[int, ...] = (),
        even_checkpoints: tuple[int, ...] = (),
        odd_checkpoints: tuple[int, ...] = (),
    ) -> "DigitSchedule":
        """New schedule with digits and checkpoints appended."""
        return DigitSchedule(
            digits=self.digits + tuple(digits),
            even_checkpoints=self.even_checkpoints + tuple(even_checkpoints),
            odd_checkpoints=self.odd_checkpoints + tuple(odd_checkpoints),
            M=self.M,
        )

    def truncated(self, length: int) -> "DigitSchedule":
        """Same checkpoints with the digit list cut to its first `length` entries."""
        return DigitSchedule(
            digits=self.digits[:length],
            even_checkpoints=self.even_checkpoints,
            odd_checkpoints=self.odd_checkpoints,
            M=self.M,
        )


class Convergent(NamedTuple):
    """The convergent p_n/q_n."""

    n: int
    p: int
    q: int

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


class AngleRep(BaseModel):
    """A rational stand-in for the angle, sharing its first digits with a schedule."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Rational = Field(..., description="Exact rational in [0, 1)")
    matched_prefix_len: int = Field(default=0, ge=0, description="Leading digits shared with the schedule")

    @field_validator("value")
    @classmethod
    def _check_value(cls, value: Fraction) -> Fraction:
        if not 0 <= value < 1:
            raise ValueError(f"angle must lie in [0, 1), got {value}")
        return value


class GapBound(BaseModel):
    """Best-approximation bounds on |alpha - p_n/q_n|."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(..., description="Convergent index")
    lower: Rational = Field(..., description="1/(q_n(q_n + q_{n+1}))")
    upper: Rational = Field(..., description="1/(q_n q_{n+1})")
    positive: bool = Field(..., description="Sign of alpha - p_n/q_n (positive iff n even)")

    @property
    def sign(self) -> int:
        return 1 if self.positive else -1
