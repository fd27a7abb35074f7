"""
Log-linear forms.

Exact symbolic values c0 + sum(c_i * log r_i) with rational coefficients and
positive rational arguments. Used for roof values, closed-form integrals and the
Phi constants, so that every comparison involving logarithms is decided through
a verified enclosure rather than a float.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Iterable, Optional, Union

from ergoflow.core.numerics import (
    MAX_PRECISION_BITS,
    DyadicAccumulator,
    Enclosure,
    Verdict,
    certify,
    default_precision_bits,
    log_enclosure,
)

Number = Union[int, Fraction]

# exact zero tests whose product would exceed this many bits are skipped
_ZERO_TEST_BIT_LIMIT = 1 << 20

# forms with more terms are enclosed term by term instead of grouped
_GROUPING_LIMIT = 64


def _canonical_terms(
    pairs: Iterable[tuple[Fraction, Fraction]],
) -> tuple[tuple[Fraction, Fraction], ...]:
    merged: dict[Fraction, Fraction] = {}
    for coef, arg in pairs:
        coef = Fraction(coef)
        arg = Fraction(arg)
        if arg <= 0:
            raise ValueError(f"log argument must be positive, got {arg}")
        if coef == 0 or arg == 1:
            continue
        merged[arg] = merged.get(arg, Fraction(0)) + coef
    return tuple(
        (coef, arg) for arg, coef in sorted(merged.items()) if coef != 0
    )


@dataclass(frozen=True)
class LogLinearForm:
    """A value c0 + sum(coef * log(arg)) kept in exact form."""

    constant: Fraction = Fraction(0)
    terms: tuple[tuple[Fraction, Fraction], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "constant", Fraction(self.constant))
        object.__setattr__(self, "terms", _canonical_terms(self.terms))

    @classmethod
    def rational(cls, value: Number) -> "LogLinearForm":
        return cls(constant=Fraction(value))

    @classmethod
    def log(cls, arg: Number, coef: Number = 1) -> "LogLinearForm":
        """The form coef * log(arg)."""
        return cls(terms=((Fraction(coef), Fraction(arg)),))

    @staticmethod
    def coerce(value: Union["LogLinearForm", Number]) -> "LogLinearForm":
        if isinstance(value, LogLinearForm):
            return value
        return LogLinearForm.rational(value)

    @classmethod
    def sum(cls, items: Iterable["LogLinearForm"]) -> "LogLinearForm":
        constant = Fraction(0)
        pairs: list[tuple[Fraction, Fraction]] = []
        for item in items:
            constant += item.constant
            pairs.extend(item.terms)
        return cls(constant=constant, terms=tuple(pairs))

    @property
    def is_rational(self) -> bool:
        return not self.terms

    def __add__(self, other: Union["LogLinearForm", Number]) -> "LogLinearForm":
        other = LogLinearForm.coerce(other)
        return LogLinearForm(
            constant=self.constant + other.constant,
            terms=self.terms + other.terms,
        )

    __radd__ = __add__

    def __neg__(self) -> "LogLinearForm":
        return self * -1

    def __sub__(self, other: Union["LogLinearForm", Number]) -> "LogLinearForm":
        return self + (-LogLinearForm.coerce(other))

    def __rsub__(self, other: Number) -> "LogLinearForm":
        return LogLinearForm.coerce(other) - self

    def __mul__(self, factor: Number) -> "LogLinearForm":
        factor = Fraction(factor)
        return LogLinearForm(
            constant=self.constant * factor,
            terms=tuple((coef * factor, arg) for coef, arg in self.terms),
        )

    __rmul__ = __mul__

    def __truediv__(self, divisor: Number) -> "LogLinearForm":
        return self * (1 / Fraction(divisor))

    def grouped(self) -> "LogLinearForm":
        """Merge arguments sharing a coefficient: c*log(a) + c*log(b) = c*log(ab)."""
        products: dict[Fraction, Fraction] = {}
        for coef, arg in self.terms:
            products[coef] = products.get(coef, Fraction(1)) * arg
        return LogLinearForm(
            constant=self.constant,
            terms=tuple((coef, arg) for coef, arg in products.items()),
        )

    def is_zero(self) -> Optional[bool]:
        """
        Exact zero test.

        The form is zero iff the constant vanishes and prod(arg^(D*coef)) == 1
        for D the common denominator of the coefficients (logs of rationals are
        rational-linearly dependent only through such identities, and a nonzero
        constant cannot cancel a log of a rational other than 1).

        Returns:
            True or False, or None if the product is too large to form.
        """
        if self.constant != 0:
            # exp of a nonzero rational is transcendental
            return False
        if not self.terms:
            return True
        scale = lcm(*(coef.denominator for coef, _ in self.terms))
        cost = sum(
            abs(coef * scale) * (arg.numerator.bit_length() + arg.denominator.bit_length())
            for coef, arg in self.terms
        )
        if cost > _ZERO_TEST_BIT_LIMIT:
            return None
        num, den = 1, 1
        for coef, arg in self.terms:
            power = int(coef * scale)
            if power >= 0:
                num *= arg.numerator**power
                den *= arg.denominator**power
            else:
                num *= arg.denominator ** (-power)
                den *= arg.numerator ** (-power)
        return num == den

    def enclose(self, bits: Optional[int] = None) -> Enclosure:
        """Verified enclosure of the value at the given precision."""
        bits = bits or default_precision_bits()
        guard = bits + max(8, len(self.terms).bit_length() + 4)
        terms = self.grouped().terms if len(self.terms) <= _GROUPING_LIMIT else self.terms
        total = DyadicAccumulator(guard)
        total.add(self.constant)
        for coef, arg in terms:
            total.add(log_enclosure(arg, guard) * coef)
        return total.enclosure().round_out(bits)

    def sign(
        self,
        start_bits: Optional[int] = None,
        cap_bits: int = MAX_PRECISION_BITS,
    ) -> Optional[int]:
        """Sign of the value, 0 when exactly zero, None when undecided at the cap."""
        if self.is_zero():
            return 0
        verdict = self.certify_nonnegative(start_bits, cap_bits)
        if not verdict.decided:
            return None
        return 1 if verdict.passed else -1

    def certify_nonnegative(
        self,
        start_bits: Optional[int] = None,
        cap_bits: int = MAX_PRECISION_BITS,
        label: str = "form",
    ) -> Verdict:
        """Certify value >= 0; an exactly-zero form is a decided pass."""
        if self.is_zero():
            return Verdict(
                margin=Enclosure.exact(0),
                precision_bits=start_bits or default_precision_bits(),
                decided=True,
            )
        return certify(self.enclose, start_bits=start_bits, cap_bits=cap_bits, label=label)

    def numeric(self, digits: int = 20) -> str:
        """Decimal shadow of the value."""
        return self.enclose(max(default_precision_bits(), 4 * digits)).to_decimal(digits)

    def to_payload(self, bits: Optional[int] = None) -> dict[str, Any]:
        """Serializable form: symbolic terms plus a decimal shadow."""
        bits = bits or default_precision_bits()
        return {
            "constant": fraction_str(self.constant),
            "symbolic_terms": [
                {"coef": fraction_str(coef), "log_arg": fraction_str(arg)}
                for coef, arg in self.terms
            ],
            "numeric": self.enclose(bits).to_decimal(),
            "precision_bits": bits,
        }

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "LogLinearForm":
        return cls(
            constant=Fraction(payload.get("constant", "0")),
            terms=tuple(
                (Fraction(term["coef"]), Fraction(term["log_arg"]))
                for term in payload.get("symbolic_terms", [])
            ),
        )

    def __str__(self) -> str:
        parts = [fraction_str(self.constant)] if self.constant or not self.terms else []
        for coef, arg in self.terms:
            parts.append(f"{fraction_str(coef)}*log({fraction_str(arg)})")
        return " + ".join(parts)


def fraction_str(value: Number) -> str:
    """Exact 'p/q' rendering; integers print without a denominator."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
