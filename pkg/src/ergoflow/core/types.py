"""
Shared pydantic field types.

Exact rationals travel as fractions.Fraction in Python and as "p/q" strings in
JSON and YAML.
"""

from fractions import Fraction
from typing import Annotated, Any

from pydantic import BeforeValidator, PlainSerializer

from ergoflow.core.logforms import fraction_str


def parse_fraction(value: Any) -> Fraction:
    """
    Coerce config and payload values to an exact rational.

    Accepts Fraction, int, "p/q" or decimal strings, and floats (through their
    shortest repr, so 0.1 becomes 1/10).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"not a rational: {value!r}")


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_fraction),
    PlainSerializer(fraction_str, return_type=str, when_used="json"),
]
