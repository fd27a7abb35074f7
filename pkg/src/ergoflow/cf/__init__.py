"""
Continued fractions for ergoflow.

Provides digit schedules, exact convergents, best-approximation gaps, class
membership and the shared-cell property.
"""

from ergoflow.cf.arithmetic import (
    alternate_expansion,
    angle_denominator,
    approx_gap,
    class_check,
    class_members,
    convergents,
    denominator,
    denominators,
    dist_to_int,
    expand_fraction,
    frac_part,
    numerator,
    representative,
    same_cell_indices,
    sandwich_report,
    verify_same_cell,
)
from ergoflow.cf.loader import ScheduleLoader
from ergoflow.cf.models import AngleRep, Convergent, DigitSchedule, GapBound
from ergoflow.core.exceptions import (
    ClassViolationError,
    DegenerateAngleError,
    InsufficientPrefixError,
    InvalidScheduleError,
    ScheduleFormatError,
)

__all__ = [
    "alternate_expansion",
    "angle_denominator",
    "approx_gap",
    "class_check",
    "class_members",
    "convergents",
    "denominator",
    "denominators",
    "dist_to_int",
    "expand_fraction",
    "frac_part",
    "numerator",
    "representative",
    "same_cell_indices",
    "sandwich_report",
    "verify_same_cell",
    "ScheduleLoader",
    "AngleRep",
    "Convergent",
    "DigitSchedule",
    "GapBound",
    "ClassViolationError",
    "DegenerateAngleError",
    "InsufficientPrefixError",
    "InvalidScheduleError",
    "ScheduleFormatError",
]
