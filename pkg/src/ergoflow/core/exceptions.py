"""
Custom exceptions for ergoflow.

Expected verification failures are never raised; they are recorded as rows of a
VerificationReport. The exceptions below signal malformed input, violated
preconditions, or objects that cannot be materialized.
"""

import math
from typing import Any, Optional


class ErgoflowError(Exception):
    """Base exception for all ergoflow errors."""
    pass


class ConfigError(ErgoflowError):
    """Invalid run configuration."""
    pass


class ScheduleFormatError(ErgoflowError):
    """A digit-schedule file could not be parsed."""
    pass


class InvalidScheduleError(ErgoflowError):
    """A digit schedule violates its invariants or yields an invalid slit."""
    pass


class InsufficientPrefixError(ErgoflowError):
    """More partial quotients were requested than the schedule provides."""

    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(
            f"Need {needed} partial quotients but only {available} are available"
        )


class ClassViolationError(ErgoflowError):
    """Two angles or schedules do not share the required digit prefix."""
    pass


class DegenerateAngleError(ErgoflowError):
    """The rotation angle is zero."""
    pass


class TowerDegenerateError(ErgoflowError):
    """The slit is too long for the tower recursion to be defined."""
    pass


class RegionUndefinedError(ErgoflowError):
    """Regions A_m..F_m are only defined for m > 1."""
    pass


class SingularPointError(ErgoflowError):
    """A roof function was evaluated at one of its singularities."""

    def __init__(self, point: Any, part: str = "f"):
        self.point = point
        self.part = part
        self.value = math.inf
        super().__init__(f"Roof part '{part}' is +inf at singular point {point}")


class SingularOrbitError(ErgoflowError):
    """An orbit hit a singularity exactly."""

    def __init__(self, index: int, point: Any):
        self.index = index
        self.point = point
        super().__init__(f"Orbit hits a singularity at index {index}: {point}")


class NotBoundedVariationError(ErgoflowError):
    """A function passed to a Denjoy-Koksma check is unbounded."""
    pass


class InfiniteVariationError(ErgoflowError):
    """A piece of a piecewise function has a pole in its closure."""

    def __init__(self, left: Any, right: Any):
        self.left = left
        self.right = right
        super().__init__(f"Piece [{left}, {right}) has infinite variation")


class PreconditionError(ErgoflowError):
    """A verifier was called outside the hypotheses of the bound it checks."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        self.detail = detail
        message = f"Precondition failed: {condition}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class StageInfeasibleError(ErgoflowError):
    """A construction stage could not be completed within the search caps."""

    def __init__(self, stage: int, constraint: str, detail: str = ""):
        self.stage = stage
        self.constraint = constraint
        self.detail = detail
        message = f"Stage {stage} infeasible: binding constraint {constraint}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class WitnessNotFoundError(ErgoflowError):
    """No admissible witness point passed all filters."""

    def __init__(self, k: int, diagnostics: Optional[dict[str, str]] = None):
        self.k = k
        self.diagnostics = diagnostics or {}
        super().__init__(f"No witness point found for k={k}: {self.diagnostics}")


class ConstructionViolatedError(ErgoflowError):
    """A sweep step of the rigidity set construction met a discontinuity."""

    def __init__(self, index: int, detail: str = ""):
        self.index = index
        self.detail = detail
        super().__init__(f"Rigidity sweep violated at step {index}: {detail}")


class UnsupportedSetError(ErgoflowError):
    """Only finite unions of intervals are supported as observables."""
    pass


class UndecidedComparisonError(ErgoflowError):
    """A comparison stayed undecided at the precision cap."""

    def __init__(self, what: str, precision_bits: int):
        self.what = what
        self.precision_bits = precision_bits
        super().__init__(
            f"Comparison '{what}' undecided at {precision_bits} bits"
        )
