"""
Verification reports.

Every verifier returns a VerificationReport: one CheckResult row per inequality
instance with the computed value, the bound it is held against, and the margin.
A failed inequality is a row with status FAILED, never an exception.
"""

from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Union

import structlog
from pydantic import BaseModel, Field

from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import Enclosure, Verdict

logger = structlog.get_logger(__name__)

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_UNDECIDED = 3

Quantity = Union[Enclosure, LogLinearForm, Fraction, int, float, str, None]


class CheckStatus(str, Enum):
    """Outcome of a single check."""

    PASSED = "passed"
    FAILED = "failed"
    UNDECIDED = "undecided"
    INFO = "info"


def describe(value: Quantity) -> str:
    """Render a quantity for a report cell."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, Enclosure):
        return value.to_decimal()
    if isinstance(value, LogLinearForm):
        if value.is_rational:
            return fraction_str(value.constant)
        return value.numeric()
    if isinstance(value, float):
        return repr(value)
    return fraction_str(value)


class CheckResult(BaseModel):
    """One verified inequality instance."""

    name: str = Field(..., description="Check identifier, e.g. 'phi.single' or 'tower.invariance'")
    k: Optional[int] = Field(default=None, description="Stage, level or index the check belongs to")
    sample: str = Field(default="", description="Sample point or instance label")
    value: str = Field(default="", description="Computed quantity")
    bound: str = Field(default="", description="Bound the quantity is compared against")
    margin: str = Field(default="", description="Slack of the inequality (>= 0 passes)")
    status: CheckStatus = Field(..., description="Outcome")
    precision_bits: Optional[int] = Field(default=None, description="Precision that decided the margin")
    detail: str = Field(default="", description="Free-form detail")

    @property
    def passed(self) -> bool:
        return self.status in (CheckStatus.PASSED, CheckStatus.INFO)

    @property
    def decided(self) -> bool:
        return self.status != CheckStatus.UNDECIDED

    @classmethod
    def from_verdict(
        cls,
        name: str,
        verdict: Verdict,
        value: Quantity = None,
        bound: Quantity = None,
        k: Optional[int] = None,
        sample: str = "",
        detail: str = "",
    ) -> "CheckResult":
        """Row for an enclosure-certified margin."""
        if not verdict.decided:
            status = CheckStatus.UNDECIDED
        elif verdict.passed:
            status = CheckStatus.PASSED
        else:
            status = CheckStatus.FAILED
        return cls(
            name=name,
            k=k,
            sample=sample,
            value=describe(value),
            bound=describe(bound),
            margin=describe(verdict.margin),
            status=status,
            precision_bits=verdict.precision_bits,
            detail=detail,
        )

    @classmethod
    def exact(
        cls,
        name: str,
        holds: bool,
        value: Quantity = None,
        bound: Quantity = None,
        margin: Quantity = None,
        k: Optional[int] = None,
        sample: str = "",
        detail: str = "",
    ) -> "CheckResult":
        """Row for a check decided in exact rational or set arithmetic."""
        return cls(
            name=name,
            k=k,
            sample=sample,
            value=describe(value),
            bound=describe(bound),
            margin=describe(margin),
            status=CheckStatus.PASSED if holds else CheckStatus.FAILED,
            detail=detail,
        )

    @classmethod
    def info(
        cls,
        name: str,
        value: Quantity = None,
        k: Optional[int] = None,
        sample: str = "",
        detail: str = "",
    ) -> "CheckResult":
        """Diagnostic row that never affects the verdict."""
        return cls(
            name=name,
            k=k,
            sample=sample,
            value=describe(value),
            status=CheckStatus.INFO,
            detail=detail,
        )


class VerificationReport(BaseModel):
    """A titled list of checks with the constants they were run under."""

    title: str = Field(..., description="Report title, usually the suite or verifier name")
    constants: dict[str, str] = Field(default_factory=dict, description="Constants the checks used")
    checks: list[CheckResult] = Field(default_factory=list, description="Check rows")
    summary: dict[str, int] = Field(default_factory=dict, description="Counts by status")
    sums: list[dict[str, Any]] = Field(
        default_factory=list, description="Birkhoff-sum rows behind the sum checks, in the sum-table schema"
    )

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        if check.status == CheckStatus.FAILED:
            logger.debug("Check failed", report=self.title, check=check.name, sample=check.sample)
        return check

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        """Append the rows of another report; its constants are merged in."""
        for key, value in other.constants.items():
            self.constants.setdefault(key, value)
        self.checks.extend(other.checks)
        self.sums.extend(other.sums)
        return self

    def add_sum(self, result: Any) -> CheckResult:
        """Add a Birkhoff-sum result as a check and keep its table row."""
        self.sums.append(result.to_row())
        return self.add(result.to_check())

    def with_constants(self, **constants: Any) -> "VerificationReport":
        for key, value in constants.items():
            self.constants[key] = str(value) if isinstance(value, bool) else describe(value)
        return self

    def compute_summary(self) -> None:
        """Compute the summary counts from checks."""
        self.summary = {status.value: 0 for status in CheckStatus}
        for check in self.checks:
            self.summary[check.status.value] += 1

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if c.status == CheckStatus.FAILED]

    def by_name(self, name: str) -> list[CheckResult]:
        return [c for c in self.checks if c.name == name]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def undecided(self) -> bool:
        return any(c.status == CheckStatus.UNDECIDED for c in self.checks)

    def exit_code(self) -> int:
        """0 when every check passes, 1 on a failed margin, 3 when only undecided rows remain."""
        if self.failures():
            return EXIT_FAILURE
        if self.undecided:
            return EXIT_UNDECIDED
        return EXIT_PASS
