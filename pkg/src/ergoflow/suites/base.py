"""
Verification suites.

Provides the base class every suite derives from and the context suites read
their inputs from.
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Optional

import structlog
from pydantic import BaseModel, ConfigDict, Field

from ergoflow.cf.arithmetic import denominators, representative
from ergoflow.cf.models import DigitSchedule
from ergoflow.construction.models import ConstructionState
from ergoflow.core.exceptions import PreconditionError, RegionUndefinedError, TowerDegenerateError
from ergoflow.core.numerics import default_precision_bits
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.core.types import Rational
from ergoflow.flow.rigidity import DEFAULT_WIDTH
from ergoflow.skew.models import SkewConfig

logger = structlog.get_logger(__name__)

DEFAULT_A = Fraction(6, 5)


class SuiteContext(BaseModel):
    """Inputs shared by all suites of one run."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    schedule: DigitSchedule = Field(..., description="Digit schedule under test")
    state: Optional[ConstructionState] = Field(default=None, description="Construction state, if any")
    bits: int = Field(default_factory=default_precision_bits, description="Starting precision")
    workers: int = Field(default=1, ge=1, description="Worker threads")
    seed: int = Field(default=0, description="Seed for sampled checks")
    samples: int = Field(default=8, ge=1, description="Sample points per instance")
    max_q: int = Field(default=2000, ge=2, description="Largest q_n a sampled sum runs over")
    c: Rational = Field(default=DEFAULT_WIDTH, description="Rigidity width constant")
    C: Optional[Rational] = Field(default=None, description="Criterion constant; measured when None")
    eps: Rational = Field(default=Fraction(1, 10), description="Deviation threshold of the ue suite")

    @classmethod
    def from_state(cls, state: ConstructionState, **kwargs) -> "SuiteContext":
        return cls(schedule=state.schedule, state=state, **kwargs)

    def config(self) -> SkewConfig:
        if self.state is not None:
            return self.state.config()
        return SkewConfig(alpha=representative(self.schedule), schedule=self.schedule)

    @property
    def A(self) -> Fraction:
        if self.state is not None and self.state.records:
            return self.state.records[-1].A
        return DEFAULT_A

    def largest_index(self, minimum: int = 1) -> Optional[int]:
        """Largest n >= minimum with q_n <= max_q within the schedule."""
        qs = denominators(self.schedule)
        found = None
        for n in range(minimum, min(len(qs), self.schedule.length)):
            if qs[n] <= self.max_q:
                found = n
        return found

    def constants(self) -> dict[str, str]:
        header = {"bits": str(self.bits), "samples": str(self.samples), "max_q": str(self.max_q)}
        if self.state is not None:
            header.update(self.state.params.constants())
        return header


class VerificationSuite(ABC):
    """Base class for verification suites."""

    name: str
    title: str
    description: str

    @abstractmethod
    def run(self, context: SuiteContext) -> VerificationReport:
        """
        Run every check of the suite.

        Args:
            context: Shared inputs of the run.

        Returns:
            The suite report, titled with the suite name.
        """

    def new_report(self, context: SuiteContext) -> VerificationReport:
        report = VerificationReport(title=self.name)
        report.constants.update(context.constants())
        return report

    def guarded(
        self, report: VerificationReport, label: str, check: Callable[[], None], k: Optional[int] = None
    ) -> None:
        """Run one instance; an unmet hypothesis becomes an info row instead of an error."""
        try:
            check()
        except (PreconditionError, RegionUndefinedError, TowerDegenerateError) as exc:
            logger.debug("Instance skipped", suite=self.name, instance=label, reason=str(exc))
            report.add(CheckResult.info(f"{self.name}.skipped", k=k, sample=label, detail=str(exc)))
