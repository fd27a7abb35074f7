"""
ergoflow: a verification lab for a non-mixing special flow over a Z2 skew
product of an irrational rotation.

Builds the angle stage by stage, verifies every explicit inequality the
construction rests on with exact arithmetic or certified enclosures, and runs
the special flow with exact rollovers.
"""

__version__ = "0.1.0"

from ergoflow.cf import DigitSchedule, ScheduleLoader
from ergoflow.construction import ConstructionParams, ConstructionState, attach_witnesses, construct
from ergoflow.core import ConfigLoader, RunConfig, VerificationReport
from ergoflow.flow import criterion_report, flow_advance, ue_probe
from ergoflow.suites import SuiteContext, SuiteRunner

__all__ = [
    "__version__",
    "DigitSchedule",
    "ScheduleLoader",
    "ConstructionParams",
    "ConstructionState",
    "attach_witnesses",
    "construct",
    "ConfigLoader",
    "RunConfig",
    "VerificationReport",
    "criterion_report",
    "flow_advance",
    "ue_probe",
    "SuiteContext",
    "SuiteRunner",
]
