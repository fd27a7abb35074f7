"""
Verification suites for ergoflow.

Each suite groups the checks of one family of inequalities; the runner selects
suites by name and runs them over a shared context.
"""

from ergoflow.suites.base import SuiteContext, VerificationSuite
from ergoflow.suites.builtin import get_all_suites
from ergoflow.suites.runner import SuiteRunner

__all__ = [
    "SuiteContext",
    "VerificationSuite",
    "get_all_suites",
    "SuiteRunner",
]
