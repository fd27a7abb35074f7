"""
Core plumbing for ergoflow.

Provides the error hierarchy, verified numerics, log-linear forms, verification
reports and run configuration shared by every other subpackage.
"""

from ergoflow.core.config import CommandName, ConfigLoader, OutputFormat, RunConfig, RunMode
from ergoflow.core.exceptions import ErgoflowError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import (
    DyadicAccumulator,
    Enclosure,
    Verdict,
    certify,
    default_precision_bits,
    log_enclosure,
)
from ergoflow.core.reports import CheckResult, CheckStatus, VerificationReport
from ergoflow.core.types import Rational, parse_fraction

__all__ = [
    "CommandName",
    "ConfigLoader",
    "OutputFormat",
    "RunConfig",
    "RunMode",
    "ErgoflowError",
    "LogLinearForm",
    "fraction_str",
    "DyadicAccumulator",
    "Enclosure",
    "Verdict",
    "certify",
    "default_precision_bits",
    "log_enclosure",
    "CheckResult",
    "CheckStatus",
    "VerificationReport",
    "Rational",
    "parse_fraction",
]
