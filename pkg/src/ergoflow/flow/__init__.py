"""
The special flow over T under f.

Provides exact flow advancement, the rigidity sets E_k, the non-mixing criterion
checks and the correlation and unique-ergodicity diagnostics.
"""

from ergoflow.core.exceptions import ConstructionViolatedError, UnsupportedSetError
from ergoflow.flow.criterion import criterion_check, criterion_report, second_derivative_bound
from ergoflow.flow.models import CorrelationRow, FlowObservable, FlowPoint, RigiditySet
from ergoflow.flow.probes import (
    correlation_probe,
    deviation_measure,
    recurrence_times,
    roof_integral_for,
    ue_probe,
)
from ergoflow.flow.rigidity import DEFAULT_WIDTH, build_rigidity_set, rigidity_report, rigidity_set
from ergoflow.flow.special import flow_advance, flow_point, roof_integral

__all__ = [
    "ConstructionViolatedError",
    "UnsupportedSetError",
    "criterion_check",
    "criterion_report",
    "second_derivative_bound",
    "CorrelationRow",
    "FlowObservable",
    "FlowPoint",
    "RigiditySet",
    "correlation_probe",
    "deviation_measure",
    "recurrence_times",
    "roof_integral_for",
    "ue_probe",
    "DEFAULT_WIDTH",
    "build_rigidity_set",
    "rigidity_report",
    "rigidity_set",
    "flow_advance",
    "flow_point",
    "roof_integral",
]
