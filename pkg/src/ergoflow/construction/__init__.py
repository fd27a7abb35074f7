"""
The inductive construction of the angle.

Provides the base and inductive stages of the digit schedule, the Phi window
search for t_k, the condition reports and the witness points.
"""

from ergoflow.construction.builder import (
    base_digit,
    base_stage,
    class_phi,
    construct,
    extend_stage,
    phi_window_search,
)
from ergoflow.construction.conditions import conditions_report, weighted_sum_report
from ergoflow.construction.models import (
    FORMAT_VERSION,
    ConstructionParams,
    ConstructionState,
    MagnitudeCertificate,
    StageRecord,
    WitnessCertificate,
)
from ergoflow.construction.witness import attach_witnesses, verify_witness, witness_points
from ergoflow.core.exceptions import StageInfeasibleError, WitnessNotFoundError

__all__ = [
    "base_digit",
    "base_stage",
    "class_phi",
    "construct",
    "extend_stage",
    "phi_window_search",
    "conditions_report",
    "weighted_sum_report",
    "FORMAT_VERSION",
    "ConstructionParams",
    "ConstructionState",
    "MagnitudeCertificate",
    "StageRecord",
    "WitnessCertificate",
    "attach_witnesses",
    "verify_witness",
    "witness_points",
    "StageInfeasibleError",
    "WitnessNotFoundError",
]
