"""
The roof function of the special flow.

Provides f = g + h_A with its exact values and derivatives, the reduction
phi_{alpha,m}, the regions A_m..F_m and the constant Phi_{alpha,m}.
"""

from ergoflow.core.exceptions import RegionUndefinedError, SingularPointError
from ergoflow.roof.functions import (
    eval_roof,
    eval_roof_deriv,
    h1_prime,
    phi_function,
    roof_form,
    roof_spec_for,
    roof_sum,
)
from ergoflow.roof.models import RegionFamily, RoofPart, RoofSpec
from ergoflow.roof.regions import (
    DECOMPOSITION,
    build_regions,
    decomposition_value,
    inverse_distance_integral,
    inverse_distance_variation,
    phi_bounds_report,
    phi_constant,
    phi_constant_direct,
    psi_decompose_check,
    require_hypotheses,
    variation_report,
)

__all__ = [
    "RegionUndefinedError",
    "SingularPointError",
    "eval_roof",
    "eval_roof_deriv",
    "h1_prime",
    "phi_function",
    "roof_form",
    "roof_spec_for",
    "roof_sum",
    "RegionFamily",
    "RoofPart",
    "RoofSpec",
    "DECOMPOSITION",
    "build_regions",
    "decomposition_value",
    "inverse_distance_integral",
    "inverse_distance_variation",
    "phi_bounds_report",
    "phi_constant",
    "phi_constant_direct",
    "psi_decompose_check",
    "require_hypotheses",
    "variation_report",
]
