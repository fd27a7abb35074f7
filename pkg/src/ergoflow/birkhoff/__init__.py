"""
Birkhoff sums for ergoflow.

Provides closed-form piecewise functions, exact and enclosed ergodic sums over
rotations and skew products, the Denjoy-Koksma check, and the verifiers of the
gamma and phi sum bounds.
"""

from ergoflow.birkhoff.bounds import (
    CLASS_DISCREPANCY,
    CLASS_SINGLE,
    CLASS_TOTAL,
    GAMMA_COEFFICIENTS,
    SINGLE_LINEAR,
    SINGLE_QUADRATIC,
    SumMode,
    class_threshold,
    gamma_bounds_check,
    gamma_pieces,
    gamma_prime,
    gamma_second,
    h1_prime_function,
    left_inverse_piece,
    left_piece,
    phi_piecewise,
    phi_sum_check,
    reduction_check,
    right_piece,
    u_point,
)
from ergoflow.birkhoff.engine import (
    EXACT_TERM_LIMIT,
    admissible_samples,
    birkhoff_sum,
    certified_report,
    closest_approach,
    cocycle_check,
    dk_check,
    integral,
    max_abs_partial_sum,
    partial_sums,
    variation,
)
from ergoflow.birkhoff.models import Piece, PiecewiseFunction, SumReport, Term, TermKind
from ergoflow.core.exceptions import (
    InfiniteVariationError,
    NotBoundedVariationError,
    PreconditionError,
    SingularOrbitError,
)

__all__ = [
    "CLASS_DISCREPANCY",
    "CLASS_SINGLE",
    "CLASS_TOTAL",
    "GAMMA_COEFFICIENTS",
    "SINGLE_LINEAR",
    "SINGLE_QUADRATIC",
    "SumMode",
    "class_threshold",
    "gamma_bounds_check",
    "gamma_pieces",
    "gamma_prime",
    "gamma_second",
    "h1_prime_function",
    "left_inverse_piece",
    "left_piece",
    "phi_piecewise",
    "phi_sum_check",
    "reduction_check",
    "right_piece",
    "u_point",
    "EXACT_TERM_LIMIT",
    "admissible_samples",
    "birkhoff_sum",
    "certified_report",
    "closest_approach",
    "cocycle_check",
    "dk_check",
    "integral",
    "max_abs_partial_sum",
    "partial_sums",
    "variation",
    "Piece",
    "PiecewiseFunction",
    "SumReport",
    "Term",
    "TermKind",
    "InfiniteVariationError",
    "NotBoundedVariationError",
    "PreconditionError",
    "SingularOrbitError",
]
