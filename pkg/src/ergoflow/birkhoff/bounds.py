"""
Closed-form test functions and the Birkhoff-sum bound verifiers.

gamma(x) = g(x, 0). Its derivative is the sum of five monotone pieces
A_t chi_{B_t}(x) / |x - x_i| with A = (-2, 2, 1, -1, 1):

    -2 chi_[x0, x0 + 1/2) / |x - x0|      2 chi_[x0 - 1/2, x0) / |x - x0|
    chi_[0, x0) / (x0 - x)
    -chi_[x1, x1 + 1/2) / |x - x1|        chi_[x1 - 1/2, x1) / |x - x1|

Each verifier returns one SumReport per inequality instance.
"""

from enum import Enum
from fractions import Fraction
from typing import Optional, Union

import structlog

from ergoflow.birkhoff.engine import (
    EXACT_TERM_LIMIT,
    birkhoff_sum,
    certified_report,
    closest_approach,
    form_at,
    info_report,
    lazy_sum,
    max_abs_partial_sum,
)
from ergoflow.birkhoff.models import PiecewiseFunction, SumReport, Term, TermKind
from ergoflow.cf.arithmetic import (
    angle_denominator,
    class_check,
    denominator,
    denominators,
    representative,
)
from ergoflow.cf.models import AngleRep, DigitSchedule
from ergoflow.core.exceptions import PreconditionError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import Enclosure, default_precision_bits
from ergoflow.core.reports import CheckResult, CheckStatus
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.models import RoofSpec
from ergoflow.roof.regions import phi_constant, require_hypotheses
from ergoflow.skew.models import SkewConfig, TowerLevel
from ergoflow.skew.tower import build_tower

logger = structlog.get_logger(__name__)

_HALF = Fraction(1, 2)

GAMMA_COEFFICIENTS = (-2, 2, 1, -1, 1)
CLOSEST_RETURN_FACTOR = 7
SANDWICH_SLACK = 4
SINGLE_LINEAR = 43
SINGLE_QUADRATIC = 64
CLASS_SINGLE = 107
CLASS_DISCREPANCY = 48
CLASS_TOTAL = 155
CLEARANCE_FACTOR = 16


class SumMode(str, Enum):
    """Which phi-sum bound to verify."""

    SINGLE = "single"
    CLASS = "class"
    DISCREPANCY = "discrepancy"


# function constructors


def right_piece(c: Fraction) -> PiecewiseFunction:
    """chi_[c, c + 1/2)(x) / |x - c|."""
    return PiecewiseFunction.from_parts(
        [(c, c + _HALF, Term(TermKind.INVERSE, Fraction(1), c))], label=f"right({c})"
    )


def left_piece(c: Fraction) -> PiecewiseFunction:
    """chi_[c - 1/2, c)(x) / |x - c|."""
    return PiecewiseFunction.from_parts(
        [(c - _HALF, c, Term(TermKind.INVERSE, Fraction(1), c))], label=f"left({c})"
    )


def left_inverse_piece(c: Fraction) -> PiecewiseFunction:
    """chi_[0, c)(x) / (c - x)."""
    return PiecewiseFunction.from_parts(
        [(0, c, Term(TermKind.LEFT_INVERSE, Fraction(1), c))], label=f"left_inverse({c})"
    )


def gamma_pieces(spec: RoofSpec) -> list[tuple[Fraction, PiecewiseFunction]]:
    """The five monotone pieces of gamma' as (A_t, chi_{B_t} / |x - x_i|)."""
    functions = [
        right_piece(spec.x0),
        left_piece(spec.x0),
        left_inverse_piece(spec.x0),
        right_piece(spec.x1),
        left_piece(spec.x1),
    ]
    return [(Fraction(a), f) for a, f in zip(GAMMA_COEFFICIENTS, functions)]


def gamma_prime(spec: RoofSpec) -> PiecewiseFunction:
    """gamma' as one function: the weighted sum of its five pieces."""
    parts = []
    for weight, f in gamma_pieces(spec):
        for piece in f.pieces:
            parts.extend(
                (piece.left, piece.right, Term(t.kind, t.coef * weight, t.centre))
                for t in piece.terms
            )
    return PiecewiseFunction.from_parts(parts, label="gamma'")


def gamma_second(spec: RoofSpec) -> PiecewiseFunction:
    """gamma'' = 2/||x - x0||^2 + chi_[0, x0)/(x0 - x)^2 + 1/||x - x1||^2."""
    return PiecewiseFunction.from_parts(
        [
            (spec.x0, spec.x0 + 1, Term(TermKind.INVERSE_SQUARE, Fraction(2), spec.x0)),
            (0, spec.x0, Term(TermKind.LEFT_INVERSE_SQUARE, Fraction(1), spec.x0)),
            (spec.x1, spec.x1 + 1, Term(TermKind.INVERSE_SQUARE, Fraction(1), spec.x1)),
        ],
        label="gamma''",
    )


def h1_prime_function() -> PiecewiseFunction:
    """h_1' on level 1: -1/||x|| on [0, 1/2), +1/||x|| on [1/2, 1)."""
    zero = Fraction(0)
    return PiecewiseFunction.from_parts(
        [
            (0, _HALF, Term(TermKind.INVERSE, Fraction(-1), zero)),
            (_HALF, 1, Term(TermKind.INVERSE, Fraction(1), zero)),
        ],
        level_mask=1,
        label="h1'",
    )


def phi_piecewise(tower: TowerLevel) -> PiecewiseFunction:
    """phi_{alpha,m} on T, read off U_m on level 1."""
    upper = tower.U.project(1)
    zero = Fraction(0)
    parts = [(l, r, Term(TermKind.INVERSE, Fraction(-1), zero)) for l, r, _ in upper.window(0, _HALF)]
    parts += [(l, r, Term(TermKind.INVERSE, Fraction(1), zero)) for l, r, _ in upper.window(_HALF, 1)]
    return PiecewiseFunction.from_parts(parts, label=f"phi_{tower.m}")


def u_point(tower: TowerLevel, x: Fraction) -> TorusPoint:
    """The lift of x that lies in U_m."""
    z = TorusPoint.of(x, 0)
    return z if tower.U.contains(z) else z.flipped()


# gamma bounds


def gamma_bounds_check(
    alpha: Union[AngleRep, Fraction],
    spec: RoofSpec,
    n: int,
    x: Fraction,
    K_second: Optional[Fraction] = None,
    bits: Optional[int] = None,
) -> list[SumReport]:
    """
    Birkhoff sums of gamma' and gamma'' over q_n steps of the rotation.

    With delta the closest approach of the orbit to {x0, x1} and
    r = 1/delta + q_n (4 + log(2/x0)), the rows are:

    - gamma.closest_return: |S_{q_n}(gamma') - q_n log q_n| <= 7 r
    - gamma.partial: max_{j<q_n} |S_j(gamma')| <= 7 q_n log q_n + 7 r
    - gamma.corollary: the measured |S - q_n log q_n| / q_n (info)
    - gamma.second: S_{q_n}(gamma'') delta^2, checked against K_second when given
    - gamma.sandwich.*: the two sides of each one-sided sandwich display
    - gamma.pieces: the five weighted piece sums add up to the whole sum

    Raises:
        SingularOrbitError: If the orbit hits x0 or x1.
    """
    bits = bits or default_precision_bits()
    q = angle_denominator(alpha, n)
    z = TorusPoint.of(x)
    whole = lazy_sum(alpha, gamma_prime(spec), q, z)
    whole(bits)

    deltas = [closest_approach(alpha, z.x, q, [c]) for c in (spec.x0, spec.x1)]
    delta = min(deltas)
    qlogq = LogLinearForm.log(q, q)
    log_term = LogLinearForm.log(2 / spec.x0, q)
    r = LogLinearForm.rational(1 / delta + SANDWICH_SLACK * q) + log_term
    qlogq_at = form_at(qlogq)

    def row(name, value_at, bound, upper=True, detail=""):
        bound_at = form_at(LogLinearForm.coerce(bound))
        return certified_report(
            name, value_at, bound_at, sample=z, n=n, q_n=q, upper=upper, bits=bits,
            closest=delta, detail=detail,
        )

    reports = [
        row(
            "gamma.closest_return",
            lambda b: abs(whole(b) - qlogq_at(b)),
            r * CLOSEST_RETURN_FACTOR,
        ),
        row(
            "gamma.partial",
            lambda b: max_abs_partial_sum(alpha, gamma_prime(spec), q, z, bits=b),
            qlogq * CLOSEST_RETURN_FACTOR + r * CLOSEST_RETURN_FACTOR,
        ),
        info_report(
            "gamma.corollary",
            abs(whole(bits) - qlogq_at(bits)) / q,
            sample=z, n=n, q_n=q, bits=bits, closest=delta,
            detail=f"clearance c = {fraction_str(delta * q)}",
        ),
    ]

    second = lazy_sum(alpha, gamma_second(spec), q, z)
    measured = second(bits) * (delta * delta)
    if K_second is None:
        reports.append(
            info_report(
                "gamma.second", measured, sample=z, n=n, q_n=q, bits=bits, closest=delta,
                detail="S(gamma'') delta^2",
            )
        )
    else:
        reports.append(row("gamma.second", second, Fraction(K_second) / (delta * delta)))

    sums = [lazy_sum(alpha, f, q, z) for _, f in gamma_pieces(spec)]
    for i, (d_i, right, left) in enumerate(((deltas[0], sums[0], sums[1]), (deltas[1], sums[3], sums[4]))):
        tag = f"x{i}"
        reports.append(
            row(f"gamma.sandwich.right.{tag}.upper", lambda b, s=right: qlogq_at(b) - s(b), SANDWICH_SLACK * q)
        )
        reports.append(
            row(
                f"gamma.sandwich.right.{tag}.lower",
                lambda b, s=right: qlogq_at(b) - s(b),
                -(1 / d_i) - SANDWICH_SLACK * q,
                upper=False,
            )
        )
        reports.append(
            row(
                f"gamma.sandwich.left.{tag}.lower",
                lambda b, s=left: s(b) - qlogq_at(b),
                -SANDWICH_SLACK * q,
                upper=False,
            )
        )
        reports.append(
            row(
                f"gamma.sandwich.left.{tag}.upper",
                lambda b, s=left: s(b) - qlogq_at(b),
                1 / d_i + SANDWICH_SLACK * q,
            )
        )
    inverse = sums[2]
    reports.append(
        row(
            "gamma.sandwich.left_inverse.lower",
            lambda b: inverse(b) - qlogq_at(b),
            log_term - SANDWICH_SLACK * q,
            upper=False,
        )
    )
    reports.append(
        row(
            "gamma.sandwich.left_inverse.upper",
            lambda b: inverse(b) - qlogq_at(b),
            log_term + (1 / delta + SANDWICH_SLACK * q),
        )
    )
    reports.append(_pieces_row(whole, sums, z, n, q, bits, delta))

    failed = sum(1 for rep in reports if rep.status == CheckStatus.FAILED)
    logger.info("Gamma bounds checked", n=n, q_n=q, x=str(z.x), failed=failed)
    return reports


def _pieces_row(whole, sums, z, n, q, bits, delta) -> SumReport:
    """Weighted piece sums against the whole sum: exact for short orbits."""
    combined = Enclosure.exact(0)
    for weight, s in zip(GAMMA_COEFFICIENTS, sums):
        combined = combined + s(bits) * weight
    value = whole(bits)
    if q <= EXACT_TERM_LIMIT:
        holds = value == combined
    else:
        holds = value.lo <= combined.hi and combined.lo <= value.hi
    return SumReport(
        name="gamma.pieces",
        sample_x=z.x,
        level=z.level,
        n=n,
        q_n=q,
        value=value,
        bound=combined,
        margin=Enclosure.exact(0) if holds else None,
        status=CheckStatus.PASSED if holds else CheckStatus.FAILED,
        precision_bits=bits,
        closest_approach=delta,
        detail="sum of A_t S(piece_t), sum A_t = 1",
    )


# phi sums


def class_threshold(schedule: DigitSchedule, m: int) -> int:
    """
    ell_0 = min{ell : q_ell > q_{n_m}^2}.

    Raises:
        PreconditionError: If the schedule ends before q_ell exceeds q_{n_m}^2.
    """
    target = denominator(schedule, schedule.checkpoint(m)) ** 2
    for ell, q in enumerate(denominators(schedule)):
        if q > target:
            return ell
    raise PreconditionError(
        "q_ell > q_(n_m)^2 within the schedule", f"need q above {target}"
    )


def _require_member(alpha: AngleRep, schedule: DigitSchedule, ell: int) -> None:
    if not class_check(alpha, schedule, ell):
        raise PreconditionError(
            f"angle in the class of the first {ell} digits", f"alpha = {alpha.value}"
        )


def phi_sum_check(
    cfg: SkewConfig,
    m: int,
    n: int,
    z: TorusPoint,
    which: Union[SumMode, str] = SumMode.SINGLE,
    other: Optional[AngleRep] = None,
    M: Optional[int] = None,
    bits: Optional[int] = None,
) -> list[SumReport]:
    """
    Bounds on S_{q_n}(T_{alpha,m}, h_1')(z) + q_n log q_n - q_n Phi.

    single checks the single-angle bound 43 q_n + 64 q_{n_m}^2 against
    Phi_{alpha,m}; class checks 155 q_n against Phi of the class anchor, with
    the sub-margins 107 q_n (own Phi) and 48 q_n (discrepancy) reported
    separately; discrepancy checks |Phi_{alpha,m} - Phi_{other,m}| < 12(M + 1)
    and ignores n and z apart from labelling the row.

    Raises:
        PreconditionError: If z is not in U_m, the orbit comes closer than
            1/(16 q_n) to 0, or a hypothesis of the bound fails.
    """
    which = SumMode(which)
    bits = bits or default_precision_bits()
    z = TorusPoint.of(z.x, z.level)
    schedule = cfg.schedule
    n_m = schedule.checkpoint(m)
    q_nm = denominator(schedule, n_m)

    if which == SumMode.DISCREPANCY:
        return [_discrepancy(cfg, m, z, other, M, bits)]

    M = require_hypotheses(cfg, m, 3 if which == SumMode.CLASS else M)
    tower = build_tower(cfg, m)
    if not tower.U.contains(z):
        raise PreconditionError("z in U_m", f"z = {z}, m = {m}")
    q = angle_denominator(cfg.alpha, n)
    clearance = closest_approach(cfg.alpha, z.x, q, [Fraction(0)])
    if clearance < Fraction(1, CLEARANCE_FACTOR * q):
        raise PreconditionError(
            "min_(k<q_n) ||x + k alpha|| >= 1/(16 q_n)", f"clearance {fraction_str(clearance)}"
        )

    total = lazy_sum(cfg.truncated(m), h1_prime_function(), q, z)
    qlogq = LogLinearForm.log(q, q)

    def deviation(phi: LogLinearForm):
        shift = form_at(qlogq - phi * q)
        return lambda b: abs(total(b) + shift(b))

    def row(name, value_at, bound):
        bound_at = form_at(LogLinearForm.coerce(bound))
        return certified_report(
            name, value_at, bound_at, sample=z, n=n, q_n=q, bits=bits, closest=clearance, k=m
        )

    if which == SumMode.SINGLE:
        if n <= n_m + 1:
            raise PreconditionError("n > n_m + 1", f"n = {n}, n_m = {n_m}")
        phi = phi_constant(cfg, m)
        report = row("phi.single", deviation(phi), SINGLE_LINEAR * q + SINGLE_QUADRATIC * q_nm**2)
        logger.debug("Phi sum checked", mode=which.value, m=m, n=n, status=report.status.value)
        return [report]

    ell0 = class_threshold(schedule, m)
    _require_member(cfg.alpha, schedule, ell0)
    if n < ell0:
        raise PreconditionError("n >= ell_0", f"n = {n}, ell_0 = {ell0}")
    anchor = representative(schedule, ell0)
    phi_class = phi_constant(cfg.with_alpha(anchor), m)
    phi_own = phi_constant(cfg, m)
    discrepancy = form_at((phi_class - phi_own) * q)
    reports = [
        row("phi.class.own", deviation(phi_own), CLASS_SINGLE * q),
        row("phi.class.discrepancy", lambda b: abs(discrepancy(b)), CLASS_DISCREPANCY * q),
        row("phi.class", deviation(phi_class), CLASS_TOTAL * q),
    ]
    logger.debug("Phi sum checked", mode=which.value, m=m, n=n, ell0=ell0)
    return reports


def _discrepancy(
    cfg: SkewConfig, m: int, z: TorusPoint, other: Optional[AngleRep], M: Optional[int], bits: int
) -> SumReport:
    if other is None:
        raise PreconditionError("a second class member", "pass other=")
    schedule = cfg.schedule
    M = require_hypotheses(cfg, m, M)
    ell0 = class_threshold(schedule, m)
    if ell0 <= schedule.checkpoint(m):
        raise PreconditionError("ell > n_m", f"ell_0 = {ell0}")
    _require_member(cfg.alpha, schedule, ell0)
    _require_member(other, schedule, ell0)
    difference = form_at(phi_constant(cfg, m) - phi_constant(cfg.with_alpha(other), m))
    bound = Enclosure.exact(12 * (M + 1))
    return certified_report(
        "discrepancy",
        lambda b: abs(difference(b)),
        lambda b: bound,
        sample=z,
        n=ell0,
        q_n=denominator(schedule, ell0),
        bits=bits,
        k=m,
        detail=f"beta = {fraction_str(other.value)}, M = {M}",
    )


def reduction_check(cfg: SkewConfig, m: int, z: TorusPoint, n: int) -> CheckResult:
    """
    S_n(T_{alpha,m}, h_1')(z) = S_n(R_alpha, phi_{alpha,m})(x) for z in U_m, exactly.

    Raises:
        PreconditionError: If z is not in U_m.
    """
    tower = build_tower(cfg, m)
    if not tower.U.contains(z):
        raise PreconditionError("z in U_m", f"z = {z}, m = {m}")
    lhs = birkhoff_sum(cfg.truncated(m), h1_prime_function(), n, z, exact=True).lo
    rhs = birkhoff_sum(cfg.alpha, phi_piecewise(tower), n, z.x, exact=True).lo
    return CheckResult.exact(
        "reduction", lhs == rhs, value=lhs, bound=rhs, margin=rhs - lhs, k=m, sample=str(z)
    )
