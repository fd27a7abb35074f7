"""
Regions A_m..F_m, the six-term decomposition of phi_{alpha,m} and Phi_{alpha,m}.

For m > 1 and w = ||q_{n_{m-1}} alpha||:

    phi = (-chi_F + chi_E - chi_A - 2 chi_C + chi_B - 2 chi_D) / ||x||

on T minus {0}, and

    Phi = int_E - int_A - 2 int_C + int_B - 2 int_D - log w

where int_S is the integral of 1/||x|| over S, a finite sum of logarithms of
endpoint ratios.
"""

from fractions import Fraction
from typing import Iterable, Optional

import structlog

from ergoflow.cf.arithmetic import denominator, dist_to_int
from ergoflow.core.exceptions import (
    InfiniteVariationError,
    PreconditionError,
    RegionUndefinedError,
    SingularPointError,
)
from ergoflow.core.logforms import LogLinearForm
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.metric import circle_dist
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.functions import h1_prime, phi_function
from ergoflow.roof.models import RegionFamily
from ergoflow.skew.models import SkewConfig, TowerLevel
from ergoflow.skew.tower import near_zero_hypothesis, tower_sequence

logger = structlog.get_logger(__name__)

_HALF = Fraction(1, 2)
_ONE = Fraction(1)

# region name -> coefficient in the decomposition of phi
DECOMPOSITION = {"F": -1, "E": 1, "A": -1, "C": -2, "B": 1, "D": -2}


def _towers(cfg: SkewConfig, m: int) -> tuple[TowerLevel, TowerLevel]:
    if m <= 1:
        raise RegionUndefinedError(f"regions need m > 1, got m = {m}")
    levels = tower_sequence(cfg, m)
    return levels[m - 1], levels[m]


def build_regions(cfg: SkewConfig, m: int) -> RegionFamily:
    """
    The six regions of level m from the towers U_{m-1} and U_m.

    Raises:
        RegionUndefinedError: If m <= 1.
    """
    prior, current = _towers(cfg, m)
    w = dist_to_int(denominator(cfg.schedule, cfg.schedule.checkpoint(m - 1)), cfg.angle)
    before = prior.U.project(1)
    after = current.U.project(1)
    left = (w, _HALF)
    right = (_HALF, 1 - w)
    family = RegionFamily(
        m=m,
        w=w,
        A_m=before.window(*left),
        B_m=before.window(*right),
        C_m=after.difference(before).window(*left),
        D_m=before.difference(after).window(*right),
        E_m=after.symdiff(before),
        F_m=TorusIntervalSet.from_arcs([(0, w, 0)]),
    )
    logger.debug(
        "Regions built",
        m=m,
        components={name: len(region) for name, region in family.named().items()},
    )
    return family


def decomposition_value(regions: RegionFamily, x: Fraction) -> Fraction:
    """Right-hand side of the six-term decomposition at x != 0."""
    if x == 0:
        raise SingularPointError(TorusPoint(x, 1), "phi")
    point = TorusPoint(x, 0)
    named = regions.named()
    weight = sum(coef for name, coef in DECOMPOSITION.items() if named[name].contains(point))
    return Fraction(weight) / circle_dist(x, 0)


def _level_pieces(s: TorusIntervalSet, level: int) -> Iterable[tuple[Fraction, Fraction]]:
    """Pieces of the level part, split at 1/2."""
    for iv in s.level(level):
        if iv.left < _HALF < iv.right:
            yield iv.left, _HALF
            yield _HALF, iv.right
        else:
            yield iv.left, iv.right


def inverse_distance_integral(s: TorusIntervalSet, level: int = 0) -> LogLinearForm:
    """
    Closed form of the integral of 1/||x|| over the level part of s.

    On [a, b) inside (0, 1/2] the integral is log(b/a); on [a, b) inside
    [1/2, 1) it is log((1 - a)/(1 - b)).

    Raises:
        SingularPointError: If the set touches 0, where the integral diverges.
    """
    forms: list[LogLinearForm] = []
    for a, b in _level_pieces(s, level):
        if b <= _HALF:
            if a == 0:
                raise SingularPointError(TorusPoint(a, level), "1/||x||")
            forms.append(LogLinearForm.log(b / a))
        else:
            if b == 1:
                raise SingularPointError(TorusPoint(Fraction(0), level), "1/||x||")
            forms.append(LogLinearForm.log((1 - a) / (1 - b)))
    return LogLinearForm.sum(forms)


def inverse_distance_variation(s: TorusIntervalSet, level: int = 0) -> Fraction:
    """
    Total variation over T of chi_S / ||x|| for the level part of s.

    The function is monotone between consecutive points of the endpoint set
    extended by 1/2, so the variation is the sum of the in-piece increments and
    the jumps at every breakpoint, cyclically.

    Raises:
        InfiniteVariationError: If a component has 0 in its closure.
    """
    ivs = s.level(level)
    if not ivs:
        return Fraction(0)
    points = sorted({Fraction(0), _HALF} | {p for iv in ivs for p in iv if p < 1})
    probe = TorusIntervalSet(ivs, ())

    def inside(a: Fraction) -> bool:
        return probe.contains(TorusPoint(a, 0))

    pieces = []
    for a, b in zip(points, points[1:] + [_ONE]):
        if a == b:
            continue
        pieces.append((a, b, inside(a)))
    total = Fraction(0)
    count = len(pieces)
    for index, (a, b, on) in enumerate(pieces):
        if on:
            if a == 0 or b == 1:
                raise InfiniteVariationError(a, b)
            total += abs(1 / circle_dist(b, 0) - 1 / circle_dist(a, 0))
        # jump at b between this piece's left limit and the next piece's right limit
        na, nb, non = pieces[(index + 1) % count]
        left_value = 1 / circle_dist(b, 0) if on else Fraction(0)
        right_value = 1 / circle_dist(na, 0) if non else Fraction(0)
        total += abs(left_value - right_value)
    return total


def phi_constant(cfg: SkewConfig, m: int, regions: Optional[RegionFamily] = None) -> LogLinearForm:
    """
    Phi_{alpha,m} in closed form.

    Raises:
        RegionUndefinedError: If m <= 1.
    """
    regions = regions or build_regions(cfg, m)
    named = regions.named()
    value = LogLinearForm.sum(
        inverse_distance_integral(named[name]) * coef
        for name, coef in DECOMPOSITION.items()
        if name != "F"
    ) - LogLinearForm.log(regions.w)
    logger.debug("Phi computed", m=m, terms=len(value.terms))
    return value


def phi_constant_direct(cfg: SkewConfig, m: int) -> LogLinearForm:
    """
    Phi_{alpha,m} straight from U_m: the integral of phi + chi_F/||x|| minus log w.

    Independent of the regions; near 0 only the part of F outside U_m on
    level 1 contributes.
    """
    _, current = _towers(cfg, m)
    w = dist_to_int(denominator(cfg.schedule, cfg.schedule.checkpoint(m - 1)), cfg.angle)
    upper = current.U.project(1)
    near = TorusIntervalSet.from_arcs([(0, w, 0)])
    left_part = upper.window(w, _HALF)
    right_part = upper.window(_HALF, 1)
    outside_near = near.difference(upper)
    return (
        inverse_distance_integral(right_part)
        - inverse_distance_integral(left_part)
        + inverse_distance_integral(outside_near)
        - LogLinearForm.log(w)
    )


def require_hypotheses(cfg: SkewConfig, m: int, M: Optional[int] = None) -> int:
    """
    Check 3 <= a_{n_m + 1} <= M and 2 sum_{s<=r} q_{n_s} < q_{n_r + 1} for r <= m.

    Returns:
        M, defaulting to a_{n_m + 1}.

    Raises:
        PreconditionError: If either hypothesis fails.
    """
    schedule = cfg.schedule
    n_m = schedule.checkpoint(m)
    if n_m + 1 > schedule.length:
        raise PreconditionError("a_(n_m+1) defined", f"schedule has {schedule.length} digits")
    digit = schedule.digit(n_m + 1)
    M = digit if M is None else M
    if not 3 <= digit <= M:
        raise PreconditionError("3 <= a_(n_m+1) <= M", f"a_{n_m + 1} = {digit}, M = {M}")
    if not near_zero_hypothesis(schedule, m):
        raise PreconditionError("2 sum_(s<=r) q_(n_s) < q_(n_r+1) for r <= m")
    return M


def psi_decompose_check(
    cfg: SkewConfig, m: int, sample: Iterable[Fraction]
) -> VerificationReport:
    """
    Pointwise check of the six-term decomposition of phi_{alpha,m}.

    Every sample point and every region endpoint (where the half-open regions
    give the right limits) is checked exactly; rows are emitted for mismatches
    and for the totals. The reduction h_1' = phi on U_m and the agreement of
    the two closed forms of Phi are checked as well.
    """
    regions = build_regions(cfg, m)
    _, current = _towers(cfg, m)
    report = VerificationReport(title="psi").with_constants(alpha=cfg.angle, m=m)

    points = sorted({Fraction(x) % 1 for x in sample} | set(regions.endpoints()))
    points = [x for x in points if x != 0]
    mismatches = 0
    for x in points:
        lhs = phi_function(current, x)
        rhs = decomposition_value(regions, x)
        if lhs != rhs:
            mismatches += 1
            report.add(
                CheckResult.exact("psi.pointwise", False, value=lhs, bound=rhs, k=m, sample=str(x))
            )
    report.add(
        CheckResult.exact(
            "psi.decomposition",
            mismatches == 0,
            value=len(points),
            margin=-mismatches,
            k=m,
            detail=f"{mismatches} mismatches over {len(points)} points",
        )
    )

    reduction_failures = 0
    for x in points:
        for level in (0, 1):
            z = TorusPoint(x, level)
            if current.U.contains(z) and h1_prime(z) != phi_function(current, x):
                reduction_failures += 1
    report.add(
        CheckResult.exact(
            "psi.reduction",
            reduction_failures == 0,
            value=len(points),
            margin=-reduction_failures,
            k=m,
            detail="h1' = phi on U_m",
        )
    )

    try:
        difference = phi_constant(cfg, m, regions) - phi_constant_direct(cfg, m)
        report.add(CheckResult.exact("psi.phi_closed_form", difference.is_zero() is True, k=m))
    except SingularPointError as exc:
        report.add(CheckResult.info("psi.phi_closed_form", k=m, detail=str(exc)))

    report.compute_summary()
    logger.info("Decomposition checked", m=m, points=len(points), mismatches=mismatches)
    return report


def variation_report(cfg: SkewConfig, m: int) -> VerificationReport:
    """
    Variation and integral bounds for the regions of level m.

    Var(chi_F/||x||) < 8 q_{n_m} q_{n_{m-1}+1} for F in A, B, C, D.
    Var(chi_E/||x||) < 8 (q_{n_m+1} + q_{n_m} + q_{n_m} log q_{n_m}).
    log q_{n_m} / (2(M + 2)) <= int_E <= 2 + 4 (1 + log q_{n_m}) / M,
    with M = a_{n_m+1}.

    Raises:
        PreconditionError: If the hypotheses on the schedule fail.
    """
    M = require_hypotheses(cfg, m)
    schedule = cfg.schedule
    regions = build_regions(cfg, m)
    n_m = schedule.checkpoint(m)
    q = denominator(schedule, n_m)
    q_next = denominator(schedule, n_m + 1)
    q_prev_next = denominator(schedule, schedule.checkpoint(m - 1) + 1)
    report = VerificationReport(title="variations").with_constants(alpha=cfg.angle, m=m, M=M)

    cell_bound = 8 * q * q_prev_next
    for name in ("A", "B", "C", "D"):
        var = inverse_distance_variation(regions.named()[name])
        report.add(
            CheckResult.exact(
                "variation.cell", var < cell_bound, value=var, bound=cell_bound, margin=cell_bound - var, k=m, sample=name
            )
        )

    var_e = inverse_distance_variation(regions.E_m)
    e_bound = LogLinearForm(constant=Fraction(8 * (q_next + q)), terms=((Fraction(8 * q), Fraction(q)),))
    report.add(
        CheckResult.from_verdict(
            "variation.E",
            (e_bound - var_e).certify_nonnegative(label="variation.E"),
            value=var_e,
            bound=e_bound,
            k=m,
            sample="E",
        )
    )

    integral = inverse_distance_integral(regions.E_m)
    lower = LogLinearForm.log(q, Fraction(1, 2 * (M + 2)))
    upper = 2 + (LogLinearForm.log(q) + 1) * Fraction(4, M)
    report.add(
        CheckResult.from_verdict(
            "integral.lower",
            (integral - lower).certify_nonnegative(label="integral.lower"),
            value=integral,
            bound=lower,
            k=m,
            sample="E",
        )
    )
    report.add(
        CheckResult.from_verdict(
            "integral.upper",
            (upper - integral).certify_nonnegative(label="integral.upper"),
            value=integral,
            bound=upper,
            k=m,
            sample="E",
        )
    )
    report.compute_summary()
    return report


def phi_bounds_report(
    cfg: SkewConfig, m: int, M: Optional[int] = None, slack: int = 18
) -> VerificationReport:
    """
    Two-sided bounds on Phi_{alpha,m}.

    log q_{n_m} / (2(M + 2)) - slack q_{n_{m-1}+1} <= Phi <= 4 log q_{n_m} / M + slack q_{n_{m-1}+1}
    and the class-level form log q_{n_m} / 10 - slack q <= Phi <= 10 log q_{n_m} + slack q.
    """
    M = require_hypotheses(cfg, m, M)
    schedule = cfg.schedule
    q = denominator(schedule, schedule.checkpoint(m))
    offset = slack * denominator(schedule, schedule.checkpoint(m - 1) + 1)
    phi = phi_constant(cfg, m)
    report = VerificationReport(title="phi").with_constants(
        alpha=cfg.angle, m=m, M=M, slack=slack
    )
    lower = LogLinearForm.log(q, Fraction(1, 2 * (M + 2))) - offset
    upper = LogLinearForm.log(q, Fraction(4, M)) + offset
    global_lower = LogLinearForm.log(q, Fraction(1, 10)) - offset
    global_upper = LogLinearForm.log(q, 10) + offset
    rows = (
        ("phi.lower", lower, phi - lower),
        ("phi.upper", upper, upper - phi),
        ("phi.global_lower", global_lower, phi - global_lower),
        ("phi.global_upper", global_upper, global_upper - phi),
    )
    for name, bound, margin in rows:
        report.add(
            CheckResult.from_verdict(
                name, margin.certify_nonnegative(label=name), value=phi, bound=bound, k=m
            )
        )
    report.compute_summary()
    return report
