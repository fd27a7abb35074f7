"""
The non-mixing criterion at the built stages.

For each stage k with a witness (y_k, j_k) and q = q_(t_k):

    clearance          the q-orbit of (y_k, j_k) keeps 2c/q away from z1..z4
    return             q log q * d(T^q (y_k, j_k), (y_k, j_k)) against log q / a_(t_k+1), decaying in k
    derivative         |S_q(T, f')(y_k, j_k)| <= C q
    second_derivative  |S_q(T, f'')(x, j_k)| <= C q^2 for ||x - y_k|| <= c/q
    partial_sums       |S_j(T, f')(x, j_k)| <= C q log q for j < q

The second-derivative bound is certified on whole segments: every term of
f'' is at most coef / d^2 with d the distance from the rotated segment to the
pole, so a segment bound covers all of its points. Segments whose bound is too
weak are halved.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import floor
from typing import Optional

import structlog

from ergoflow.birkhoff.bounds import gamma_prime, h1_prime_function
from ergoflow.birkhoff.engine import (
    certified_report,
    closest_approach,
    form_at,
    info_report,
    lazy_sum,
    partial_sums,
)
from ergoflow.cf.arithmetic import dist_to_int
from ergoflow.construction.models import ConstructionState
from ergoflow.core.exceptions import PreconditionError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import Enclosure, default_precision_bits, log_enclosure
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.flow.rigidity import DEFAULT_WIDTH
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.functions import roof_spec_for
from ergoflow.roof.models import RoofSpec
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import lattice_for

logger = structlog.get_logger(__name__)

MAX_REFINEMENT = 6


def second_derivative_bound(
    cfg: SkewConfig, spec: RoofSpec, left: Fraction, right: Fraction, level: int, q: int
) -> Optional[Fraction]:
    """
    Upper bound of S_q(T, f'')(x, level) over x in [left, right].

    Returns None when a pole of f'' meets one of the rotated segments.
    """
    lattice = lattice_for(cfg, left, right, spec.x0, spec.x1)
    denom, step, slit = lattice
    start = lattice.encode(left % 1)
    width = lattice.encode(right - left)
    poles = (
        (lattice.encode(spec.x0), Fraction(3)),
        (lattice.encode(spec.x1), Fraction(1)),
    )
    centre_h = 0
    x = start
    current = level
    mixed = False
    total = Fraction(0)
    for s in range(q):
        if s:
            x = (x + step) % denom
            for end in (0, slit):
                if 0 < (end - x) % denom < width:
                    mixed = True
            if x < slit:
                current ^= 1
        terms = list(poles)
        if mixed or current == 1:
            terms.append((centre_h, spec.A))
        for centre, coef in terms:
            offset = (centre - x) % denom
            if offset <= width:
                return None
            d = min(offset - width, denom - offset)
            total += coef * Fraction(denom * denom, d * d)
    return total


def _segment_bound(
    cfg: SkewConfig, spec: RoofSpec, left: Fraction, right: Fraction, level: int, q: int, target: Fraction
) -> Optional[Fraction]:
    """Refine [left, right] until every piece's bound is below target; return the max."""
    pending = [(left, right, 0)]
    worst = Fraction(0)
    while pending:
        a, b, depth = pending.pop()
        bound = second_derivative_bound(cfg, spec, a, b, level, q)
        if bound is not None and bound < target:
            worst = max(worst, bound)
            continue
        if depth >= MAX_REFINEMENT:
            return bound
        mid = (a + b) / 2
        pending.extend([(mid, b, depth + 1), (a, mid, depth + 1)])
    return worst


def _first_derivative_sum(cfg: SkewConfig, spec: RoofSpec, q: int, z: TorusPoint):
    g_sum = lazy_sum(cfg, gamma_prime(spec), q, z)
    h_sum = lazy_sum(cfg, h1_prime_function(), q, z)
    return g_sum, h_sum


def _max_partial(cfg: SkewConfig, spec: RoofSpec, q: int, z: TorusPoint):
    """max_{j<q} |S_j(T, f')(z)| as a function of precision."""
    g_prime = gamma_prime(spec)
    h_prime = h1_prime_function()

    def compute(bits: int) -> Enclosure:
        lo, hi = Fraction(0), Fraction(0)
        streams = zip(partial_sums(cfg, g_prime, q - 1, z, bits), partial_sums(cfg, h_prime, q - 1, z, bits))
        for g_part, h_part in streams:
            a = abs(g_part + h_part * spec.A)
            lo, hi = max(lo, a.lo), max(hi, a.hi)
        return Enclosure(lo, hi)

    return compute


def criterion_check(
    state: ConstructionState,
    k: int,
    c: Fraction = DEFAULT_WIDTH,
    C: Optional[Fraction] = None,
    grid: int = 4,
    workers: int = 1,
    bits: Optional[int] = None,
) -> VerificationReport:
    """
    The criterion conditions at stage k.

    When C is not given, the smallest integer above the measured constant is
    used; the measured constant is always reported.

    Raises:
        PreconditionError: If stage k has no witness certificate.
    """
    cert = state.witness(k)
    if cert is None:
        raise PreconditionError("witness (y_k, j_k) certified", f"stage {k} has no witness")
    record = state.record(k)
    cfg = state.config()
    spec = roof_spec_for(cfg, record.A)
    alpha = cfg.angle
    q = state.q(record.t)
    z = cert.point
    y, j = z
    bits = bits or default_precision_bits()
    log_q = LogLinearForm.log(q)

    # first-derivative and partial sums, and the segments, measured before C is fixed
    g_sum, h_sum = _first_derivative_sum(cfg, spec, q, z)

    def derivative_value(b: int) -> Enclosure:
        return abs(g_sum(b) + h_sum(b) * spec.A)

    radius = c / q
    cuts = [y - radius + 2 * radius * i / grid for i in range(grid + 1)]
    samples = [y] + [x % 1 for x in cuts if x % 1 != y]
    partial_at = {x: _max_partial(cfg, spec, q, TorusPoint(x, j)) for x in samples}

    log_lo = log_enclosure(q, bits).lo
    measured = max(
        derivative_value(bits).hi / q,
        max(partial_at[x](bits).hi for x in samples) / (q * log_lo),
    )
    loose = Fraction(10**12) * q * q
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        segment_bounds = list(
            executor.map(
                lambda ab: _segment_bound(cfg, spec, ab[0], ab[1], j, q, loose),
                zip(cuts, cuts[1:]),
            )
        )
    finite = [b for b in segment_bounds if b is not None]
    if finite:
        measured = max(measured, max(finite) / (q * q))
    if C is None:
        C = Fraction(floor(measured) + 1)

    report = VerificationReport(title=f"criterion.k{k}").with_constants(
        c=c, C=C, q_t=q, A=spec.A, grid=grid
    )

    clearance = closest_approach(alpha, y, q, [spec.x0, spec.x1])
    target = 2 * c / q
    report.add(
        CheckResult.exact("clearance", clearance >= target, value=clearance, bound=target,
                          margin=clearance - target, k=k, sample=str(z))
    )

    buffer = dist_to_int(q, alpha)
    a_next = state.schedule.digit(record.t + 1)
    surrogate = log_q * (q * buffer)
    return_bound = log_q / a_next
    report.add(
        CheckResult.exact("return", q * buffer < Fraction(1, a_next), value=surrogate, bound=return_bound,
                          margin=return_bound - surrogate, k=k, sample=str(z),
                          detail="q log q ||q alpha|| < log q / a_(t_k+1)")
    )

    report.add(
        certified_report("derivative", derivative_value, lambda b: Enclosure.exact(C * q), sample=z, n=record.t,
                         q_n=q, bits=bits, k=k).to_check()
    )
    q_log_q = form_at(log_q * q)
    report.add(
        info_report("derivative.g", abs(g_sum(bits) - q_log_q(bits)), sample=z, n=record.t, q_n=q, bits=bits,
                    k=k, detail="|S(g') - q log q|").to_check()
    )
    report.add(
        info_report("derivative.h", abs(h_sum(bits) * spec.A + q_log_q(bits)), sample=z, n=record.t, q_n=q,
                    bits=bits, k=k, detail="|S(h_A') + q log q|").to_check()
    )

    second_target = C * q * q
    for (left, right), bound in zip(zip(cuts, cuts[1:]), segment_bounds):
        label = f"[{fraction_str(left % 1)}, {fraction_str(left % 1 + right - left)}] x {j}"
        if bound is None:
            report.add(CheckResult.exact("second_derivative", False, bound=second_target, k=k, sample=label,
                                         detail="segment meets a pole of f''"))
            continue
        report.add(
            CheckResult.exact("second_derivative", bound <= second_target, value=bound, bound=second_target,
                              margin=second_target - bound, k=k, sample=label,
                              detail="segment bound of S_q(T, f'')")
        )

    partial_bound = form_at(log_q * (C * q))
    for x in samples:
        point = TorusPoint(x, j)
        report.add(
            certified_report("partial_sums", partial_at[x], partial_bound, sample=point, n=record.t, q_n=q, bits=bits,
                             k=k, detail="max_(j<q) |S_j(T, f')|").to_check()
        )

    report.add(CheckResult.info("C.measured", value=measured, k=k, detail=f"C = {fraction_str(C)}"))
    report.compute_summary()
    logger.info("Criterion checked", k=k, q_t=q, C=fraction_str(C), failures=len(report.failures()))
    return report


def criterion_report(
    state: ConstructionState,
    c: Fraction = DEFAULT_WIDTH,
    C: Optional[Fraction] = None,
    grid: int = 4,
    workers: int = 1,
    bits: Optional[int] = None,
) -> VerificationReport:
    """
    The criterion conditions at every stage with a witness, plus the decay of
    the return surrogate.

    The report states margins per stage only; nothing about mixing is concluded
    from finitely many stages.
    """
    report = VerificationReport(title="criterion").with_constants(c=c)
    surrogates: list[tuple[int, LogLinearForm]] = []
    for record in state.records:
        cert = state.witness(record.k)
        if cert is None:
            report.add(CheckResult.info("criterion.skipped", k=record.k, detail="no witness"))
            continue
        report.extend(criterion_check(state, record.k, c, C, grid, workers, bits))
        q = state.q(record.t)
        surrogates.append((record.k, LogLinearForm.log(q, q * dist_to_int(q, state.alpha.value))))
    if len(surrogates) < 2:
        report.add(CheckResult.info("return.decay", detail="fewer than two stages"))
    for (k0, v0), (k1, v1) in zip(surrogates, surrogates[1:]):
        margin = v0 - v1
        report.add(
            CheckResult.from_verdict("return.decay", margin.certify_nonnegative(bits, label="return.decay"),
                                     value=v1, bound=v0, k=k1, detail=f"against stage {k0}")
        )
    report.add(
        CheckResult.info("criterion.scope", detail="finite-stage margins; the limit statement is not asserted")
    )
    report.compute_summary()
    return report
