"""
Condition checks on a construction state.

Finitary conditions are checked exactly or with certified enclosures; limit
conditions are reported through their finite-stage quantity together with a
decay check across the stages built so far.
"""

from fractions import Fraction
from typing import Optional

import structlog

from ergoflow.birkhoff.bounds import CLASS_TOTAL, h1_prime_function
from ergoflow.birkhoff.engine import certified_report, form_at, info_report, lazy_sum
from ergoflow.cf.arithmetic import dist_to_int
from ergoflow.core.logforms import LogLinearForm
from ergoflow.core.numerics import log_enclosure
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.construction.builder import ODD_DIGIT, base_digit, phi_window_search
from ergoflow.construction.models import ConstructionState
from ergoflow.construction.witness import witness_points

logger = structlog.get_logger(__name__)

_LOG2 = LogLinearForm.log(2)


def _certified(report: VerificationReport, name: str, margin: LogLinearForm, k: int,
               value=None, bound=None, detail: str = "") -> None:
    report.add(
        CheckResult.from_verdict(
            name, margin.certify_nonnegative(label=name), value=value, bound=bound, k=k, detail=detail
        )
    )


def _decay(
    report: VerificationReport, name: str, values: list[tuple[int, Fraction]], increasing: bool = False
) -> None:
    """Strict decrease (or increase) of a finite-stage quantity across consecutive indices."""
    if len(values) < 2:
        report.add(CheckResult.info(name, detail="fewer than two stages"))
        return
    for (k0, v0), (k1, v1) in zip(values, values[1:]):
        margin = v1 - v0 if increasing else v0 - v1
        report.add(
            CheckResult.exact(name, margin > 0, value=v1, bound=v0, margin=margin, k=k1,
                              detail=f"against index {k0}")
        )


def conditions_report(state: ConstructionState) -> VerificationReport:
    """
    Check the construction conditions for every built stage.

    Covers the digit conditions, the checkpoint ratios, the growth and window
    conditions for t_k, the closest-integer tail bound and the unique-ergodicity
    ingredients. A stage-0 state reports its base fragment only.
    """
    params = state.params
    schedule = state.schedule
    report = VerificationReport(title="conditions").with_constants(
        **params.constants(), stage=state.stage, complete=state.complete
    )
    q = state.q
    digit = schedule.digit
    evens = schedule.even_checkpoints

    # base fragment
    n1, n2 = evens[0], evens[1]
    report.add(CheckResult.exact("digit.odd", digit(n1 + 1) == ODD_DIGIT, value=digit(n1 + 1), bound=ODD_DIGIT,
                                 k=1, detail="a_(n_1+1) = 3"))
    a5 = digit(n2 + 1)
    report.add(
        CheckResult.exact(
            "base.digit",
            a5 == base_digit(q(n1), q(n2)) and 2 * (q(n1) + q(n2)) <= a5 * q(n2) < q(n2 + 1),
            value=a5,
            bound=2 * (q(n1) + q(n2)),
            k=1,
            detail="least a > 2 with 2(q_(n_1) + q_(n_2)) <= a q_(n_2) < q_(n_2+1)",
        )
    )
    report.add(CheckResult.exact("ratio.next", 2 * (q(n1) + q(n2)) < q(n2 + 1), value=2 * (q(n1) + q(n2)),
                                 bound=q(n2 + 1), margin=q(n2 + 1) - 2 * (q(n1) + q(n2)), k=1))

    for cert in state.magnitudes:
        report.add(
            CheckResult.info(
                f"magnitude.{cert.condition}",
                value=cert.log_lower_bound,
                k=cert.stage,
                sample=cert.quantity,
                detail=f"{cert.detail}; index >= {cert.index_lower_bound}",
            )
        )

    alpha = state.alpha.value
    for record in state.records:
        k = record.k
        n_even, n_odd, t = record.n_even, record.n_odd, record.t
        q_t, q_odd = q(t), q(n_odd)
        below_even = sum(q(evens[s]) for s in range(2 * k - 1))
        below_odd = below_even + q(n_even)

        bound = Fraction(1, k)
        _certified(report, "window.digit", LogLinearForm.rational(bound) - LogLinearForm.log(q_t) / record.a_window,
                   k, value=LogLinearForm.log(q_t) / record.a_window, bound=bound)
        report.add(CheckResult.exact("digit.odd", digit(n_odd + 1) == ODD_DIGIT, value=digit(n_odd + 1),
                                     bound=ODD_DIGIT, k=k, detail="a_(n_(2k+1)+1) = 3"))
        report.add(CheckResult.exact("ratio.even", 2 * k * below_even < q(n_even),
                                     value=Fraction(below_even, q(n_even)), bound=Fraction(1, 2 * k), k=k))
        report.add(CheckResult.exact("ratio.odd", (2 * k + 1) * below_odd < q_odd,
                                     value=Fraction(below_odd, q_odd), bound=Fraction(1, 2 * k + 1), k=k))
        report.add(CheckResult.exact("digit.even", record.a_even > k, value=record.a_even, bound=k, k=k))
        if k > 1:
            report.add(CheckResult.exact("ratio.next", 2 * below_odd < q(n_even + 1), value=2 * below_odd,
                                         bound=q(n_even + 1), margin=q(n_even + 1) - 2 * below_odd, k=k))
        lead = LogLinearForm.log(q_odd) * (params.lead - params.floor)
        slack = params.effective_slack * q(n_even + 1)
        _certified(report, "log.lead", lead - slack, k, value=LogLinearForm.log(q_odd),
                   bound=slack / (params.lead - params.floor),
                   detail="lead - slack q_(n_2k+1) / log q_(n_2k+1) > floor")
        growth = q_odd ** params.t_exponent
        report.add(CheckResult.exact("window.growth", growth < q_t, value=q_t, bound=growth,
                                     margin=q_t - growth, k=k))
        offset = LogLinearForm.log(q_t) - record.phi * record.tau
        _certified(report, "window.upper", _LOG2 - offset, k, value=offset, bound=_LOG2)
        _certified(report, "window.lower", _LOG2 + offset, k, value=offset, bound=-_LOG2)
        report.add(CheckResult.exact("window.minimal", phi_window_search(state, k) == t, value=t, k=k,
                                     detail="t_k is the least index in the window"))
        if k > 1:
            previous = state.record(k - 1).t
            report.add(CheckResult.exact("window.order", previous < n_even, value=previous, bound=n_even, k=k))
        _certified(report, "phi.floor", record.phi - LogLinearForm.log(q_odd) * params.floor, k,
                   value=record.phi, bound=LogLinearForm.log(q_odd) * params.floor)
        report.add(CheckResult.info("A", value=record.A, k=k, detail=f"tau = {record.tau}"))

    # closest-integer tails over the fixed checkpoints of the stand-in
    tails = []
    for index in range(1, len(evens)):
        tail = sum((dist_to_int(q(n), alpha) for n in evens[index:]), Fraction(0))
        bound = Fraction(2, q(evens[index] + 1))
        report.add(CheckResult.exact("tail", tail < bound, value=tail, bound=bound,
                                     margin=bound - tail, k=index))
        tails.append((index, q(evens[index - 1]) * bound))
    _decay(report, "tail.decay", tails)

    odd_digits = [digit(n + 1) for n in evens[0::2] if n + 1 <= schedule.length]
    report.add(CheckResult.exact("ue.digits", all(3 <= a <= params.M for a in odd_digits), value=max(odd_digits),
                                 bound=params.M, k=None, detail="3 <= a_(n_(2k-1)+1) <= M"))
    ratios = [
        (k, Fraction(sum(q(evens[s]) for s in range(2 * k - 1)), q(evens[2 * k - 1])))
        for k in range(1, len(evens) // 2 + 1)
    ]
    _decay(report, "ue.ratio_decay", ratios)
    growth_digits = [(k, Fraction(digit(evens[2 * k - 1] + 1))) for k in range(1, len(evens) // 2 + 1)
                     if evens[2 * k - 1] + 1 <= schedule.length]
    _decay(report, "ue.digit_growth", growth_digits, increasing=True)
    _decay(report, "ue.tail_decay", tails)
    report.compute_summary()
    logger.info("Conditions checked", stage=state.stage, checks=len(report.checks),
                failures=len(report.failures()))
    return report


def weighted_sum_report(
    state: ConstructionState, k: int, workers: int = 1, bits: Optional[int] = None
) -> VerificationReport:
    """
    The composite |S_(q_t)(T_(2k+1), h_A')(y_k, j_k) + q_t log q_t| <= A(155 + log 2 / tau) q_t.

    The witness is taken from the state or searched. Also reports the measured
    constant B and the underlying class bound |S + q log q - q Phi| < 155 q.
    """
    record = state.record(k)
    cert = state.witness(k)
    point = cert.point if cert is not None else witness_points(state, k, workers)[0]
    cfg = state.config().truncated(record.level)
    q_t = state.q(record.t)
    A = record.A
    s_at = lazy_sum(cfg, h1_prime_function(), q_t, point)

    def composite(b: int):
        return abs(s_at(b) * A + log_enclosure(q_t, b) * q_t)

    def class_deviation(b: int):
        return abs(s_at(b) + log_enclosure(q_t, b) * q_t - record.phi.enclose(b) * q_t)

    bound = form_at(
        LogLinearForm.rational(A * CLASS_TOTAL * q_t) + LogLinearForm.log(2, A * q_t / record.tau)
    )
    rows = [
        certified_report("weighted_sum", composite, bound, sample=point, n=record.t, q_n=q_t, bits=bits, k=k,
                         detail=f"A = {A}"),
        certified_report("weighted_sum.class", class_deviation, form_at(LogLinearForm.rational(CLASS_TOTAL * q_t)),
                         sample=point, n=record.t, q_n=q_t, bits=bits, k=k),
    ]
    used = rows[0].precision_bits
    rows.append(
        info_report("weighted_sum.B", composite(used) / q_t, sample=point, n=record.t, q_n=q_t, bits=used, k=k,
                    detail="measured constant")
    )
    report = (
        VerificationReport(title=f"weighted_sum.k{k}")
        .with_constants(**state.params.constants())
        .with_constants(k=k, A=A, tau=record.tau)
    )
    for row in rows:
        report.add(row.to_check())
    report.compute_summary()
    return report
