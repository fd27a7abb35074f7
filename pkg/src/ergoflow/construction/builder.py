"""
The inductive construction of the digits a_k and the checkpoints n_k, t_k.

Stage k fixes n_(2k) (stage 1 uses n_1 = 2, n_2 = 4), the digit after it, the
odd checkpoint n_(2k+1) followed by the digit 3, and the window checkpoint t_k
followed by a large digit. Every digit not chosen explicitly is 1, and every
"large enough" choice is the minimal admissible one.
"""

from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Callable, Optional, Union

import structlog

from ergoflow.birkhoff.bounds import class_threshold
from ergoflow.cf.arithmetic import representative
from ergoflow.cf.models import DigitSchedule
from ergoflow.core.config import RunMode
from ergoflow.core.exceptions import (
    InsufficientPrefixError,
    PreconditionError,
    StageInfeasibleError,
    UndecidedComparisonError,
)
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import (
    MAX_PRECISION_BITS,
    Enclosure,
    certify,
    default_precision_bits,
    log_enclosure,
)
from ergoflow.construction.models import (
    ConstructionParams,
    ConstructionState,
    MagnitudeCertificate,
    StageRecord,
)
from ergoflow.roof.regions import phi_constant
from ergoflow.skew.models import SkewConfig

logger = structlog.get_logger(__name__)

# (phi, ell_0) of level m for a schedule whose digits reach past the class threshold
PhiSource = Callable[[DigitSchedule, int], tuple[LogLinearForm, int]]

BASE_PREFIX = (1, 1, 3, 1)
BASE_CHECKPOINTS = (2, 4)
ODD_DIGIT = 3

_LOG2 = LogLinearForm.log(2)


def class_phi(schedule: DigitSchedule, m: int) -> tuple[LogLinearForm, int]:
    """
    Phi of level m at the class representative of the first ell_0 digits.

    ell_0 is the least index with q_ell > q_(n_m)^2.
    """
    ell0 = class_threshold(schedule, m)
    anchor = representative(schedule, ell0)
    cfg = SkewConfig(alpha=anchor, schedule=schedule)
    return phi_constant(cfg, m), ell0


class _Prefix:
    """Digits a_1..a_l with q_0..q_l, grown in place with 1-digits on demand."""

    def __init__(self, digits: tuple[int, ...] | list[int] = ()):
        self.digits: list[int] = []
        self.q: list[int] = [1]
        for a in digits:
            self.push(a)

    def push(self, a: int) -> None:
        before = self.q[-2] if len(self.q) > 1 else 0
        self.digits.append(a)
        self.q.append(a * self.q[-1] + before)

    def q_at(self, n: int) -> int:
        while len(self.digits) < n:
            self.push(1)
        return self.q[n]

    def __len__(self) -> int:
        return len(self.digits)


def _positive(form: LogLinearForm, what: str) -> bool:
    sign = form.sign()
    if sign is None:
        raise UndecidedComparisonError(what, MAX_PRECISION_BITS)
    return sign > 0


@lru_cache(maxsize=32)
def _phi_enclosure(phi: LogLinearForm, bits: int) -> Enclosure:
    return phi.enclose(bits)


def _scaled_exceeds(phi: LogLinearForm, scale: Fraction, other: LogLinearForm, what: str) -> bool:
    """Decide scale * phi > other, reusing the enclosures of phi per precision."""
    verdict = certify(
        lambda bits: _phi_enclosure(phi, bits) * scale - other.enclose(bits),
        start_bits=default_precision_bits(),
        label=what,
    )
    if not verdict.decided:
        raise UndecidedComparisonError(what, MAX_PRECISION_BITS)
    return verdict.margin.lo > 0


def _floor(form: LogLinearForm, what: str) -> int:
    bits = default_precision_bits()
    while True:
        enc = form.enclose(bits)
        lo, hi = floor(enc.lo), floor(enc.hi)
        if lo == hi and enc.hi != hi:
            return lo
        if bits >= MAX_PRECISION_BITS:
            raise UndecidedComparisonError(what, bits)
        bits = min(bits * 2, MAX_PRECISION_BITS)


def _index_bound(start: int, log_target: Fraction, log_base_q: Enclosure) -> int:
    """
    Least index a 1-digit tail from q_start can reach log q > log_target with.

    Consecutive denominators under 1-digits grow by less than a factor 2.
    """
    gap = (Enclosure.exact(log_target) - log_base_q).lo
    steps = gap / log_enclosure(2).hi if gap > 0 else Fraction(0)
    return start + floor(steps) + 1


def _infeasible_or_certificates(
    params: ConstructionParams, stage: int, constraint: str, certificates: list[MagnitudeCertificate]
) -> list[MagnitudeCertificate]:
    if params.mode == RunMode.RELAXED:
        raise StageInfeasibleError(stage, constraint, certificates[0].detail)
    for cert in certificates:
        logger.warning(
            "Quantity not materialized",
            stage=stage,
            quantity=cert.quantity,
            log_lower_bound=fraction_str(cert.log_lower_bound),
        )
    return certificates


def _auto_tau(phi: LogLinearForm, q_odd: int, q_next: int, params: ConstructionParams, k: int) -> Fraction:
    """Least tau >= tau_floor placing the whole window above q^e and q_(n+1)."""
    needs = (
        LogLinearForm.log(q_odd, params.t_exponent) + _LOG2,
        LogLinearForm.log(q_next) + _LOG2,
    )
    phi_enc = _phi_enclosure(phi, default_precision_bits())
    if phi_enc.lo > 0:
        estimate = max(need.enclose().hi for need in needs) / phi_enc.lo
        tau = max(Fraction(params.tau_floor), Fraction(ceil(estimate) - 1))
    else:
        tau = Fraction(params.tau_floor)
    while not all(_scaled_exceeds(phi, tau, need, "tau window") for need in needs):
        tau += 1
    return tau


def _find_window(
    q_at: Callable[[int], int],
    n_odd: int,
    phi: LogLinearForm,
    tau: Fraction,
    params: ConstructionParams,
    k: int,
    limit: int,
) -> int:
    """Least t > n_odd + 1 with q_t > q^e and |log q_t - tau Phi| < log 2."""
    growth = q_at(n_odd) ** params.t_exponent
    t = n_odd + 2
    while t <= limit:
        q_t = q_at(t)
        if q_t > growth and not _scaled_exceeds(phi, tau, LogLinearForm.log(q_t) + _LOG2, "window lower end"):
            if _scaled_exceeds(phi, tau, LogLinearForm.log(q_t) - _LOG2, "window upper end"):
                return t
            raise StageInfeasibleError(
                k, "log-window", f"q_{t} = {q_t} jumps over the window of tau Phi"
            )
        t += 1
    raise StageInfeasibleError(k, "t_k within max_index", f"no window index up to {limit}")


def _close_stage(
    prefix: _Prefix,
    evens: list[int],
    odds: list[int],
    k: int,
    params: ConstructionParams,
    phi_source: PhiSource,
) -> Union[StageRecord, list[MagnitudeCertificate]]:
    """Pick n_(2k+1), the digit 3, t_k and a_(t_k + 1) after n_(2k) was fixed."""
    n_even = evens[-1]
    a_even = prefix.digits[n_even]
    q_lead = prefix.q_at(n_even + 1)
    requirement = params.log_requirement_factor * q_lead
    total = sum(prefix.q_at(n) for n in evens)
    level = 2 * k + 1

    if not _positive(LogLinearForm.log(params.max_tower_q) - requirement, "log-lead cap"):
        index = _index_bound(n_even + 1, requirement, log_enclosure(q_lead))
        certificates = [
            MagnitudeCertificate(
                stage=k,
                quantity=f"log q_(n_{level})",
                condition="log-lead",
                log_lower_bound=requirement,
                index_lower_bound=index,
                detail=(
                    f"{fraction_str(params.lead)} - {fraction_str(params.effective_slack)} "
                    f"q_(n_{2 * k}+1) / log q_(n_{level}) > {fraction_str(params.floor)} "
                    f"with q_(n_{2 * k}+1) = {q_lead}"
                ),
            ),
            MagnitudeCertificate(
                stage=k,
                quantity=f"log q_(t_{k})",
                condition="window growth",
                log_lower_bound=requirement * params.t_exponent,
                index_lower_bound=index + 2,
                detail=f"q_(t_{k}) > q_(n_{level})^{params.t_exponent}",
            ),
        ]
        return _infeasible_or_certificates(params, k, "log-lead within max_tower_q", certificates)

    n = n_even + 2
    while True:
        if n + 1 > params.max_index:
            raise StageInfeasibleError(k, f"n_{level} within max_index", f"reached index {n}")
        q_n = prefix.q_at(n)
        if q_n > params.max_tower_q:
            raise StageInfeasibleError(
                k, f"q_(n_{level}) within max_tower_q", f"q_{n} = {q_n} before all conditions held"
            )
        log_q = LogLinearForm.log(q_n)
        if level * total < q_n and _positive(log_q - requirement, "log-lead"):
            probe = _Prefix(prefix.digits[:n])
            probe.push(ODD_DIGIT)
            while probe.q[-1] <= q_n * q_n:
                probe.push(1)
            schedule = DigitSchedule(
                digits=tuple(probe.digits),
                even_checkpoints=tuple(evens) + (n,),
                odd_checkpoints=tuple(odds),
                M=params.M,
            )
            phi, ell0 = phi_source(schedule, level)
            if _scaled_exceeds(phi, Fraction(1), log_q * params.floor, "Phi floor"):
                break
            logger.debug("Phi below floor", k=k, n=n, phi=phi.numeric(8))
        n += 2

    del prefix.digits[n:], prefix.q[n + 1:]
    prefix.push(ODD_DIGIT)
    q_next = prefix.q[-1]

    if not _scaled_exceeds(phi, Fraction(1), LogLinearForm.rational(0), "Phi_k > 0"):
        raise StageInfeasibleError(k, "Phi_k > 0", f"Phi_{k} = {phi.numeric(8)}")
    tau = _auto_tau(phi, q_n, q_next, params, k) if params.tau is None else Fraction(params.tau)

    low = phi * tau - _LOG2
    if not _positive(LogLinearForm.log(params.max_window_q) - low, "window cap"):
        certificates = [
            MagnitudeCertificate(
                stage=k,
                quantity=f"log q_(t_{k})",
                condition="log-window",
                log_lower_bound=low.enclose().lo,
                detail=f"tau Phi_{k} - log 2 with tau = {fraction_str(tau)}",
            )
        ]
        return _infeasible_or_certificates(params, k, "q_t within max_window_q", certificates)

    t = _find_window(prefix.q_at, n, phi, tau, params, k, params.max_index - 1)
    a_window = _floor(LogLinearForm.log(prefix.q_at(t), k), "a_(t_k+1)") + 1
    del prefix.digits[t:], prefix.q[t + 1:]
    prefix.push(a_window)

    record = StageRecord(
        k=k,
        n_even=n_even,
        n_odd=n,
        t=t,
        a_even=a_even,
        a_window=a_window,
        ell0=ell0,
        phi=phi,
        tau=tau,
    )
    logger.info(
        "Stage built",
        k=k,
        n_even=n_even,
        n_odd=n,
        t=t,
        a_window=a_window,
        tau=fraction_str(tau),
        phi=phi.numeric(8),
    )
    return record


def _state(
    prefix: _Prefix,
    evens: list[int],
    odds: list[int],
    params: ConstructionParams,
    records: list[StageRecord],
    magnitudes: tuple[MagnitudeCertificate, ...] = (),
) -> ConstructionState:
    schedule = DigitSchedule(
        digits=tuple(prefix.digits),
        even_checkpoints=tuple(evens),
        odd_checkpoints=tuple(odds),
        M=params.M,
    )
    return ConstructionState(
        stage=len(records),
        schedule=schedule,
        params=params,
        records=tuple(records),
        magnitudes=magnitudes,
    )


def base_digit(q_first: int, q_second: int) -> int:
    """Least a > 2 with 2(q_(n_1) + q_(n_2)) <= a q_(n_2)."""
    a = 3
    while 2 * (q_first + q_second) > a * q_second:
        a += 1
    return a


def base_stage(
    params: Optional[ConstructionParams] = None, phi_source: Optional[PhiSource] = None
) -> ConstructionState:
    """
    Stage 1: n_1 = 2, n_2 = 4, digits 1, 1, 3, 1, the minimal a_5, then n_3 and t_1.

    In faithful mode n_3 is far beyond materialization; the returned state then
    stops at stage 0 with magnitude certificates for log q_(n_3) and log q_(t_1).

    Raises:
        StageInfeasibleError: If a relaxed search exhausts its caps.
    """
    params = params or ConstructionParams.faithful()
    phi_source = phi_source or class_phi
    prefix = _Prefix(BASE_PREFIX)
    n1, n2 = BASE_CHECKPOINTS
    a5 = base_digit(prefix.q_at(n1), prefix.q_at(n2))
    prefix.push(a5)
    evens = list(BASE_CHECKPOINTS)
    logger.debug("Base digits fixed", a5=a5, q5=prefix.q[-1])

    result = _close_stage(prefix, evens, [], 1, params, phi_source)
    if isinstance(result, list):
        return _state(prefix, evens, [], params, [], tuple(result))
    return _state(prefix, evens + [result.n_odd], [result.t], params, [result])


def extend_stage(
    state: ConstructionState,
    params: Optional[ConstructionParams] = None,
    phi_source: Optional[PhiSource] = None,
) -> ConstructionState:
    """
    Stage N + 1 on top of a complete stage-N state.

    Raises:
        PreconditionError: If the state is not a complete stage >= 1.
        StageInfeasibleError: If a search exhausts its caps.
    """
    if state.stage < 1 or not state.complete:
        raise PreconditionError("complete state at stage >= 1", f"stage {state.stage}")
    params = params or state.params
    phi_source = phi_source or class_phi
    N = state.stage
    k = N + 1
    evens = list(state.schedule.even_checkpoints)
    odds = list(state.schedule.odd_checkpoints)
    prefix = _Prefix(state.schedule.digits)
    t_last = odds[-1]
    if len(prefix) != t_last + 1:
        raise PreconditionError("digits fixed through a_(t_N+1)", f"{len(prefix)} digits, t_N = {t_last}")

    total = sum(prefix.q_at(n) for n in evens)
    n = t_last + 2 if t_last % 2 == 0 else t_last + 3
    while 2 * k * total >= prefix.q_at(n):
        n += 2
        if n + 1 > params.max_index:
            raise StageInfeasibleError(k, f"n_{2 * k} within max_index", f"reached index {n}")
    q_n = prefix.q_at(n)
    q_before = prefix.q[n - 1]
    total += q_n
    a = 2 * k + 1
    while 2 * total >= a * q_n + q_before:
        a += 1
    del prefix.digits[n:], prefix.q[n + 1:]
    prefix.push(a)
    evens.append(n)
    logger.debug("Even checkpoint fixed", k=k, n=n, a=a)

    result = _close_stage(prefix, evens, odds, k, params, phi_source)
    if isinstance(result, list):
        return _state(prefix, evens, odds, params, list(state.records), tuple(result))
    return _state(
        prefix, evens + [result.n_odd], odds + [result.t], params, list(state.records) + [result]
    )


def construct(
    stages: int,
    params: Optional[ConstructionParams] = None,
    phi_source: Optional[PhiSource] = None,
) -> ConstructionState:
    """Replay the construction through the given number of stages."""
    state = base_stage(params, phi_source)
    while state.complete and state.stage < stages:
        state = extend_stage(state, params, phi_source)
    return state


def phi_window_search(state: ConstructionState, k: int) -> int:
    """
    Re-derive t_k from the recorded Phi_k and tau_k over the fixed digits.

    Raises:
        InsufficientPrefixError: If the schedule ends before the window.
    """
    record = state.record(k)
    qs = _Prefix(state.schedule.digits).q

    def q_at(n: int) -> int:
        if n >= len(qs):
            raise InsufficientPrefixError(n, len(qs) - 1)
        return qs[n]

    return _find_window(q_at, record.n_odd, record.phi, record.tau, state.params, k, len(qs) - 1)
