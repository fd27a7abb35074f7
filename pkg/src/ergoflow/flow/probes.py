"""
Diagnostics on the flow and on the towers.

correlation_probe estimates correlations of two flow observables by seeded
stratified sampling; it never passes or fails anything. ue_probe computes the
finitary ingredients of unique ergodicity exactly on the built towers.
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import sqrt
from typing import Optional, Sequence

import numpy as np
import structlog

from ergoflow.cf.arithmetic import denominator
from ergoflow.construction.models import ConstructionState
from ergoflow.core.exceptions import PreconditionError, SingularOrbitError, SingularPointError, UnsupportedSetError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.flow.models import CorrelationRow, FlowObservable, FlowPoint
from ergoflow.flow.special import Time, flow_advance, roof_integral
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.functions import roof_spec_for
from ergoflow.roof.models import RoofSpec
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import slit_length
from ergoflow.skew.tower import tower_sequence

logger = structlog.get_logger(__name__)

SAMPLE_BITS = 24


def recurrence_times(state: ConstructionState) -> list[LogLinearForm]:
    """q_(t_k) times the mean roof, one per built stage."""
    mean = roof_integral_for(state)
    return [mean * state.q(record.t) for record in state.records]


def roof_integral_for(state: ConstructionState) -> LogLinearForm:
    """Mean roof for the A of the last built stage."""
    record = state.records[-1]
    return roof_integral(roof_spec_for(state.config(), record.A))


# correlation probe


def _dyadic(u: float) -> Fraction:
    return Fraction(int(u * (1 << SAMPLE_BITS)), 1 << SAMPLE_BITS)


def _place(arcs: list[tuple[Fraction, Fraction, int]], total: Fraction, u: Fraction) -> TorusPoint:
    """Inverse distribution function of the normalized length on the arcs."""
    position = u * total
    for left, right, level in arcs:
        width = right - left
        if position < width:
            return TorusPoint(left + position, level)
        position -= width
    left, right, level = arcs[-1]
    return TorusPoint(left, level)


def _sample_chunk(
    spec: RoofSpec,
    cfg: SkewConfig,
    O: FlowObservable,
    O2: FlowObservable,
    times: Sequence[Time],
    strata: range,
    samples: int,
    child: np.random.SeedSequence,
    bits: Optional[int],
) -> tuple[list[int], list[int], int]:
    rng = np.random.default_rng(child)
    arcs = list(O.base)
    total = sum((r - l for l, r, _ in arcs), Fraction(0))
    hits = [0] * len(times)
    undecided = [0] * len(times)
    accepted = 0
    for i in strata:
        u = (i + rng.random()) / samples
        base = _place(arcs, total, _dyadic(u))
        height = _dyadic(rng.random()) * O.height_cap
        p = FlowPoint(base, LogLinearForm.rational(height))
        try:
            images = [flow_advance(spec, cfg, p, t, bits) for t in times]
        except (SingularOrbitError, SingularPointError):
            logger.debug("Sample on a singular orbit", x=fraction_str(base.x))
            continue
        accepted += 1
        for index, image in enumerate(images):
            inside = O2.contains(image, bits)
            if inside is None or not image.decided:
                undecided[index] += 1
            elif inside:
                hits[index] += 1
    return hits, undecided, accepted


def correlation_probe(
    spec: RoofSpec,
    cfg: SkewConfig,
    O: FlowObservable,
    O2: FlowObservable,
    times: Sequence[Time],
    samples: int = 1024,
    seed: int = 0,
    workers: int = 1,
    bits: Optional[int] = None,
) -> list[CorrelationRow]:
    """
    Estimate P(flow_t p in O2 | p in O) at each time.

    p is drawn uniformly from O: the base by stratified sampling of the arcs
    of O.base, the height uniformly below the cap. Both caps must lie below 1,
    where the roof (which exceeds 1) cannot cut the observable. Deterministic
    for a fixed (seed, workers).

    Raises:
        UnsupportedSetError: If O.base is empty.
        ValueError: If a height cap exceeds 1 or samples is not positive.
    """
    if O.base.is_empty:
        raise UnsupportedSetError("observable base is empty")
    if O.height_cap > 1 or O2.height_cap > 1:
        raise ValueError("height caps above 1 are not supported")
    if samples <= 0:
        raise ValueError("samples must be positive")
    workers = max(1, min(workers, samples))
    children = np.random.SeedSequence(seed).spawn(workers)
    chunk = -(-samples // workers)
    ranges = [range(w * chunk, min(samples, (w + 1) * chunk)) for w in range(workers)]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(
            executor.map(
                lambda args: _sample_chunk(spec, cfg, O, O2, times, args[0], samples, args[1], bits),
                zip(ranges, children),
            )
        )

    rows = []
    accepted = sum(r[2] for r in results)
    for index, t in enumerate(times):
        hits = sum(r[0][index] for r in results)
        undecided = sum(r[1][index] for r in results)
        n = max(1, accepted - undecided)
        p = hits / n
        rows.append(
            CorrelationRow(
                t=str(LogLinearForm.coerce(t)),
                estimate=p,
                stderr=sqrt(p * (1 - p) / n),
                seed=seed,
                samples=accepted,
                undecided=undecided,
            )
        )
    logger.info("Correlation probe", times=len(times), samples=accepted, seed=seed, workers=workers)
    return rows


# unique-ergodicity ingredients


def _cut(segment: tuple[Fraction, Fraction, int, int], shift: Fraction, points: Sequence[Fraction]):
    """Split an original-coordinate segment where its image x + shift meets the points."""
    left, right, level, count = segment
    cuts = sorted({(p - shift) % 1 for p in points} | {(-shift) % 1})
    edges = [left] + [c for c in cuts if left < c < right] + [right]
    return [(a, b, level, count) for a, b in zip(edges, edges[1:])]


def _boundaries(A: TorusIntervalSet) -> list[Fraction]:
    return sorted({x % 1 for l, r, _ in A for x in (l, r)})


def deviation_measure(cfg: SkewConfig, m: int, A: TorusIntervalSet, eps: Fraction) -> Fraction:
    """
    lambda of {z in U_m : |q^-1 sum_(i<q) chi_A(T_m^i z) - 2 lambda(U_m cap A)| > eps}, q = q_(n_m).

    The visit count is constant between the preimages of the boundaries of A
    and of the slit, so U_m is carried forward as segments in its own
    coordinates, cut wherever an image meets one of those points.
    """
    tower = tower_sequence(cfg, m)[-1]
    q = denominator(cfg.schedule, cfg.schedule.checkpoint(m))
    alpha = cfg.angle
    slit = slit_length(cfg, m)
    edges = _boundaries(A)
    target = 2 * tower.U.intersect(A).measure()

    segments = [(l, r, j, 0) for l, r, j in tower.U]
    shift = Fraction(0)
    for i in range(q):
        counted = []
        for segment in segments:
            for left, right, level, count in _cut(segment, shift, edges):
                image = TorusPoint(((left + right) / 2 + shift) % 1, level)
                counted.append((left, right, level, count + int(A.contains(image))))
        if i == q - 1:
            segments = counted
            break
        shift += alpha
        segments = []
        for segment in counted:
            for left, right, level, count in _cut(segment, shift, [slit]):
                if ((left + right) / 2 + shift) % 1 < slit:
                    level ^= 1
                segments.append((left, right, level, count))

    deviation = sum(
        (r - l for l, r, _, count in segments if abs(Fraction(count, q) - target) > eps), Fraction(0)
    )
    return deviation / 2


def ue_probe(cfg: SkewConfig, k: int, A: TorusIntervalSet, eps: Fraction) -> VerificationReport:
    """
    Finitary unique-ergodicity ingredients through tower level 2k.

    Rows: the deviation measure at each level 2s (s <= k) and its decay, the
    sandwich 1/(M+2) < lambda(U_(2s+1) symdiff U_(2s)) < 1/3 at every built odd
    level, and the decay of lambda(U_(2s) symdiff U_(2s-1)). The limit statement
    itself is not asserted.

    Raises:
        UnsupportedSetError: If A is not an interval set.
        PreconditionError: If the schedule has fewer than 2k checkpoints.
    """
    if not isinstance(A, TorusIntervalSet):
        raise UnsupportedSetError(f"{type(A).__name__} is not an interval union")
    available = len(cfg.schedule.even_checkpoints)
    if k < 1 or 2 * k > available:
        raise PreconditionError("towers through 2k built", f"2k = {2 * k}, checkpoints = {available}")
    M = cfg.schedule.M
    top = min(2 * k + 1, available)
    levels = tower_sequence(cfg, top)
    report = VerificationReport(title=f"ue.k{k}").with_constants(eps=eps, M=M, A=A.measure())

    previous: Optional[Fraction] = None
    for s in range(1, k + 1):
        deviation = deviation_measure(cfg, 2 * s, A, eps)
        report.add(CheckResult.info("ue.deviation", value=deviation, k=s, detail=f"level {2 * s}"))
        if previous is not None:
            report.add(
                CheckResult.exact("ue.deviation_decay", deviation < previous or deviation == 0,
                                  value=deviation, bound=previous, k=s)
            )
        previous = deviation

    lower, upper = Fraction(1, M + 2), Fraction(1, 3)
    for level in levels[1:]:
        if level.m % 2 == 0:
            continue
        measured = level.translates.measure()
        report.add(
            CheckResult.exact("ue.sandwich", lower < measured < upper, value=measured,
                              bound=f"({fraction_str(lower)}, {fraction_str(upper)})",
                              margin=min(measured - lower, upper - measured), k=level.m)
        )

    even = [level.translates.measure() for level in levels[1:] if level.m % 2 == 0]
    for s, (before, after) in enumerate(zip(even, even[1:]), start=2):
        report.add(
            CheckResult.exact("ue.decay", after < before, value=after, bound=before, margin=before - after,
                              k=s, detail="lambda(U_2s symdiff U_(2s-1))")
        )
    report.compute_summary()
    logger.info("UE probe", k=k, eps=fraction_str(eps), failures=len(report.failures()))
    return report
