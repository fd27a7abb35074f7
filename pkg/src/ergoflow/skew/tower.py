"""
Towers of the truncated skew products.

J'_m is the arc [L_m alpha, L_m alpha + ||q_{n_m} alpha||) on both levels with
L_m = 2 * sum_{s<m} q_{n_s}; U_m = U_{m-1} symdiff the union of the q_{n_m}
images of J'_m under T_{m-1}, and V_m is the complement of U_m.
"""

from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Any

import structlog

from ergoflow.cf.arithmetic import denominator, dist_to_int, frac_part
from ergoflow.cf.models import AngleRep, DigitSchedule
from ergoflow.core.exceptions import TowerDegenerateError
from ergoflow.core.logforms import fraction_str
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import Interval
from ergoflow.skew.models import SkewConfig, TowerLevel
from ergoflow.skew.system import image_pieces, skew_image, slit_length

logger = structlog.get_logger(__name__)


def _level_zero() -> TowerLevel:
    return TowerLevel(
        m=0,
        J_prime=TorusIntervalSet.empty(),
        U=TorusIntervalSet.full(levels=(0,)),
        V=TorusIntervalSet.full(levels=(1,)),
        translates=TorusIntervalSet.empty(),
        delta_m=(),
    )


def orbit_span(schedule: DigitSchedule, m: int) -> int:
    """2 * sum_{s<=m} q_{n_s}, the number of points in Delta_m."""
    return 2 * sum(denominator(schedule, n) for n in schedule.even_checkpoints[:m])


@lru_cache(maxsize=64)
def _tower_chain(alpha: AngleRep, schedule: DigitSchedule, m: int) -> tuple[TowerLevel, ...]:
    if m == 0:
        return (_level_zero(),)
    previous = _tower_chain(alpha, schedule, m - 1)
    prior = previous[-1]
    cfg = SkewConfig(alpha=alpha, schedule=schedule)
    value = alpha.value

    total = slit_length(cfg, m)
    if total >= 1:
        raise TowerDegenerateError(f"2 * sum_(s<={m}) ||q_(n_s) alpha|| = {total} is not below 1")

    n_m = schedule.checkpoint(m)
    q = denominator(schedule, n_m)
    width = dist_to_int(q, value)
    start = frac_part(orbit_span(schedule, m - 1) * value)

    # pieces of J'_m on both levels, then its images under T_{m-1}
    j_prime = TorusIntervalSet.arc(start, width)
    pieces = [(l, r, j) for l, r, j in j_prime]
    collected = list(pieces)
    slit = slit_length(cfg, m - 1)
    for _ in range(q - 1):
        pieces = image_pieces(pieces, value, slit)
        collected.extend(pieces)
    translates = TorusIntervalSet(
        (Interval(l, r) for l, r, j in collected if j == 0),
        (Interval(l, r) for l, r, j in collected if j == 1),
    )
    U = prior.U.symdiff(translates)
    span = orbit_span(schedule, m)
    level = TowerLevel(
        m=m,
        J_prime=j_prime,
        U=U,
        V=U.complement(),
        translates=translates,
        delta_m=tuple(sorted({frac_part(k * value) for k in range(span)})),
    )
    logger.debug("Tower level built", m=m, q=q, components=U.component_count())
    return previous + (level,)


def tower_sequence(cfg: SkewConfig, m: int) -> list[TowerLevel]:
    """
    Tower levels 0..m.

    Raises:
        TowerDegenerateError: If 2 * sum_{s<=m} ||q_{n_s} alpha|| >= 1.
    """
    if m > len(cfg.schedule.even_checkpoints):
        raise TowerDegenerateError(
            f"level {m} needs {m} checkpoints, schedule has {len(cfg.schedule.even_checkpoints)}"
        )
    return list(_tower_chain(cfg.alpha, cfg.schedule, m))


def build_tower(cfg: SkewConfig, m: int) -> TowerLevel:
    """The tower level m; levels below m are built (and cached) on the way."""
    level = tower_sequence(cfg, m)[-1]
    logger.info("Tower built", m=m, components=level.U.component_count())
    return level


def near_zero_hypothesis(schedule: DigitSchedule, m: int) -> bool:
    """2 * sum_{s<=r} q_{n_s} < q_{n_r + 1} for every r <= m."""
    for r in range(1, m + 1):
        n_r = schedule.checkpoint(r)
        if n_r + 1 > schedule.length:
            return False
        if orbit_span(schedule, r) >= denominator(schedule, n_r + 1):
            return False
    return True


def structure_report(t: TowerLevel, cfg: SkewConfig) -> VerificationReport:
    """
    Exact checks of the tower structure at level m: invariance under T_m, the
    discontinuity set, the involution, the near-zero inclusions, plus the
    partition and symmetric-difference measure facts.
    """
    m = t.m
    alpha = cfg.angle
    report = VerificationReport(title="tower").with_constants(alpha=alpha, m=m)
    full = TorusIntervalSet.full()
    half = Fraction(1, 2)

    report.add(
        CheckResult.exact(
            "tower.partition",
            t.U.isdisjoint(t.V) and t.U.union(t.V) == full,
            value=t.U.measure() + t.V.measure(),
            bound=1,
            k=m,
        )
    )
    report.add(
        CheckResult.exact("tower.measure", t.U.measure() == half, value=t.U.measure(), bound=half, k=m)
    )

    cfg_m = cfg.truncated(m)
    if slit_length(cfg, m) < 1:
        image_u = skew_image(cfg_m, t.U)
        image_v = skew_image(cfg_m, t.V)
        report.add(
            CheckResult.exact(
                "tower.invariance",
                image_u == t.U and image_v == t.V,
                value=image_u.symdiff(t.U).measure(),
                bound=0,
                k=m,
                detail="exact image under T_m",
            )
        )

    expected = list(t.delta_m)
    for j in (0, 1):
        found = t.U.discontinuities(j)
        report.add(
            CheckResult.exact(
                "tower.discontinuities",
                found == expected,
                value=len(found),
                bound=len(expected),
                k=m,
                sample=f"level {j}",
            )
        )

    report.add(
        CheckResult.exact("tower.involution", t.U.flip_levels() == t.V, k=m)
    )

    if m >= 1:
        q = denominator(cfg.schedule, cfg.schedule.checkpoint(m))
        width = dist_to_int(q, alpha)
        measured = t.translates.measure()
        report.add(
            CheckResult.exact(
                "tower.symdiff_measure",
                measured == q * width,
                value=measured,
                bound=q * width,
                k=m,
            )
        )
        if m % 2 == 1:
            n_m = cfg.schedule.checkpoint(m)
            if n_m + 1 <= cfg.schedule.length:
                a = cfg.schedule.digit(n_m + 1)
                lower, upper = Fraction(1, a + 2), Fraction(1, a)
                report.add(
                    CheckResult.exact(
                        "tower.sandwich",
                        lower < measured < upper,
                        value=measured,
                        bound=f"({lower}, {upper})",
                        margin=min(measured - lower, upper - measured),
                        k=m,
                    )
                )
        if near_zero_hypothesis(cfg.schedule, m):
            left = TorusIntervalSet.from_arcs([(1 - width, 1, 0)])
            right = TorusIntervalSet.from_arcs([(0, width, 1)])
            report.add(
                CheckResult.exact("tower.near_zero_left", left.issubset(t.U), k=m, value=width)
            )
            report.add(
                CheckResult.exact("tower.near_zero_right", right.issubset(t.U), k=m, value=width)
            )
        else:
            report.add(
                CheckResult.info("tower.near_zero", k=m, detail="hypothesis 2 sum q < q_(n_r+1) not met")
            )

    report.compute_summary()
    return report


def coincidence_set(cfg: SkewConfig, s: int, K: int) -> TorusIntervalSet:
    """
    Points where T^K and T_s^K agree: the complement of the preimages
    R^{-w}(J minus J^s), w = 1..K, on both levels.
    """
    full_len = slit_length(cfg.full())
    trunc_len = slit_length(cfg, s)
    gap = full_len - trunc_len
    if gap <= 0 or K == 0:
        return TorusIntervalSet.full()
    alpha = cfg.angle
    arcs = []
    for w in range(1, K + 1):
        left = trunc_len - w * alpha
        left -= floor(left)
        arcs.append((left, left + gap, 0))
        arcs.append((left, left + gap, 1))
    return TorusIntervalSet.from_arcs(arcs).complement()


def tower_payload(levels: list[TowerLevel]) -> dict[str, Any]:
    """Per-level components and Delta_m with exact fraction strings."""
    return {
        "levels": [
            {
                "m": level.m,
                "J_prime": level.J_prime.to_payload(),
                "U": level.U.to_payload(),
                "V": level.V.to_payload(),
                "delta": [fraction_str(x) for x in level.delta_m],
                "components": level.U.component_count(),
            }
            for level in levels
        ]
    }
