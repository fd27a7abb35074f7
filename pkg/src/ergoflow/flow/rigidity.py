"""
Rigidity sets E_k.

I_k is the arc of length c / q_(t_k) centred at the witness y_k. Its first
q_(t_k) images under T must be single arcs, so E_k is a union of q_(t_k) arcs
of total length c. On E_k the map T^(q_(t_k)) moves every point by exactly
||q_(t_k) alpha|| as long as it keeps the level, which is decided with the
level cocycle sigma(x) = #{0 < i <= q : x + i alpha in J} mod 2 along the orbit
of the left end of I_k.
"""

from fractions import Fraction
from itertools import accumulate
from typing import Optional

import structlog

from ergoflow.cf.arithmetic import dist_to_int
from ergoflow.construction.models import ConstructionState
from ergoflow.core.exceptions import ConstructionViolatedError, PreconditionError
from ergoflow.core.logforms import fraction_str
from ergoflow.core.reports import CheckResult, VerificationReport
from ergoflow.flow.models import RigiditySet
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import lattice_for

logger = structlog.get_logger(__name__)

DEFAULT_WIDTH = Fraction(1, 32)


def _crosses(left: int, width: int, denom: int, ends: tuple[int, int]) -> bool:
    """Whether a slit end lies strictly inside the lattice arc (left, left + width)."""
    for e in ends:
        offset = (e - left) % denom
        if 0 < offset < width:
            return True
    return False


def rigidity_set(
    cfg: SkewConfig,
    k: int,
    point: TorusPoint,
    q_t: int,
    c: Fraction = DEFAULT_WIDTH,
    q_previous: Optional[int] = None,
) -> RigiditySet:
    """
    E_k for the point (y, j) and the return time q_t.

    q_previous is the denominator before q_t; the separation of the translates
    is checked against ||q_previous alpha|| when it is given.

    Raises:
        ConstructionViolatedError: If some T^i(I_k x {j}), i < q_t, contains a
            discontinuity of T (with the offending index).
    """
    alpha = cfg.angle
    y, j = point
    half = c / (2 * q_t)
    lattice = lattice_for(cfg, y, half)
    denom, step, slit = lattice
    width = lattice.encode(2 * half)
    start = (lattice.encode(y) - lattice.encode(half)) % denom
    ends = (0, slit)

    # rotated left ends for i < 2 q_t, crossing flags and the in-slit indicator
    lefts = [start]
    for _ in range(2 * q_t):
        lefts.append((lefts[-1] + step) % denom)
    crossing = [_crosses(x, width, denom, ends) for x in lefts]
    in_slit = [x < slit for x in lefts]

    for i in range(1, q_t + 1):
        if crossing[i]:
            raise ConstructionViolatedError(i - 1, f"T^{i - 1}(I_k) contains a discontinuity of T")

    # level of T^i(I_k x {j}) and the cocycle over q_t steps at each left end
    levels = [j]
    for i in range(1, q_t + 1):
        levels.append(levels[-1] ^ int(in_slit[i]))
    sigma = sum(in_slit[1:q_t + 1]) % 2
    counts = list(accumulate((int(flag) for flag in crossing), initial=0))
    preserved = True
    for i in range(q_t):
        # sigma constant on the arc iff no slit end enters (i, i + q_t]
        if counts[i + q_t + 1] - counts[i + 1] or sigma:
            preserved = False
            break
        sigma ^= int(in_slit[i + 1]) ^ int(in_slit[i + q_t + 1])

    arcs = []
    for i in range(q_t):
        left = lattice.decode(lefts[i])
        arcs.append((left, left + 2 * half, levels[i]))
    E_k = TorusIntervalSet.from_arcs(arcs)
    I_k = TorusIntervalSet.from_arcs([arcs[0]])

    buffer = dist_to_int(q_t, alpha)
    separation = min(
        (Fraction(min(x, denom - x), denom) for x in (m * step % denom for m in range(1, q_t))),
        default=Fraction(1, 2),
    )
    H_connected: Optional[bool] = None
    if buffer < half:
        returned = TorusIntervalSet.from_arcs([(arcs[0][0] + q_t * alpha, arcs[0][1] + q_t * alpha, j)])
        H_connected = levels[q_t] == j and I_k.union(returned).component_count() == 1

    rs = RigiditySet(
        k=k,
        c=c,
        y=y,
        j=j,
        q_t=q_t,
        I_k=I_k,
        E_k=E_k,
        measure=E_k.measure(),
        separation=separation,
        closest_previous=separation if q_previous is None else dist_to_int(q_previous, alpha),
        buffer=buffer,
        displacement=buffer if preserved else buffer + 1,
        H_connected=H_connected,
    )
    logger.info(
        "Rigidity set built",
        k=k,
        q_t=q_t,
        components=E_k.component_count(),
        measure=fraction_str(rs.measure),
        level_preserved=preserved,
    )
    return rs


def build_rigidity_set(
    state: ConstructionState, k: int, c: Fraction = DEFAULT_WIDTH
) -> RigiditySet:
    """
    E_k from the certified witness of stage k.

    Raises:
        PreconditionError: If stage k has no witness certificate.
        ConstructionViolatedError: If the sweep meets a discontinuity.
    """
    cert = state.witness(k)
    if cert is None:
        raise PreconditionError("witness (y_k, j_k) certified", f"stage {k} has no witness")
    record = state.record(k)
    return rigidity_set(state.config(), k, cert.point, state.q(record.t), c, state.q(record.t - 1))


def rigidity_report(rs: RigiditySet) -> VerificationReport:
    """Measure floor, translate separation, exact displacement and H_k."""
    report = VerificationReport(title=f"rigidity.k{rs.k}").with_constants(c=rs.c, q_t=rs.q_t)
    floor_ = rs.measure_floor
    report.add(
        CheckResult.exact("rigidity.measure", rs.measure >= floor_, value=rs.measure, bound=floor_,
                          margin=rs.measure - floor_, k=rs.k)
    )
    target = Fraction(1, 2 * rs.q_t)
    report.add(
        CheckResult.exact(
            "rigidity.separation",
            rs.separation == rs.closest_previous and rs.separation > target,
            value=rs.separation,
            bound=target,
            margin=rs.separation - target,
            k=rs.k,
            detail="min ||m alpha|| over 0 < m < q_(t_k) equals ||q_(t_k - 1) alpha||",
        )
    )
    report.add(
        CheckResult.exact("rigidity.displacement", rs.displacement == rs.buffer, value=rs.displacement,
                          bound=rs.buffer, k=rs.k, detail="sup over E_k of d(z, T^(q_(t_k)) z)")
    )
    if rs.H_connected is None:
        report.add(
            CheckResult.info("rigidity.H", k=rs.k, detail="||q_(t_k) alpha|| >= c / (2 q_(t_k))")
        )
    else:
        report.add(CheckResult.exact("rigidity.H", rs.H_connected, k=rs.k, value=rs.buffer))
    report.compute_summary()
    return report
