"""
The rotation R_alpha and the Z2 skew products T and T_s.

T(x, j) = (x + alpha, j + [x + alpha in J]) with J = [0, |J|) the slit. Orbits
run on an integer lattice: every coordinate is a multiple of 1/denom, so an
iterate is one integer addition and one comparison.
"""

from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterator, NamedTuple, Union

import structlog

from ergoflow.cf.arithmetic import class_check, denominator, dist_to_int
from ergoflow.core.exceptions import ClassViolationError, InvalidScheduleError
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.skew.models import SkewConfig

logger = structlog.get_logger(__name__)

Number = Union[int, Fraction]


@lru_cache(maxsize=1024)
def _slit_length(alpha: Fraction, qs: tuple[int, ...]) -> Fraction:
    return 2 * sum((dist_to_int(q, alpha) for q in qs), Fraction(0))


def checkpoint_denominators(cfg: SkewConfig, s: int) -> tuple[int, ...]:
    """(q_{n_1}, ..., q_{n_s}) from the schedule."""
    return tuple(
        denominator(cfg.schedule, n) for n in cfg.schedule.even_checkpoints[:s]
    )


def slit_length(cfg: SkewConfig, s: int | None = None) -> Fraction:
    """|J^s| = 2 * sum_{k <= s} ||q_{n_k} alpha||; s defaults to the configured slit."""
    s = cfg.checkpoint_count if s is None else s
    return _slit_length(cfg.angle, checkpoint_denominators(cfg, s))


def check_consistency(cfg: SkewConfig) -> None:
    """The angle must share the schedule digits up to the last checkpoint used."""
    count = cfg.checkpoint_count
    if count == 0:
        return
    n_max = cfg.schedule.even_checkpoints[count - 1]
    if not class_check(cfg.alpha, cfg.schedule, n_max):
        raise ClassViolationError(
            f"angle {cfg.angle} does not share the first {n_max} schedule digits"
        )


def slit_interval(cfg: SkewConfig) -> TorusIntervalSet:
    """
    The slit J = [0, |J|) on both levels.

    Raises:
        InvalidScheduleError: If |J| >= 1.
    """
    length = slit_length(cfg)
    if length >= 1:
        raise InvalidScheduleError(f"slit length {length} is not below 1")
    return TorusIntervalSet.arc(0, length)


class Lattice(NamedTuple):
    """Common denominator for an orbit: alpha = step/denom, |J| = slit/denom."""

    denom: int
    step: int
    slit: int

    def encode(self, x: Fraction) -> int:
        return x.numerator * (self.denom // x.denominator)

    def decode(self, value: int) -> Fraction:
        return Fraction(value, self.denom)


def lattice_for(cfg: SkewConfig, *points: Number) -> Lattice:
    """Lattice on which alpha, the slit end and the given points all live."""
    alpha = cfg.angle
    length = slit_length(cfg)
    if length >= 1:
        raise InvalidScheduleError(f"slit length {length} is not below 1")
    denom = lcm(alpha.denominator, length.denominator, *(Fraction(p).denominator for p in points))
    return Lattice(
        denom=denom,
        step=alpha.numerator * (denom // alpha.denominator),
        slit=length.numerator * (denom // length.denominator),
    )


def lattice_orbit(
    lattice: Lattice, start: int, level: int, n: int
) -> Iterator[tuple[int, int]]:
    """Yield the n lattice points z, Tz, ..., T^{n-1}z as (numerator, level)."""
    denom, step, slit = lattice
    x = start
    for _ in range(n):
        yield x, level
        x += step
        if x >= denom:
            x -= denom
        if x < slit:
            level ^= 1


def skew_apply(cfg: SkewConfig, z: TorusPoint, k: int, inverse: bool = False) -> TorusPoint:
    """
    T^k z, or T^{-k} z when inverse is set.

    The base coordinate advances by k * alpha; the level flips once per entry of
    the base orbit into the slit (half-open membership).
    """
    if k < 0:
        raise ValueError("k must be non-negative; use inverse=True")
    lattice = lattice_for(cfg, z.x)
    denom, step, slit = lattice
    x = lattice.encode(z.x)
    level = z.level
    if not inverse:
        for _ in range(k):
            x += step
            if x >= denom:
                x -= denom
            if x < slit:
                level ^= 1
    else:
        # T^{-1}(x, j) = (x - alpha, j + [x in J])
        for _ in range(k):
            if x < slit:
                level ^= 1
            x -= step
            if x < 0:
                x += denom
    return TorusPoint(lattice.decode(x), level)


def orbit(cfg: SkewConfig, z: TorusPoint, n: int) -> Iterator[TorusPoint]:
    """Stream the points z, Tz, ..., T^{n-1}z."""
    lattice = lattice_for(cfg, z.x)
    for x, level in lattice_orbit(lattice, lattice.encode(z.x), z.level, n):
        yield TorusPoint(lattice.decode(x), level)


def skew_image(cfg: SkewConfig, s: TorusIntervalSet) -> TorusIntervalSet:
    """Exact image T(S) of an interval set."""
    rotated = s.translate(cfg.angle)
    slit = slit_interval(cfg)
    return rotated.difference(slit).union(rotated.intersect(slit).flip_levels())


def image_pieces(
    pieces: list[tuple[Fraction, Fraction, int]], alpha: Fraction, slit: Fraction
) -> list[tuple[Fraction, Fraction, int]]:
    """
    Image of disjoint pieces [l, r) x {j} (0 <= l < r <= 1) under T.

    Works on raw tuples so long orbits of a short arc avoid canonicalizing a
    set at every step.
    """
    result: list[tuple[Fraction, Fraction, int]] = []
    for left, right, level in pieces:
        left, right = left + alpha, right + alpha
        if left >= 1:
            left, right = left - 1, right - 1
        if right > 1:
            shifted = [(left, Fraction(1)), (Fraction(0), right - 1)]
        else:
            shifted = [(left, right)]
        for a, b in shifted:
            if b <= slit:
                result.append((a, b, level ^ 1))
            elif a >= slit:
                result.append((a, b, level))
            else:
                result.append((a, slit, level ^ 1))
                result.append((slit, b, level))
    return result
