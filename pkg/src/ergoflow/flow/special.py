"""
The special flow T^f.

A point (z, s) moves up at unit speed and jumps from (z, f(z)) to (Tz, 0).
Heights stay exact: after n rollovers the height is s + t - S_n(T, f)(z), a
log-linear form. The rollover count is found by binary search on the partial
roof sums, comparing enclosures first and exact forms when they straddle.
"""

from fractions import Fraction
from math import floor
from typing import Optional, Union

import structlog

from ergoflow.core.exceptions import SingularOrbitError, SingularPointError
from ergoflow.core.logforms import LogLinearForm
from ergoflow.core.numerics import MAX_PRECISION_BITS, Enclosure, default_precision_bits
from ergoflow.flow.models import FlowPoint
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.functions import roof_form
from ergoflow.roof.models import RoofSpec
from ergoflow.skew.models import SkewConfig
from ergoflow.skew.system import orbit, skew_apply

logger = structlog.get_logger(__name__)

Time = Union[int, Fraction, LogLinearForm]


def roof_integral(spec: RoofSpec) -> LogLinearForm:
    """
    int f dlambda over T x Z2 with lambda normalized to 1.

    Uses int -log||x|| = 1 + log 2 and int_0^x0 -log(x0 - x) dx = x0 - x0 log x0;
    h_A lives on level 1 only and contributes half its circle integral.
    """
    x0 = spec.x0
    form = LogLinearForm.rational(4 + x0 + spec.A / 2) + LogLinearForm.log(2, 3 + spec.A / 2)
    if x0 > 0:
        form = form + LogLinearForm.log(x0, -x0)
    return form


def flow_point(spec: RoofSpec, base: TorusPoint, height: Time = 0) -> FlowPoint:
    """
    A validated flow point.

    Raises:
        SingularPointError: If base is a roof singularity.
        ValueError: If the height is not in [0, f(base)).
    """
    height = LogLinearForm.coerce(height)
    roof = roof_form(spec, base)
    if height.sign() == -1:
        raise ValueError(f"height {height} is negative")
    if (roof - height).sign() != 1:
        raise ValueError(f"height {height} is not below the roof at {base}")
    return FlowPoint(base, height)


def _roof_forms(spec: RoofSpec, cfg: SkewConfig, z: TorusPoint, n: int) -> list[LogLinearForm]:
    forms = []
    for index, point in enumerate(orbit(cfg, z, n)):
        try:
            forms.append(roof_form(spec, point))
        except SingularPointError as exc:
            raise SingularOrbitError(index, point) from exc
    return forms


def _not_above(
    total: LogLinearForm,
    total_enc: Enclosure,
    prefix: list[Enclosure],
    forms: list[LogLinearForm],
    n: int,
    bits: int,
    cap_bits: int,
) -> Optional[bool]:
    """Whether S_n <= total; None when undecided at the cap."""
    gap = total_enc - prefix[n]
    if gap.lo > 0:
        return True
    if gap.hi < 0:
        return False
    sign = (total - LogLinearForm.sum(forms[:n])).sign(bits * 2, cap_bits)
    if sign is None:
        return None
    return sign >= 0


def flow_advance(
    spec: RoofSpec,
    cfg: SkewConfig,
    p: FlowPoint,
    t: Time,
    bits: Optional[int] = None,
    cap_bits: int = MAX_PRECISION_BITS,
) -> FlowPoint:
    """
    Flow p for time t >= 0.

    Since f > 1 everywhere, at most floor(s + t) rollovers happen, which bounds
    the orbit segment that is summed.

    Args:
        spec: Roof over the base.
        cfg: The base map T.
        p: Starting point.
        t: Non-negative time, rational or log-linear.
        bits: Starting precision for the enclosure comparisons.
        cap_bits: Precision at which a comparison is declared undecided.

    Returns:
        The advanced point; its `decided` flag is False if a rollover
        comparison was undecided (the smaller rollover count is then kept).

    Raises:
        SingularOrbitError: If the base orbit hits a roof singularity.
    """
    t = LogLinearForm.coerce(t)
    if t.sign() == -1:
        raise ValueError("flow time must be non-negative")
    if t.is_zero():
        return p
    bits = bits or default_precision_bits()
    total = p.height + t
    total_enc = total.enclose(bits)
    bound = floor(total_enc.hi) + 1
    forms = _roof_forms(spec, cfg, p.base, bound)

    prefix = [Enclosure.exact(0)]
    for form in forms:
        prefix.append(prefix[-1] + form.enclose(bits))

    # largest n with S_n <= total; S_0 = 0 <= total and S_bound > bound > total
    lo, hi = 0, bound
    decided = p.decided
    while hi - lo > 1:
        mid = (lo + hi) // 2
        verdict = _not_above(total, total_enc, prefix, forms, mid, bits, cap_bits)
        if verdict is None:
            decided = False
            logger.warning("Rollover undecided", n=mid, bits=cap_bits)
            hi = mid
        elif verdict:
            lo = mid
        else:
            hi = mid
    height = (total - LogLinearForm.sum(forms[:lo])).grouped()
    base = skew_apply(cfg, p.base, lo)
    logger.debug("Flow advanced", rollovers=lo, base=str(base))
    return FlowPoint(base, height, decided)
