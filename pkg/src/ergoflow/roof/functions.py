"""
The roof f = g + h_A and its right-continuous derivatives.

g(x, j) = 1 - 2 log||x - x0|| - [x < x0] log(x0 - x) - log||x - x1||
h_A(x, j) = -A [j = 1] log||x||

Values are returned as exact log-linear forms (or enclosures of them);
derivatives of every order are rational and returned exactly.
"""

from fractions import Fraction
from math import floor
from typing import Optional

import structlog

from ergoflow.cf.arithmetic import frac_part
from ergoflow.core.exceptions import SingularOrbitError, SingularPointError
from ergoflow.core.logforms import LogLinearForm
from ergoflow.core.numerics import Enclosure
from ergoflow.geometry.metric import circle_dist
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof.models import RoofPart, RoofSpec
from ergoflow.skew.models import SkewConfig, TowerLevel
from ergoflow.skew.system import orbit, slit_length

logger = structlog.get_logger(__name__)

_HALF = Fraction(1, 2)


def roof_spec_for(cfg: SkewConfig, A: Fraction) -> RoofSpec:
    """Assemble the roof over T: x0 = 1 - alpha and x1 = |J| - alpha, mod 1."""
    alpha = cfg.angle
    return RoofSpec(
        A=A,
        x0=frac_part(1 - alpha),
        x1=frac_part(slit_length(cfg) - alpha),
        alpha=cfg.alpha,
    )


def _side(x: Fraction, a: Fraction) -> int:
    """Right derivative sign of ||x - a||: +1 on the right of a, -1 on the left."""
    r = x - a
    r -= floor(r)
    return 1 if r < _HALF else -1


def _check_regular(spec: RoofSpec, z: TorusPoint, part: RoofPart) -> Fraction:
    x = frac_part(Fraction(z.x))
    if part in (RoofPart.F, RoofPart.G) and x in (spec.x0, spec.x1):
        raise SingularPointError(z, part.value)
    if part in (RoofPart.F, RoofPart.H) and z.level == 1 and x == 0:
        raise SingularPointError(z, part.value)
    return x


def _g_form(spec: RoofSpec, x: Fraction) -> LogLinearForm:
    form = LogLinearForm(
        constant=Fraction(1),
        terms=((Fraction(-2), circle_dist(x, spec.x0)), (Fraction(-1), circle_dist(x, spec.x1))),
    )
    if x < spec.x0:
        form = form - LogLinearForm.log(spec.x0 - x)
    return form


def _h_form(spec: RoofSpec, x: Fraction, level: int) -> LogLinearForm:
    if level == 0:
        return LogLinearForm.rational(0)
    return LogLinearForm.log(circle_dist(x, 0), -spec.A)


def roof_form(spec: RoofSpec, z: TorusPoint, part: RoofPart = RoofPart.F) -> LogLinearForm:
    """
    Exact value of f, g or h_A at z.

    Raises:
        SingularPointError: If z is a singularity of the requested part.
    """
    part = RoofPart(part)
    x = _check_regular(spec, z, part)
    if part == RoofPart.G:
        return _g_form(spec, x)
    if part == RoofPart.H:
        return _h_form(spec, x, z.level)
    return _g_form(spec, x) + _h_form(spec, x, z.level)


def eval_roof(
    spec: RoofSpec, z: TorusPoint, part: RoofPart = RoofPart.F, bits: Optional[int] = None
) -> Enclosure:
    """Verified enclosure of f, g or h_A at z."""
    return roof_form(spec, z, part).enclose(bits)


def _g_deriv(spec: RoofSpec, x: Fraction, order: int) -> Fraction:
    d0 = circle_dist(x, spec.x0)
    d1 = circle_dist(x, spec.x1)
    left = x < spec.x0
    if order == 1:
        value = -2 * _side(x, spec.x0) / d0 - _side(x, spec.x1) / d1
        if left:
            value += 1 / (spec.x0 - x)
        return value
    value = 2 / d0**2 + 1 / d1**2
    if left:
        value += 1 / (spec.x0 - x) ** 2
    return value


def _h_deriv(spec: RoofSpec, x: Fraction, level: int, order: int) -> Fraction:
    if level == 0:
        return Fraction(0)
    d = circle_dist(x, 0)
    if order == 1:
        return -spec.A * _side(x, Fraction(0)) / d
    return spec.A / d**2


def eval_roof_deriv(
    spec: RoofSpec, z: TorusPoint, order: int, part: RoofPart = RoofPart.F
) -> Fraction:
    """
    Right-continuous derivative of the given order (1 or 2) in x.

    Raises:
        SingularPointError: If z is a singularity of the requested part.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    part = RoofPart(part)
    x = _check_regular(spec, z, part)
    value = Fraction(0)
    if part in (RoofPart.F, RoofPart.G):
        value += _g_deriv(spec, x, order)
    if part in (RoofPart.F, RoofPart.H):
        value += _h_deriv(spec, x, z.level, order)
    return value


def h1_prime(z: TorusPoint) -> Fraction:
    """h_1'(x, j) = [j = 1] (chi_[1/2,1) - chi_(0,1/2))(x) / ||x||."""
    if z.level == 0:
        return Fraction(0)
    x = frac_part(Fraction(z.x))
    if x == 0:
        raise SingularPointError(z, "h")
    return -_side(x, Fraction(0)) / circle_dist(x, 0)


def phi_function(tower: TowerLevel, x: Fraction) -> Fraction:
    """
    phi_{alpha,m}(x) = (chi_[1/2,1) - chi_(0,1/2))(x) / ||x|| * chi_{U_m}(x, 1).

    Raises:
        SingularPointError: At x = 0.
    """
    x = frac_part(Fraction(x))
    if x == 0:
        raise SingularPointError(TorusPoint(x, 1), "phi")
    if not tower.U.contains(TorusPoint(x, 1)):
        return Fraction(0)
    return -_side(x, Fraction(0)) / circle_dist(x, 0)


def roof_sum(spec: RoofSpec, cfg: SkewConfig, z: TorusPoint, n: int) -> LogLinearForm:
    """
    S_n(T, f)(z) as an exact log-linear form.

    Raises:
        SingularOrbitError: If one of the n orbit points is a roof singularity.
    """
    forms: list[LogLinearForm] = []
    for index, point in enumerate(orbit(cfg, z, n)):
        try:
            forms.append(roof_form(spec, point))
        except SingularPointError as exc:
            raise SingularOrbitError(index, point) from exc
    logger.debug("Roof sum formed", n=n, start=str(z))
    return LogLinearForm.sum(forms)
