"""
Special-flow data models.
"""

from fractions import Fraction
from typing import Any, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field

from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.numerics import Enclosure
from ergoflow.core.types import Rational
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint


class FlowPoint(NamedTuple):
    """
    A point (z, s) of the flow space with 0 <= s < f(z).

    The height is kept as an exact log-linear form; `decided` is False when a
    rollover comparison stayed undecided at the precision cap.
    """

    base: TorusPoint
    height: LogLinearForm
    decided: bool = True

    def height_enclosure(self, bits: Optional[int] = None) -> Enclosure:
        return self.height.enclose(bits)

    def __str__(self) -> str:
        return f"({self.base}, {self.height})"


class RigiditySet(BaseModel):
    """E_k: the union of the q_(t_k) translates of I_k x {j_k}."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=1, description="Stage")
    c: Rational = Field(..., description="Width constant; I_k has length c / q_(t_k)")
    y: Rational = Field(..., description="Centre y_k of I_k")
    j: int = Field(..., description="Level j_k")
    q_t: int = Field(..., description="q_(t_k), the number of translates")
    I_k: TorusIntervalSet = Field(..., description="I_k x {j_k}")
    E_k: TorusIntervalSet = Field(..., description="Union of T^i(I_k x {j_k}) for i < q_(t_k)")
    measure: Rational = Field(..., description="lambda(E_k)")
    separation: Rational = Field(..., description="min over 0 < m < q_(t_k) of ||m alpha||")
    closest_previous: Rational = Field(..., description="||q_(t_k - 1) alpha||")
    buffer: Rational = Field(..., description="||q_(t_k) alpha||")
    displacement: Rational = Field(..., description="sup over E_k of d(z, T^(q_(t_k)) z)")
    H_connected: Optional[bool] = Field(
        default=None, description="Whether I_k and its q_(t_k)-th image form one arc (None if not required)"
    )

    @property
    def measure_floor(self) -> Fraction:
        return min(Fraction(1), self.c) / 4

    def to_payload(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "c": fraction_str(self.c),
            "y": fraction_str(self.y),
            "j": self.j,
            "q_t": self.q_t,
            "measure": fraction_str(self.measure),
            "separation": fraction_str(self.separation),
            "displacement": fraction_str(self.displacement),
            "components": self.E_k.component_count(),
        }


class FlowObservable(BaseModel):
    """Indicator of {(z, s): z in base, s < height_cap} on the flow space."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    base: TorusIntervalSet = Field(..., description="Base set on T x Z2")
    height_cap: Rational = Field(..., gt=0, description="Upper end of the height window")
    label: str = Field(default="", description="Name used in tables")

    def contains(self, p: FlowPoint, bits: Optional[int] = None) -> Optional[bool]:
        """Membership, or None when the height comparison is undecided."""
        if not self.base.contains(p.base):
            return False
        sign = (LogLinearForm.rational(self.height_cap) - p.height).sign(bits)
        if sign is None:
            return None
        return sign > 0


class CorrelationRow(BaseModel):
    """One time of the correlation table."""

    t: str = Field(..., description="Flow time")
    estimate: float = Field(..., description="Fraction of samples in O with their time-t image in O'")
    stderr: float = Field(..., description="Binomial standard error")
    seed: int = Field(..., description="Root seed of the sample streams")
    samples: int = Field(..., description="Number of accepted samples")
    undecided: int = Field(default=0, description="Samples whose membership stayed undecided")

    def to_row(self) -> dict[str, Any]:
        return self.model_dump()
