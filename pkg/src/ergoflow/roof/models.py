"""
Roof-function data models.
"""

from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ergoflow.cf.models import AngleRep
from ergoflow.core.logforms import fraction_str
from ergoflow.core.types import Rational
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint


class RoofPart(str, Enum):
    """Which part of the roof f = g + h_A to evaluate."""

    F = "f"
    G = "g"
    H = "h"


class RoofSpec(BaseModel):
    """
    The roof f = g + h_A over T x Z2.

    g carries the asymmetric singularity over x0 (coefficient 2 on the right,
    3 on the left) and a symmetric one over x1 on both levels; h_A carries a
    symmetric singularity of weight A over 0 on level 1 only.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    A: Rational = Field(..., description="Weight of the level-1 singularity, A > 1")
    x0: Rational = Field(..., description="Representative of 1 - alpha in [0, 1)")
    x1: Rational = Field(..., description="Representative of |J| - alpha in [0, 1)")
    alpha: AngleRep = Field(..., description="Rotation angle the roof was assembled for")

    @field_validator("A")
    @classmethod
    def _check_weight(cls, value: Fraction) -> Fraction:
        if value <= 1:
            raise ValueError(f"A must exceed 1, got {value}")
        return value

    @field_validator("x0", "x1")
    @classmethod
    def _check_point(cls, value: Fraction) -> Fraction:
        if not 0 <= value < 1:
            raise ValueError(f"singularity must lie in [0, 1), got {value}")
        return value

    @property
    def singularities(self) -> list[TorusPoint]:
        """z1..z4 over x0 and x1 on both levels, then z0 = (0, 1)."""
        return [
            TorusPoint(self.x0, 0),
            TorusPoint(self.x0, 1),
            TorusPoint(self.x1, 0),
            TorusPoint(self.x1, 1),
            TorusPoint(Fraction(0), 1),
        ]

    def with_weight(self, A: Fraction) -> "RoofSpec":
        return RoofSpec(A=A, x0=self.x0, x1=self.x1, alpha=self.alpha)


class RegionFamily(BaseModel):
    """
    The regions A_m..F_m of level m, projected to T (stored on level 0).

    w is ||q_{n_{m-1}} alpha||, the width of F_m = [0, w).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int = Field(..., gt=1, description="Tower level")
    w: Rational = Field(..., description="||q_{n_{m-1}} alpha||")
    A_m: TorusIntervalSet = Field(..., description="U_{m-1} on level 1 within [w, 1/2)")
    B_m: TorusIntervalSet = Field(..., description="U_{m-1} on level 1 within [1/2, 1 - w)")
    C_m: TorusIntervalSet = Field(..., description="U_m minus U_{m-1} on level 1 within [w, 1/2)")
    D_m: TorusIntervalSet = Field(..., description="U_{m-1} minus U_m on level 1 within [1/2, 1 - w)")
    E_m: TorusIntervalSet = Field(..., description="U_m symdiff U_{m-1} on level 1")
    F_m: TorusIntervalSet = Field(..., description="[0, w)")

    def named(self) -> dict[str, TorusIntervalSet]:
        return {
            "A": self.A_m,
            "B": self.B_m,
            "C": self.C_m,
            "D": self.D_m,
            "E": self.E_m,
            "F": self.F_m,
        }

    def endpoints(self) -> list[Fraction]:
        """Every endpoint of every region, reduced mod 1 and sorted."""
        points: set[Fraction] = set()
        for region in self.named().values():
            points.update(region.discontinuities(0))
        return sorted(points)

    def to_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"m": self.m, "w": fraction_str(self.w)}
        for name, region in self.named().items():
            payload[name] = region.to_payload()
        return payload
