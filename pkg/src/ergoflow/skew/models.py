"""
Skew-product data models.
"""

from enum import Enum
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ergoflow.cf.models import AngleRep, DigitSchedule
from ergoflow.geometry.intervals import TorusIntervalSet


class SlitMode(str, Enum):
    """Which checkpoints contribute to the slit."""

    FULL = "full"
    TRUNCATED = "truncated"


class SkewConfig(BaseModel):
    """Angle, schedule and slit selection of a skew product T or T_s."""

    model_config = ConfigDict(frozen=True)

    alpha: AngleRep = Field(..., description="Rational stand-in for the angle")
    schedule: DigitSchedule = Field(..., description="Digit schedule with checkpoints")
    slit_mode: SlitMode = Field(default=SlitMode.FULL, description="Full or truncated slit")
    s: Optional[int] = Field(default=None, ge=0, description="Checkpoints kept in truncated mode")

    @model_validator(mode="after")
    def _check_slit_mode(self) -> "SkewConfig":
        if self.slit_mode == SlitMode.TRUNCATED:
            if self.s is None:
                raise ValueError("truncated slit mode needs s")
            if self.s > len(self.schedule.even_checkpoints):
                raise ValueError(
                    f"s = {self.s} exceeds the {len(self.schedule.even_checkpoints)} checkpoints"
                )
        return self

    @property
    def angle(self) -> Fraction:
        return self.alpha.value

    @property
    def checkpoint_count(self) -> int:
        """Number of checkpoints n_1..n_s that build the slit."""
        if self.slit_mode == SlitMode.TRUNCATED:
            return self.s or 0
        return len(self.schedule.even_checkpoints)

    def truncated(self, s: int) -> "SkewConfig":
        """The approximation T_s keeping the first s checkpoints."""
        return SkewConfig(
            alpha=self.alpha, schedule=self.schedule, slit_mode=SlitMode.TRUNCATED, s=s
        )

    def full(self) -> "SkewConfig":
        return SkewConfig(alpha=self.alpha, schedule=self.schedule)

    def with_alpha(self, alpha: AngleRep) -> "SkewConfig":
        return SkewConfig(
            alpha=alpha, schedule=self.schedule, slit_mode=self.slit_mode, s=self.s
        )


class TowerLevel(BaseModel):
    """The sets J'_m, U_m, V_m and the discontinuity set Delta_m of level m."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    m: int = Field(..., ge=0, description="Tower level")
    J_prime: TorusIntervalSet = Field(..., description="Base arc J'_m on both levels (empty for m = 0)")
    U: TorusIntervalSet = Field(..., description="U_m")
    V: TorusIntervalSet = Field(..., description="V_m")
    translates: TorusIntervalSet = Field(
        ..., description="Union of the q_{n_m} images of J'_m, equal to U_m symdiff U_{m-1}"
    )
    delta_m: tuple[Fraction, ...] = Field(..., description="Sorted points k*alpha mod 1, k < 2 sum q_{n_s}")
