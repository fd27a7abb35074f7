"""
Construction data models.

A ConstructionState holds the digit schedule fixed through a_{t_N + 1}, one
StageRecord per completed stage, the witness certificates found so far and the
magnitude certificates for quantities that could not be materialized.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ergoflow.cf.arithmetic import denominator, representative
from ergoflow.cf.loader import ScheduleLoader
from ergoflow.cf.models import AngleRep, DigitSchedule
from ergoflow.core.config import RunConfig, RunMode
from ergoflow.core.exceptions import ConfigError
from ergoflow.core.logforms import LogLinearForm, fraction_str
from ergoflow.core.types import Rational, parse_fraction
from ergoflow.geometry.models import TorusPoint
from ergoflow.skew.models import SkewConfig

FORMAT_VERSION = 1

# relaxed defaults: every object of the first two stages fits on a desk
RELAXED_THETA = Fraction(10**9)
RELAXED_TAU_FLOOR = Fraction(3, 2)
RELAXED_T_EXPONENT = 1
RELAXED_CAPS = {"max_index": 400, "max_tower_q": 200_000, "max_window_q": 10**7}

RELAXABLE = (
    "tau",
    "tau_floor",
    "slack",
    "theta",
    "lead",
    "floor",
    "clearance",
    "t_exponent",
    "max_index",
    "max_tower_q",
    "max_window_q",
)


class ConstructionParams(BaseModel):
    """Constants and search caps of the inductive construction."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: RunMode = Field(default=RunMode.FAITHFUL, description="Faithful or relaxed constants")
    tau: Optional[Rational] = Field(
        default=Fraction(60), description="Window multiplier; None picks the smallest feasible one"
    )
    tau_floor: Rational = Field(default=Fraction(2), description="Lower limit of the automatic tau")
    slack: Rational = Field(default=Fraction(18), description="Coefficient of q_(n_2k + 1) in the log-lead condition")
    theta: Rational = Field(default=Fraction(1), description="Divisor of the slack term")
    lead: Rational = Field(default=Fraction(1, 10), description="Leading constant of the log-lead condition")
    floor: Rational = Field(default=Fraction(1, 15), description="Right-hand side of the log-lead condition")
    clearance: int = Field(default=16, ge=1, description="Orbit clearance factor of the witness search")
    t_exponent: int = Field(default=2, ge=1, description="q_(t_k) must exceed q_(n_2k+1) to this power")
    M: int = Field(default=3, ge=3, description="Cap on the digits after odd checkpoints")
    max_index: int = Field(default=400, ge=8, description="Largest digit index a search may reach")
    max_tower_q: int = Field(default=10**6, ge=2, description="Largest q_(n_2k+1) a tower is built for")
    max_window_q: int = Field(default=10**7, ge=2, description="Largest q_(t_k) that is materialized")

    @model_validator(mode="after")
    def _check_constants(self) -> "ConstructionParams":
        if self.lead <= self.floor:
            raise ValueError(f"lead {self.lead} must exceed floor {self.floor}")
        if self.floor <= 0 or self.theta <= 0 or self.slack < 0:
            raise ValueError("floor and theta must be positive, slack non-negative")
        if self.tau is not None and self.tau <= 1:
            raise ValueError(f"tau must exceed 1, got {self.tau}")
        if self.tau_floor <= 1:
            raise ValueError(f"tau_floor must exceed 1, got {self.tau_floor}")
        if self.mode == RunMode.FAITHFUL and self.tau is None:
            raise ValueError("faithful mode needs an explicit tau")
        return self

    @classmethod
    def faithful(cls) -> "ConstructionParams":
        return cls()

    @classmethod
    def relaxed(cls, **overrides: Any) -> "ConstructionParams":
        """
        Desk-scale constants: automatic tau from 3/2 up, the slack term divided
        by 10^9 and q_(t_k) only above q_(n_2k+1) itself.

        Args:
            **overrides: Any of the RELAXABLE names, as numbers or "p/q" strings.
        """
        unknown = set(overrides) - set(RELAXABLE)
        if unknown:
            raise ConfigError(f"Unknown relaxed constants: {sorted(unknown)}")
        values: dict[str, Any] = {
            "mode": RunMode.RELAXED,
            "tau": None,
            "theta": RELAXED_THETA,
            "tau_floor": RELAXED_TAU_FLOOR,
            "t_exponent": RELAXED_T_EXPONENT,
        }
        values.update(RELAXED_CAPS)
        for key, raw in overrides.items():
            if raw is None:
                continue
            if key in ("clearance", "t_exponent", "max_index", "max_tower_q", "max_window_q"):
                values[key] = int(raw)
            else:
                values[key] = parse_fraction(raw)
        return cls(**values)

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "ConstructionParams":
        """Params for a CLI run; faithful runs keep the fixed constants."""
        if config.mode == RunMode.FAITHFUL:
            return cls.faithful()
        overrides = dict(config.relaxed_params or {})
        if config.tau is not None:
            overrides["tau"] = config.tau
        try:
            return cls.relaxed(**overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def effective_slack(self) -> Fraction:
        return self.slack / self.theta

    @property
    def log_requirement_factor(self) -> Fraction:
        """The log-lead condition rearranged: log q_(n_2k+1) > factor * q_(n_2k + 1)."""
        return self.effective_slack / (self.lead - self.floor)

    def constants(self) -> dict[str, str]:
        """Header of every report produced from these params."""
        return {
            "mode": self.mode.value,
            "tau": fraction_str(self.tau) if self.tau is not None else "auto",
            "tau_floor": fraction_str(self.tau_floor),
            "slack": fraction_str(self.slack),
            "theta": fraction_str(self.theta),
            "lead": fraction_str(self.lead),
            "floor": fraction_str(self.floor),
            "clearance": str(self.clearance),
            "t_exponent": str(self.t_exponent),
            "M": str(self.M),
        }

    def to_payload(self) -> dict[str, Any]:
        payload = self.constants()
        payload["tau"] = fraction_str(self.tau) if self.tau is not None else None
        payload.update(
            max_index=self.max_index,
            max_tower_q=self.max_tower_q,
            max_window_q=self.max_window_q,
        )
        return payload

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "ConstructionParams":
        data = dict(payload)
        data["mode"] = RunMode(data["mode"])
        for key in ("clearance", "t_exponent", "M"):
            data[key] = int(data[key])
        return cls(**data)


class MagnitudeCertificate(BaseModel):
    """Certified lower bound for a quantity too large to materialize."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    stage: int = Field(..., description="Stage the quantity belongs to")
    quantity: str = Field(..., description="Quantity, e.g. 'log q_(n_3)'")
    condition: str = Field(..., description="Condition forcing the bound")
    log_lower_bound: Rational = Field(..., description="Lower bound on the natural log")
    index_lower_bound: Optional[int] = Field(default=None, description="Lower bound on the index")
    detail: str = Field(default="", description="How the bound follows")

    @property
    def log2_lower_bound(self) -> Fraction:
        """log_2 lower bound, rounded down through log 2 < 7/10."""
        return self.log_lower_bound / Fraction(7, 10)


class StageRecord(BaseModel):
    """Everything fixed by stage k of the construction."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=1, description="Stage")
    n_even: int = Field(..., description="n_(2k)")
    n_odd: int = Field(..., description="n_(2k+1)")
    t: int = Field(..., description="t_k")
    a_even: int = Field(..., description="a_(n_2k + 1)")
    a_window: int = Field(..., description="a_(t_k + 1)")
    ell0: int = Field(..., description="Class threshold of level 2k+1")
    phi: LogLinearForm = Field(..., description="Phi_k in closed form")
    tau: Rational = Field(..., description="Window multiplier used at this stage")

    @property
    def A(self) -> Fraction:
        """Roof weight tau / (tau - 1)."""
        return self.tau / (self.tau - 1)

    @property
    def level(self) -> int:
        return 2 * self.k + 1

    def to_payload(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "n_even": self.n_even,
            "n_odd": self.n_odd,
            "t": self.t,
            "a_even": self.a_even,
            "a_window": self.a_window,
            "ell0": self.ell0,
            "phi": self.phi.to_payload(),
            "tau": fraction_str(self.tau),
            "A": fraction_str(self.A),
        }

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "StageRecord":
        data = {key: value for key, value in payload.items() if key not in ("phi", "A")}
        return cls(phi=LogLinearForm.from_payload(payload["phi"]), **data)


class WitnessCertificate(BaseModel):
    """Why (y_k, j_k) is admissible, in exact terms."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int = Field(..., ge=1, description="Stage")
    y: Rational = Field(..., description="Base coordinate y_k")
    j: int = Field(..., description="Level j_k")
    component_index: int = Field(..., description="Index of the component among the arcs of U_(2k+1)")
    component_left: Rational = Field(..., description="c_l")
    component_right: Rational = Field(..., description="c_(l+1); may exceed 1 for a wrapping arc")
    buffer: Rational = Field(..., description="||q_(t_k) alpha||")
    omega_clearance: Rational = Field(..., description="Closest approach of the orbit to 0 and |J|")
    clearance_bound: Rational = Field(..., description="1 / (clearance * q_(t_k))")
    coincidence_horizon: int = Field(..., description="Verified length of T = T_(2k+1) along the orbit")
    return_point: Rational = Field(..., description="Base coordinate of T^(q_(t_k)) (y_k, j_k)")
    displacement: Rational = Field(..., description="Distance between the witness and its return")
    diagnostics: dict[str, Rational] = Field(
        default_factory=dict, description="Omega, coincidence and short-component measure terms"
    )

    @property
    def point(self) -> TorusPoint:
        return TorusPoint(self.y, self.j)

    def to_payload(self) -> dict[str, Any]:
        return json.loads(self.model_dump_json())


class ConstructionState(BaseModel):
    """Output of the construction after `stage` completed stages."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    stage: int = Field(..., ge=0, description="Completed stages N")
    schedule: DigitSchedule = Field(..., description="Digits fixed through a_(t_N + 1)")
    params: ConstructionParams = Field(..., description="Constants the stages were built with")
    records: tuple[StageRecord, ...] = Field(default=(), description="One record per stage")
    witnesses: tuple[WitnessCertificate, ...] = Field(default=(), description="Witness certificates")
    magnitudes: tuple[MagnitudeCertificate, ...] = Field(
        default=(), description="Bounds for quantities that were not materialized"
    )

    @property
    def complete(self) -> bool:
        """False when a stage stopped at a magnitude certificate."""
        return not self.magnitudes

    @property
    def mode(self) -> RunMode:
        return self.params.mode

    @property
    def phi_values(self) -> list[LogLinearForm]:
        return [record.phi for record in self.records]

    def record(self, k: int) -> StageRecord:
        if not 1 <= k <= len(self.records):
            raise IndexError(f"stage {k} not built (state has {len(self.records)})")
        return self.records[k - 1]

    def witness(self, k: int) -> Optional[WitnessCertificate]:
        for cert in self.witnesses:
            if cert.k == k:
                return cert
        return None

    def q(self, n: int) -> int:
        return denominator(self.schedule, n)

    @property
    def alpha(self) -> AngleRep:
        """Rational stand-in sharing every fixed digit."""
        return representative(self.schedule)

    def config(self) -> SkewConfig:
        """The skew product T with every checkpoint built so far."""
        return SkewConfig(alpha=self.alpha, schedule=self.schedule)

    def with_witnesses(self, witnesses: list[WitnessCertificate]) -> "ConstructionState":
        return self.model_copy(update={"witnesses": tuple(sorted(witnesses, key=lambda c: c.k))})

    # persistence

    def to_payload(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "stage": self.stage,
            "complete": self.complete,
            "schedule": {
                "digits": list(self.schedule.digits),
                "even_checkpoints": list(self.schedule.even_checkpoints),
                "odd_checkpoints": list(self.schedule.odd_checkpoints),
                "M": self.schedule.M,
            },
            "params": self.params.to_payload(),
            "records": [record.to_payload() for record in self.records],
            "witnesses": [cert.to_payload() for cert in self.witnesses],
            "magnitudes": [json.loads(m.model_dump_json()) for m in self.magnitudes],
        }

    def dumps(self) -> str:
        """Deterministic JSON text."""
        return json.dumps(self.to_payload(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_payload(cls, payload: dict[str, Any]) -> "ConstructionState":
        version = payload.get("format_version")
        if version != FORMAT_VERSION:
            raise ConfigError(f"Unsupported state format_version {version!r}")
        return cls(
            stage=payload["stage"],
            schedule=ScheduleLoader.load_from_dict(payload["schedule"]),
            params=ConstructionParams.from_payload(payload["params"]),
            records=tuple(StageRecord.from_payload(r) for r in payload.get("records", [])),
            witnesses=tuple(WitnessCertificate(**w) for w in payload.get("witnesses", [])),
            magnitudes=tuple(MagnitudeCertificate(**m) for m in payload.get("magnitudes", [])),
        )

    @classmethod
    def loads(cls, text: str) -> "ConstructionState":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Malformed state JSON: {exc}") from exc
        return cls.from_payload(payload)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        return path

    @classmethod
    def load(cls, path: str | Path) -> "ConstructionState":
        path = Path(path)
        try:
            return cls.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"Cannot read state file {path}: {exc}") from exc
