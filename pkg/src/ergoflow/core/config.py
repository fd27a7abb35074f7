"""
Run configuration.

A RunConfig collects everything a CLI command needs. It loads from a YAML file
with a `run:` section and an optional `relaxed:` section of named constants;
command-line flags override file values.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Optional

import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ergoflow.core.exceptions import ConfigError
from ergoflow.core.numerics import MIN_PRECISION_BITS, default_precision_bits

logger = structlog.get_logger(__name__)


class CommandName(str, Enum):
    """CLI commands a RunConfig can drive."""

    CONSTRUCT = "construct"
    VERIFY = "verify"
    FLOW = "flow"
    PROBE = "probe"
    EXPORT = "export"


class RunMode(str, Enum):
    """Faithful constants or relaxed desk-scale constants."""

    FAITHFUL = "faithful"
    RELAXED = "relaxed"


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"


class RunConfig(BaseModel):
    """Configuration of one CLI run."""

    model_config = ConfigDict(use_enum_values=False)

    command: CommandName = Field(default=CommandName.VERIFY, description="Command to run")
    schedule_file: Optional[Path] = Field(default=None, description="Digit-schedule file")
    mode: RunMode = Field(default=RunMode.RELAXED, description="Constant regime")
    relaxed_params: Optional[dict[str, str]] = Field(
        default=None, description="Named constants overriding faithful values (relaxed mode only)"
    )
    precision_bits: int = Field(
        default_factory=default_precision_bits, description="Starting precision for enclosures"
    )
    output: Optional[Path] = Field(default=None, description="Output file or directory")
    seed: int = Field(default=0, description="Seed for sampled diagnostics")
    workers: int = Field(default=1, ge=1, description="Worker threads for fan-out")
    format: OutputFormat = Field(default=OutputFormat.csv, description="Tabular output format")
    stages: int = Field(default=1, ge=1, description="Construction stages")
    suite: Optional[str] = Field(default=None, description="Verification suite name")
    tau: Optional[str] = Field(default=None, description="Window multiplier (relaxed mode)")

    @field_validator("precision_bits")
    @classmethod
    def _check_precision(cls, value: int) -> int:
        if value < MIN_PRECISION_BITS:
            raise ValueError(f"precision_bits must be >= {MIN_PRECISION_BITS}")
        return value

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if not 0 <= value < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return value

    @model_validator(mode="after")
    def _check_relaxed_params(self) -> "RunConfig":
        if self.mode == RunMode.FAITHFUL:
            if self.relaxed_params or self.tau is not None:
                raise ValueError("relaxed constants are only accepted in relaxed mode")
        elif self.relaxed_params is None:
            self.relaxed_params = {}
        return self

    def merged(self, **overrides: Any) -> "RunConfig":
        """Copy with non-None overrides applied and re-validated."""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return ConfigLoader.load_from_dict({"run": data})


class ConfigLoader:
    """Loads run configurations from YAML files and dictionaries."""

    @staticmethod
    def load_from_yaml(path: str | Path) -> RunConfig:
        """
        Load a RunConfig from a YAML file.

        Args:
            path: Path to the YAML configuration.

        Returns:
            Validated RunConfig.
        """
        path = Path(path)
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except OSError as exc:
            raise ConfigError(f"Cannot read config file {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"Malformed YAML in {path}: {exc}") from exc

        logger.info("Config loaded from YAML", path=str(path))
        return ConfigLoader.load_from_dict(data)

    @staticmethod
    def load_from_dict(data: dict[str, Any]) -> RunConfig:
        """
        Load a RunConfig from a mapping with `run` and `relaxed` sections.

        A flat mapping without a `run` key is treated as the run section.
        """
        if not isinstance(data, dict):
            raise ConfigError("Config must be a mapping")
        run = dict(data.get("run", data if "relaxed" not in data else {}))
        relaxed = data.get("relaxed")
        if relaxed is not None:
            if not isinstance(relaxed, dict):
                raise ConfigError("'relaxed' section must be a mapping")
            params = dict(run.get("relaxed_params") or {})
            params.update({str(k): str(v) for k, v in relaxed.items()})
            run["relaxed_params"] = params
        try:
            return RunConfig(**run)
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
