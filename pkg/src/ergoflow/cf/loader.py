"""
Digit-schedule loading.

Reads the `key = value` text format (one line each for digits, even_checkpoints,
odd_checkpoints and M; `#` starts a comment) and YAML mappings with the same
keys.
"""

from pathlib import Path
from typing import Any

import structlog
import yaml
from pydantic import ValidationError

from ergoflow.cf.models import DigitSchedule
from ergoflow.core.exceptions import InvalidScheduleError, ScheduleFormatError

logger = structlog.get_logger(__name__)

SCHEDULE_KEYS = ("digits", "even_checkpoints", "odd_checkpoints", "M")
BUNDLED_DIR = Path(__file__).resolve().parent.parent / "schedules"


def _parse_int_list(key: str, raw: str, line_no: int) -> list[int]:
    raw = raw.strip()
    if not raw:
        return []
    try:
        return [int(part) for part in raw.replace(" ", "").split(",") if part]
    except ValueError as exc:
        raise ScheduleFormatError(f"line {line_no}: '{key}' expects comma-separated integers") from exc


class ScheduleLoader:
    """Loads digit schedules from text, YAML files and dictionaries."""

    @staticmethod
    def load_from_text(text: str) -> DigitSchedule:
        """
        Parse the `key = value` schedule format.

        Args:
            text: File contents.

        Returns:
            Validated DigitSchedule.

        Raises:
            ScheduleFormatError: On unknown keys, duplicates or malformed values.
            InvalidScheduleError: If the values violate schedule invariants.
        """
        data: dict[str, Any] = {}
        for line_no, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScheduleFormatError(f"line {line_no}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in SCHEDULE_KEYS:
                raise ScheduleFormatError(f"line {line_no}: unknown key '{key}'")
            if key in data:
                raise ScheduleFormatError(f"line {line_no}: duplicate key '{key}'")
            if key == "M":
                try:
                    data[key] = int(raw)
                except ValueError as exc:
                    raise ScheduleFormatError(f"line {line_no}: 'M' expects an integer") from exc
            else:
                data[key] = _parse_int_list(key, raw, line_no)
        if "digits" not in data:
            raise ScheduleFormatError("missing 'digits' line")
        return ScheduleLoader.load_from_dict(data)

    @staticmethod
    def load_from_file(path: str | Path) -> DigitSchedule:
        """Load a schedule file; `.yaml`/`.yml` files are read as YAML mappings."""
        path = Path(path)
        try:
            content = path.read_text()
        except OSError as exc:
            raise ScheduleFormatError(f"cannot read schedule file {path}: {exc}") from exc
        if path.suffix in (".yaml", ".yml"):
            try:
                data = yaml.safe_load(content) or {}
            except yaml.YAMLError as exc:
                raise ScheduleFormatError(f"malformed YAML in {path}: {exc}") from exc
            schedule = ScheduleLoader.load_from_dict(data)
        else:
            schedule = ScheduleLoader.load_from_text(content)
        logger.info("Schedule loaded", path=str(path), digits=schedule.length)
        return schedule

    @staticmethod
    def load_from_dict(data: dict[str, Any]) -> DigitSchedule:
        """Build a schedule from a mapping with the schedule keys."""
        if not isinstance(data, dict):
            raise ScheduleFormatError("schedule must be a mapping")
        unknown = set(data) - set(SCHEDULE_KEYS)
        if unknown:
            raise ScheduleFormatError(f"unknown schedule keys: {sorted(unknown)}")
        try:
            return DigitSchedule(
                digits=tuple(data.get("digits") or ()),
                even_checkpoints=tuple(data.get("even_checkpoints") or ()),
                odd_checkpoints=tuple(data.get("odd_checkpoints") or ()),
                M=data.get("M", 3),
            )
        except ValidationError as exc:
            raise InvalidScheduleError(str(exc)) from exc

    @staticmethod
    def load_bundled(name: str) -> DigitSchedule:
        """Load one of the schedules shipped with the package."""
        return ScheduleLoader.load_from_file(BUNDLED_DIR / f"{name}.txt")

    @staticmethod
    def dumps(schedule: DigitSchedule) -> str:
        """Render a schedule in the text format."""
        lines = [
            f"digits = {','.join(map(str, schedule.digits))}",
            f"even_checkpoints = {','.join(map(str, schedule.even_checkpoints))}",
            f"odd_checkpoints = {','.join(map(str, schedule.odd_checkpoints))}",
            f"M = {schedule.M}",
        ]
        return "\n".join(lines) + "\n"
