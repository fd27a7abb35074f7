"""
Pytest configuration and fixtures.
"""

from fractions import Fraction

import pytest
import structlog

from ergoflow.birkhoff.bounds import class_threshold
from ergoflow.cf import ScheduleLoader
from ergoflow.cf.arithmetic import denominator
from ergoflow.cf.models import AngleRep, DigitSchedule
from ergoflow.construction import ConstructionParams, ConstructionState, construct
from ergoflow.core.logforms import LogLinearForm
from ergoflow.skew.models import SkewConfig


@pytest.fixture(autouse=True)
def _reset_structlog():
    """Undo CLI logging config so later tests don't write to a closed capture stream."""
    yield
    structlog.reset_defaults()


def half_log_phi(schedule: DigitSchedule, m: int) -> tuple[LogLinearForm, int]:
    """A cheap Phi stand-in, (1/2) log q_(n_m), that keeps relaxed stages small."""
    q = denominator(schedule, schedule.checkpoint(m))
    return LogLinearForm.log(q, Fraction(1, 2)), class_threshold(schedule, m)


@pytest.fixture
def toy_schedule() -> DigitSchedule:
    """Provide the bundled toy schedule [0; 1, 1, 3] with checkpoint n_1 = 2."""
    return ScheduleLoader.load_bundled("toy")


@pytest.fixture
def desk_schedule() -> DigitSchedule:
    """Provide the bundled two-checkpoint desk schedule."""
    return ScheduleLoader.load_bundled("desk_m2")


@pytest.fixture
def toy_config(toy_schedule: DigitSchedule) -> SkewConfig:
    """Provide the skew product over the rotation by 4/7 with slit 2/7."""
    alpha = AngleRep(value=Fraction(4, 7), matched_prefix_len=3)
    return SkewConfig(alpha=alpha, schedule=toy_schedule)


@pytest.fixture
def schedule_file(tmp_path):
    """Provide a schedule file written to a temporary directory."""
    path = tmp_path / "schedule.txt"
    path.write_text("digits = 1,1,3,1,3,1,1,1,1,1,1,1\neven_checkpoints = 2,4\nM = 3\n")
    return path


@pytest.fixture
def relaxed_state() -> ConstructionState:
    """Provide a one-stage relaxed construction built with the half-log Phi."""
    return construct(1, ConstructionParams.relaxed(), phi_source=half_log_phi)
