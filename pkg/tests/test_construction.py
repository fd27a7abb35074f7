"""
Tests for the inductive construction.
"""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from ergoflow.construction import (
    FORMAT_VERSION,
    ConstructionParams,
    ConstructionState,
    attach_witnesses,
    base_digit,
    conditions_report,
    construct,
    extend_stage,
    phi_window_search,
    weighted_sum_report,
)
from ergoflow.cf.arithmetic import dist_to_int
from ergoflow.core.config import RunConfig, RunMode
from ergoflow.core.exceptions import ConfigError, PreconditionError
from ergoflow.flow import build_rigidity_set, criterion_check, rigidity_report


class TestConstructionParams:
    """Test cases for the construction constants."""

    def test_faithful_defaults(self):
        """Test the fixed faithful constants."""
        params = ConstructionParams.faithful()
        assert params.mode == RunMode.FAITHFUL
        assert params.tau == 60
        assert params.effective_slack == 18
        assert params.log_requirement_factor == Fraction(18) / (Fraction(1, 10) - Fraction(1, 15))

    def test_relaxed_defaults(self):
        """Test that relaxed mode picks tau automatically and divides the slack."""
        params = ConstructionParams.relaxed()
        assert params.mode == RunMode.RELAXED
        assert params.tau is None
        assert params.effective_slack == Fraction(18, 10**9)
        assert params.constants()["tau"] == "auto"
        assert params.tau_floor == Fraction(3, 2)
        assert params.t_exponent == 1
        assert params.max_tower_q == 200_000

    def test_relaxed_overrides(self):
        """Test that overrides accept fraction strings."""
        params = ConstructionParams.relaxed(tau="5/2", clearance="4")
        assert params.tau == Fraction(5, 2)
        assert params.clearance == 4

    def test_relaxed_unknown_name(self):
        """Test that an unknown relaxed constant is rejected."""
        with pytest.raises(ConfigError):
            ConstructionParams.relaxed(bogus=1)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"lead": "1/20"},
            {"tau": 1},
            {"tau_floor": "1/2"},
        ],
    )
    def test_invalid_constants(self, overrides):
        """Test the validation of the constants."""
        with pytest.raises(ValidationError):
            ConstructionParams.relaxed(**overrides)

    def test_faithful_needs_tau(self):
        """Test that faithful mode cannot use the automatic tau."""
        with pytest.raises(ValidationError):
            ConstructionParams(tau=None)

    def test_from_run_config(self):
        """Test params built from a run configuration."""
        faithful = ConstructionParams.from_run_config(RunConfig(mode=RunMode.FAITHFUL))
        assert faithful == ConstructionParams.faithful()
        relaxed = ConstructionParams.from_run_config(RunConfig(mode=RunMode.RELAXED, tau="3"))
        assert relaxed.tau == 3


class TestBaseStage:
    """Test cases for the base stage."""

    def test_base_digit(self):
        """Test the minimal digit after n_2."""
        assert base_digit(2, 9) == 3
        assert base_digit(9, 2) == 11

    def test_faithful_stops_at_magnitudes(self):
        """Test that faithful mode certifies the sizes it cannot materialize."""
        state = construct(1)
        assert state.stage == 0
        assert not state.complete
        assert state.records == ()
        assert state.schedule.digits[:5] == (1, 1, 3, 1, 3)
        assert state.schedule.even_checkpoints[:2] == (2, 4)
        assert [m.log_lower_bound for m in state.magnitudes] == [18360, 36720]
        first, second = state.magnitudes
        assert first.index_lower_bound is not None
        assert second.index_lower_bound >= first.index_lower_bound + 2
        assert first.log2_lower_bound > first.log_lower_bound

    def test_faithful_conditions(self):
        """Test the base fragment of the conditions report."""
        report = conditions_report(construct(1))
        assert report.by_name("base.digit")[0].passed
        assert report.by_name("digit.odd")[0].passed
        assert report.by_name("ratio.next")[0].passed
        assert report.passed


class TestRelaxedStage:
    """Test cases for a relaxed stage built with a small Phi."""

    def test_record(self, relaxed_state):
        """Test the checkpoints and digits fixed by stage 1."""
        assert relaxed_state.stage == 1
        assert relaxed_state.complete
        record = relaxed_state.record(1)
        assert (record.n_even, record.n_odd, record.t) == (4, 6, 11)
        assert record.a_even == 3
        assert record.a_window == 7
        assert record.tau == 4
        assert record.A == Fraction(5, 4)
        assert record.level == 3

    def test_schedule(self, relaxed_state):
        """Test the digit schedule after stage 1."""
        schedule = relaxed_state.schedule
        assert schedule.even_checkpoints == (2, 4, 6)
        assert schedule.odd_checkpoints == (11,)
        assert len(schedule.digits) == 12
        assert schedule.digit(7) == 3
        assert schedule.digit(12) == 7

    def test_record_out_of_range(self, relaxed_state):
        """Test that an unbuilt stage is an IndexError."""
        with pytest.raises(IndexError):
            relaxed_state.record(2)

    def test_window_search_replays(self, relaxed_state):
        """Test that the window search re-derives t_1 from the fixed digits."""
        assert phi_window_search(relaxed_state, 1) == 11

    def test_conditions(self, relaxed_state):
        """Test the conditions report of stage 1."""
        report = conditions_report(relaxed_state)
        for name in ("base.digit", "digit.odd", "digit.even", "window.minimal", "ue.digits"):
            assert report.by_name(name), name
            assert all(check.passed for check in report.by_name(name)), name
        assert report.passed

    def test_extend_needs_complete_stage(self):
        """Test that a stage-0 state cannot be extended."""
        with pytest.raises(PreconditionError):
            extend_stage(construct(1))

    def test_witnesses(self, relaxed_state):
        """Test that found witnesses verify."""
        state, report = attach_witnesses(relaxed_state)
        if report.by_name("witness.threshold_not_reached"):
            pytest.skip("stage 1 is below the witness regime")
        assert state.witness(1) is not None
        assert report.passed
        weighted = weighted_sum_report(state, 1)
        assert weighted.title == "weighted_sum.k1"
        assert weighted.by_name("weighted_sum.B")[0].value is not None


@pytest.fixture(scope="module")
def two_stage_state() -> ConstructionState:
    """Provide two relaxed stages built with the real Phi."""
    return construct(2, ConstructionParams.relaxed())


class TestTwoRelaxedStages:
    """Test cases for two relaxed stages built with the real Phi."""

    def test_stages_complete(self, two_stage_state):
        """Test that both stages close and satisfy their conditions."""
        assert two_stage_state.stage == 2
        assert two_stage_state.complete
        first, second = two_stage_state.record(1), two_stage_state.record(2)
        assert first.t < second.n_even < second.n_odd < second.t
        assert second.tau >= Fraction(3, 2)
        assert two_stage_state.q(second.t) > two_stage_state.q(second.n_odd)
        assert conditions_report(two_stage_state).passed

    def test_witnesses_rigidity_and_criterion(self, two_stage_state):
        """Test the witnesses, their rigidity sets and the criterion at each certified stage."""
        state, report = attach_witnesses(two_stage_state)
        assert report.passed
        for k in (1, 2):
            assert state.witness(k) is not None or report.by_name("witness.threshold_not_reached")
        for cert in state.witnesses:
            q_t = state.q(state.record(cert.k).t)
            assert cert.displacement == cert.buffer == dist_to_int(q_t, state.alpha)
            assert rigidity_report(build_rigidity_set(state, cert.k)).passed
            assert criterion_check(state, cert.k, grid=1).passed

    def test_state_is_reproducible(self, two_stage_state, tmp_path):
        """Test that a second build saves byte-identical state."""
        first = two_stage_state.save(tmp_path / "first.json")
        second = construct(2, ConstructionParams.relaxed()).save(tmp_path / "second.json")
        assert first.read_bytes() == second.read_bytes()


class TestPersistence:
    """Test cases for saving and loading states."""

    def test_round_trip(self, relaxed_state, tmp_path):
        """Test that a saved state loads back identically."""
        path = relaxed_state.save(tmp_path / "out" / "state.json")
        loaded = ConstructionState.load(path)
        assert loaded.dumps() == relaxed_state.dumps()
        assert loaded.record(1).phi.is_zero() is False

    def test_magnitudes_persist(self):
        """Test that magnitude certificates survive a round trip."""
        state = construct(1)
        loaded = ConstructionState.loads(state.dumps())
        assert not loaded.complete
        assert loaded.magnitudes == state.magnitudes

    def test_bad_version(self, relaxed_state):
        """Test that an unknown format version is rejected."""
        payload = relaxed_state.to_payload()
        payload["format_version"] = FORMAT_VERSION + 1
        with pytest.raises(ConfigError):
            ConstructionState.from_payload(payload)

    def test_malformed_json(self):
        """Test that malformed JSON is a ConfigError."""
        with pytest.raises(ConfigError):
            ConstructionState.loads("{not json")

    def test_missing_file(self, tmp_path):
        """Test that a missing file is a ConfigError."""
        with pytest.raises(ConfigError):
            ConstructionState.load(tmp_path / "absent.json")
