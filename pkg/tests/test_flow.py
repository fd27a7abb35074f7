"""
Tests for the special flow, the rigidity sets and the flow diagnostics.
"""

from fractions import Fraction

import pytest

from ergoflow.cf.arithmetic import representative
from ergoflow.core.exceptions import (
    ConstructionViolatedError,
    PreconditionError,
    SingularOrbitError,
    UnsupportedSetError,
)
from ergoflow.core.logforms import LogLinearForm
from ergoflow.flow import (
    FlowObservable,
    FlowPoint,
    build_rigidity_set,
    correlation_probe,
    criterion_check,
    criterion_report,
    deviation_measure,
    flow_advance,
    flow_point,
    recurrence_times,
    rigidity_report,
    rigidity_set,
    roof_integral,
    roof_integral_for,
    second_derivative_bound,
    ue_probe,
)
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof import RoofSpec, roof_form, roof_spec_for
from ergoflow.skew import SkewConfig
from ergoflow.skew.system import skew_apply


@pytest.fixture
def toy_spec(toy_config) -> RoofSpec:
    """Provide the toy roof with A = 6/5."""
    return roof_spec_for(toy_config, Fraction(6, 5))


@pytest.fixture
def desk_config(desk_schedule) -> SkewConfig:
    """Provide the skew product over the desk-schedule representative."""
    return SkewConfig(alpha=representative(desk_schedule), schedule=desk_schedule)


@pytest.fixture
def start() -> TorusPoint:
    """Provide a base point whose short orbit avoids every singularity."""
    return TorusPoint(Fraction(1, 14), 0)


class TestFlowAdvance:
    """Tests for exact flow advancement."""

    def test_flow_point_bounds(self, toy_spec, start):
        """Test that heights must lie in [0, f(z))."""
        assert flow_point(toy_spec, start, Fraction(1, 2)).height == LogLinearForm.rational(Fraction(1, 2))
        with pytest.raises(ValueError):
            flow_point(toy_spec, start, -1)
        with pytest.raises(ValueError):
            flow_point(toy_spec, start, roof_form(toy_spec, start))

    def test_zero_time(self, toy_spec, toy_config, start):
        """Test that time zero is the identity."""
        p = flow_point(toy_spec, start)
        assert flow_advance(toy_spec, toy_config, p, 0) == p

    def test_negative_time(self, toy_spec, toy_config, start):
        """Test that negative times are rejected."""
        with pytest.raises(ValueError):
            flow_advance(toy_spec, toy_config, flow_point(toy_spec, start), Fraction(-1, 3))

    def test_below_roof(self, toy_spec, toy_config, start):
        """Test that a short time only raises the height."""
        p = flow_point(toy_spec, start, Fraction(1, 4))
        image = flow_advance(toy_spec, toy_config, p, Fraction(1, 2))
        assert image.base == start
        assert (image.height - Fraction(3, 4)).is_zero() is True
        assert image.decided

    def test_exact_rollover(self, toy_spec, toy_config, start):
        """Test that reaching the roof exactly lands on (Tz, 0)."""
        p = flow_point(toy_spec, start)
        image = flow_advance(toy_spec, toy_config, p, roof_form(toy_spec, start))
        assert image.base == skew_apply(toy_config, start, 1)
        assert image.height.is_zero() is True

    def test_composition(self, toy_spec, toy_config, start):
        """Test that advancing in two steps agrees with one step."""
        p = flow_point(toy_spec, start)
        roof = roof_form(toy_spec, start)
        direct = flow_advance(toy_spec, toy_config, p, roof + Fraction(1, 4))
        stepped = flow_advance(
            toy_spec, toy_config, flow_advance(toy_spec, toy_config, p, roof), Fraction(1, 4)
        )
        assert direct.base == stepped.base == skew_apply(toy_config, start, 1)
        assert (direct.height - stepped.height).is_zero() is True
        assert (direct.height - Fraction(1, 4)).is_zero() is True

    def test_singular_orbit(self, toy_spec, toy_config):
        """Test that an orbit through x0 is reported."""
        p = FlowPoint(TorusPoint(Fraction(6, 7), 0), LogLinearForm.rational(0))
        with pytest.raises(SingularOrbitError) as exc_info:
            flow_advance(toy_spec, toy_config, p, 5)
        assert exc_info.value.index == 1

    def test_roof_integral_exceeds_one(self, toy_spec):
        """Test that the mean roof is above the roof's lower bound 1."""
        enclosure = roof_integral(toy_spec).enclose(64)
        assert enclosure.lo > 1
        assert enclosure.hi < 10


class TestRigiditySet:
    """Tests for the rigidity sets E_k."""

    def test_measure(self, toy_config, start):
        """Test that E_k has q_t disjoint arcs of total length c."""
        c = Fraction(1, 32)
        rs = rigidity_set(toy_config, 1, start, 2, c)
        assert rs.E_k.component_count() == 2
        assert rs.measure == c / 2
        assert rs.I_k.measure() == c / 4
        assert rs.measure_floor == c / 4
        assert rigidity_report(rs).by_name("rigidity.measure")[0].passed

    def test_discontinuity(self, toy_config, toy_spec):
        """Test that an arc carried onto the slit end is rejected."""
        with pytest.raises(ConstructionViolatedError) as exc_info:
            rigidity_set(toy_config, 1, TorusPoint(toy_spec.x0, 0), 2)
        assert exc_info.value.index == 0

    def test_payload(self, toy_config, start):
        """Test the rigidity payload."""
        payload = rigidity_set(toy_config, 1, start, 2).to_payload()
        assert payload["q_t"] == 2
        assert payload["components"] == 2
        assert payload["c"] == "1/32"

    def test_needs_witness(self, relaxed_state):
        """Test that E_k needs a witness certificate."""
        with pytest.raises(PreconditionError):
            build_rigidity_set(relaxed_state, 1)


class TestCriterion:
    """Tests for the non-mixing criterion checks."""

    def test_pole_inside_segment(self, toy_config, toy_spec):
        """Test that a segment containing x0 has no bound."""
        bound = second_derivative_bound(toy_config, toy_spec, Fraction(2, 5), Fraction(1, 2), 0, 1)
        assert bound is None

    def test_segment_bound(self, toy_config, toy_spec):
        """Test a segment away from every pole."""
        bound = second_derivative_bound(
            toy_config, toy_spec, Fraction(1, 14) - Fraction(1, 100), Fraction(1, 14) + Fraction(1, 100), 0, 1
        )
        assert bound is not None
        assert bound > 0

    def test_needs_witness(self, relaxed_state):
        """Test that the criterion needs a witness certificate."""
        with pytest.raises(PreconditionError):
            criterion_check(relaxed_state, 1)

    def test_report_skips_stages_without_witness(self, relaxed_state):
        """Test that stages without a witness are skipped."""
        report = criterion_report(relaxed_state)
        assert report.by_name("criterion.skipped")
        assert report.by_name("criterion.scope")
        assert report.passed


class TestProbes:
    """Tests for the correlation and unique-ergodicity diagnostics."""

    @pytest.fixture
    def observables(self) -> tuple[FlowObservable, FlowObservable]:
        """Provide a low and a full height window over the whole base."""
        full = TorusIntervalSet.full()
        return (
            FlowObservable(base=full, height_cap=Fraction(1, 2), label="low"),
            FlowObservable(base=full, height_cap=Fraction(1), label="unit"),
        )

    def test_time_zero(self, toy_spec, toy_config, observables):
        """Test that every sample starts inside the wider window."""
        low, unit = observables
        rows = correlation_probe(toy_spec, toy_config, low, unit, [0], samples=16, seed=7)
        assert len(rows) == 1
        assert rows[0].estimate == 1.0
        assert rows[0].stderr == 0.0
        assert rows[0].samples == 16

    def test_seeded(self, toy_spec, toy_config, observables):
        """Test that a fixed seed reproduces the table."""
        low, unit = observables
        times = [0, Fraction(1, 2)]
        first = correlation_probe(toy_spec, toy_config, low, unit, times, samples=8, seed=3)
        second = correlation_probe(toy_spec, toy_config, low, unit, times, samples=8, seed=3)
        assert [row.to_row() for row in first] == [row.to_row() for row in second]

    def test_rejects_bad_input(self, toy_spec, toy_config, observables):
        """Test the input checks of the correlation probe."""
        low, unit = observables
        empty = FlowObservable(base=TorusIntervalSet.empty(), height_cap=Fraction(1, 2))
        high = FlowObservable(base=TorusIntervalSet.full(), height_cap=Fraction(2))
        with pytest.raises(UnsupportedSetError):
            correlation_probe(toy_spec, toy_config, empty, unit, [0])
        with pytest.raises(ValueError):
            correlation_probe(toy_spec, toy_config, low, high, [0])
        with pytest.raises(ValueError):
            correlation_probe(toy_spec, toy_config, low, unit, [0], samples=0)

    def test_deviation_of_full_set(self, desk_config):
        """Test that the whole space has no deviating points."""
        assert deviation_measure(desk_config, 2, TorusIntervalSet.full(), Fraction(1, 10)) == 0

    def test_ue_probe(self, desk_config):
        """Test the unique-ergodicity rows on the desk schedule."""
        report = ue_probe(desk_config, 1, TorusIntervalSet.full(), Fraction(1, 10))
        assert len(report.by_name("ue.deviation")) == 1

    def test_ue_probe_preconditions(self, toy_config, desk_config):
        """Test the checkpoint and set-type preconditions."""
        with pytest.raises(PreconditionError):
            ue_probe(toy_config, 1, TorusIntervalSet.full(), Fraction(1, 10))
        with pytest.raises(UnsupportedSetError):
            ue_probe(desk_config, 1, [(0, 1, 0)], Fraction(1, 10))

    def test_recurrence_times(self, relaxed_state):
        """Test q_(t_k) times the mean roof."""
        times = recurrence_times(relaxed_state)
        assert len(times) == 1
        expected = roof_integral_for(relaxed_state) * relaxed_state.q(11)
        assert (times[0] - expected).is_zero() is True
