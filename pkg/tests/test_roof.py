"""
Tests for the roof function, the reduction phi and the regions of a level.
"""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from ergoflow.cf.arithmetic import representative
from ergoflow.core.exceptions import (
    InfiniteVariationError,
    PreconditionError,
    RegionUndefinedError,
    SingularOrbitError,
    SingularPointError,
)
from ergoflow.core.logforms import LogLinearForm
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.roof import (
    RoofPart,
    RoofSpec,
    build_regions,
    eval_roof,
    eval_roof_deriv,
    h1_prime,
    inverse_distance_integral,
    inverse_distance_variation,
    phi_bounds_report,
    phi_function,
    psi_decompose_check,
    require_hypotheses,
    roof_form,
    roof_spec_for,
    roof_sum,
    variation_report,
)
from ergoflow.skew import SkewConfig, build_tower

A = Fraction(6, 5)


@pytest.fixture
def toy_spec(toy_config) -> RoofSpec:
    """Provide the roof over the toy system: x0 = 3/7, x1 = 5/7."""
    return roof_spec_for(toy_config, A)


@pytest.fixture
def desk_config(desk_schedule) -> SkewConfig:
    """Provide the skew product over the desk-schedule representative."""
    return SkewConfig(alpha=representative(desk_schedule), schedule=desk_schedule)


class TestRoofFunction:
    """Tests for f = g + h_A."""

    def test_singularities(self, toy_spec):
        """Test the singular points of the toy roof."""
        assert toy_spec.x0 == Fraction(3, 7)
        assert toy_spec.x1 == Fraction(5, 7)
        assert TorusPoint(Fraction(0), 1) in toy_spec.singularities

    def test_weight_must_exceed_one(self, toy_spec):
        """Test that A <= 1 is rejected."""
        with pytest.raises(ValidationError):
            toy_spec.with_weight(Fraction(1))

    def test_exact_value(self, toy_spec):
        """Test f at (1/2, 0) and (1/2, 1) in closed form."""
        expected = LogLinearForm(
            constant=Fraction(1),
            terms=((Fraction(-2), Fraction(1, 14)), (Fraction(-1), Fraction(3, 14))),
        )
        assert (roof_form(toy_spec, TorusPoint(Fraction(1, 2), 0)) - expected).is_zero() is True
        upper = expected - LogLinearForm.log(Fraction(1, 2), A)
        assert (roof_form(toy_spec, TorusPoint(Fraction(1, 2), 1)) - upper).is_zero() is True

    def test_left_of_x0_term(self, toy_spec):
        """Test the one-sided singularity left of x0."""
        g = roof_form(toy_spec, TorusPoint(Fraction(0), 0), RoofPart.G)
        expected = LogLinearForm(
            constant=Fraction(1),
            terms=((Fraction(-2), Fraction(3, 7)), (Fraction(-1), Fraction(2, 7)), (Fraction(-1), Fraction(3, 7))),
        )
        assert (g - expected).is_zero() is True

    def test_h_vanishes_on_level_zero(self, toy_spec):
        """Test that h_A is zero on level 0."""
        assert eval_roof(toy_spec, TorusPoint(Fraction(1, 3), 0), RoofPart.H).sign() == 0

    def test_derivatives(self, toy_spec):
        """Test exact right derivatives at (1/2, 0)."""
        z = TorusPoint(Fraction(1, 2), 0)
        assert eval_roof_deriv(toy_spec, z, 1) == Fraction(-70, 3)
        assert eval_roof_deriv(toy_spec, z, 2) == Fraction(3724, 9)
        with pytest.raises(ValueError):
            eval_roof_deriv(toy_spec, z, 3)

    @pytest.mark.parametrize(
        "point",
        [TorusPoint(Fraction(3, 7), 0), TorusPoint(Fraction(5, 7), 1), TorusPoint(Fraction(0), 1)],
    )
    def test_singular_points(self, toy_spec, point):
        """Test evaluation at singularities."""
        with pytest.raises(SingularPointError):
            roof_form(toy_spec, point)

    def test_h1_prime(self):
        """Test the level-1 derivative of log||x||."""
        assert h1_prime(TorusPoint(Fraction(1, 4), 1)) == -4
        assert h1_prime(TorusPoint(Fraction(3, 4), 1)) == 4
        assert h1_prime(TorusPoint(Fraction(1, 4), 0)) == 0

    def test_roof_sum(self, toy_config, toy_spec):
        """Test that S_2 f is the sum of two values."""
        z = TorusPoint(Fraction(1, 14), 0)
        total = roof_sum(toy_spec, toy_config, z, 2)
        expected = roof_form(toy_spec, z) + roof_form(toy_spec, TorusPoint(Fraction(9, 14), 0))
        assert (total - expected).is_zero() is True

    def test_singular_orbit(self, toy_config, toy_spec):
        """Test that an orbit through x0 is reported with its index."""
        with pytest.raises(SingularOrbitError) as exc_info:
            roof_sum(toy_spec, toy_config, TorusPoint(Fraction(6, 7), 0), 3)
        assert exc_info.value.index == 1

    def test_phi_function(self, toy_config):
        """Test phi read off U_1."""
        tower = build_tower(toy_config, 1)
        # (1/14, 1) lies in U_1, (2/7, 1) does not
        assert phi_function(tower, Fraction(1, 14)) == -14
        assert phi_function(tower, Fraction(2, 7)) == 0
        with pytest.raises(SingularPointError):
            phi_function(tower, Fraction(0))


class TestInverseDistance:
    """Tests for integrals and variations of chi_S/||x||."""

    def test_integral(self):
        """Test the closed-form integral on both sides of 1/2."""
        left = TorusIntervalSet.arc(Fraction(1, 4), Fraction(1, 4), levels=(0,))
        right = TorusIntervalSet.arc(Fraction(1, 2), Fraction(1, 4), levels=(0,))
        assert (inverse_distance_integral(left) - LogLinearForm.log(2)).is_zero() is True
        assert (inverse_distance_integral(right) - LogLinearForm.log(2)).is_zero() is True

    def test_integral_diverges_at_zero(self):
        """Test that a set touching 0 has no finite integral."""
        with pytest.raises(SingularPointError):
            inverse_distance_integral(TorusIntervalSet.arc(0, Fraction(1, 4), levels=(0,)))

    def test_variation(self):
        """Test the variation of chi_[1/4, 1/2)/||x||."""
        s = TorusIntervalSet.arc(Fraction(1, 4), Fraction(1, 4), levels=(0,))
        assert inverse_distance_variation(s) == 8
        assert inverse_distance_variation(TorusIntervalSet.empty()) == 0

    def test_infinite_variation(self):
        """Test that a component at 0 has infinite variation."""
        with pytest.raises(InfiniteVariationError):
            inverse_distance_variation(TorusIntervalSet.arc(Fraction(3, 4), Fraction(1, 4), levels=(0,)))


class TestRegions:
    """Tests for the regions and Phi."""

    def test_regions_need_level_two(self, desk_config):
        """Test that regions are undefined at m = 1."""
        with pytest.raises(RegionUndefinedError):
            build_regions(desk_config, 1)

    def test_hypotheses(self, desk_config, toy_config):
        """Test the schedule hypotheses."""
        assert require_hypotheses(desk_config, 2) == 3
        assert require_hypotheses(toy_config, 1) == 3
        with pytest.raises(PreconditionError):
            require_hypotheses(desk_config, 2, M=2)

    def test_region_widths(self, desk_config):
        """Test F_2 = [0, ||q_2 alpha||)."""
        regions = build_regions(desk_config, 2)
        assert regions.F_m.measure() == regions.w / 2
        assert set(regions.named()) == {"A", "B", "C", "D", "E", "F"}

    def test_decomposition(self, desk_config):
        """Test the six-term decomposition at level 2."""
        sample = [Fraction(2 * i + 1, 256) for i in range(128)]
        report = psi_decompose_check(desk_config, 2, sample)
        assert report.by_name("psi.decomposition")
        assert report.passed

    def test_phi_bounds(self, desk_config):
        """Test the two-sided bounds on Phi at level 2."""
        report = phi_bounds_report(desk_config, 2)
        assert {c.name for c in report.checks} == {
            "phi.lower",
            "phi.upper",
            "phi.global_lower",
            "phi.global_upper",
        }
        assert report.passed

    def test_variation_rows(self, desk_config):
        """Test the rows of the variation report."""
        report = variation_report(desk_config, 2)
        assert len(report.by_name("variation.cell")) == 4
        assert report.by_name("variation.E")
        assert report.by_name("integral.lower")
