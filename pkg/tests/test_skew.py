"""
Tests for the Z2 skew product, its lattice orbits and the U/V towers.
"""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from ergoflow.cf.models import AngleRep
from ergoflow.core.exceptions import ClassViolationError, TowerDegenerateError
from ergoflow.geometry.intervals import TorusIntervalSet
from ergoflow.geometry.models import TorusPoint
from ergoflow.skew import (
    SkewConfig,
    build_tower,
    check_consistency,
    coincidence_set,
    lattice_for,
    orbit,
    orbit_span,
    skew_apply,
    skew_image,
    slit_interval,
    slit_length,
    structure_report,
    tower_payload,
    tower_sequence,
)


def sevenths(*values: int) -> list[Fraction]:
    return [Fraction(v, 7) for v in values]


class TestSkewMap:
    """Tests for the map T and its orbits."""

    def test_slit(self, toy_config):
        """Test the slit of the toy system."""
        assert slit_length(toy_config) == Fraction(2, 7)
        assert slit_interval(toy_config) == TorusIntervalSet.arc(0, Fraction(2, 7))
        assert slit_length(toy_config, 0) == 0

    def test_lattice(self, toy_config):
        """Test the common lattice of angle and slit."""
        lattice = lattice_for(toy_config)
        assert (lattice.denom, lattice.step, lattice.slit) == (7, 4, 2)
        assert lattice.decode(lattice.encode(Fraction(3, 7))) == Fraction(3, 7)

    def test_forward_orbit(self, toy_config):
        """Test the level flips along the orbit of (0, 0)."""
        points = list(orbit(toy_config, TorusPoint(Fraction(0), 0), 8))
        assert [p.x for p in points] == sevenths(0, 4, 1, 5, 2, 6, 3, 0)
        assert [p.level for p in points] == [0, 0, 1, 1, 1, 1, 1, 0]

    def test_apply_matches_orbit(self, toy_config):
        """Test that T^k agrees with the streamed orbit."""
        z = TorusPoint(Fraction(1, 14), 1)
        points = list(orbit(toy_config, z, 10))
        assert skew_apply(toy_config, z, 9) == points[9]

    def test_inverse(self, toy_config):
        """Test that the inverse undoes the forward map."""
        z = TorusPoint(Fraction(3, 14), 0)
        forward = skew_apply(toy_config, z, 5)
        assert skew_apply(toy_config, forward, 5, inverse=True) == z

    def test_negative_power_rejected(self, toy_config):
        """Test that negative powers must go through inverse."""
        with pytest.raises(ValueError):
            skew_apply(toy_config, TorusPoint(Fraction(0), 0), -1)

    def test_exact_set_image(self, toy_config):
        """Test the exact image of an arc crossing the slit."""
        s = TorusIntervalSet.arc(Fraction(4, 7), Fraction(2, 7), levels=(0,))
        image = skew_image(toy_config, s)
        expected = TorusIntervalSet.from_arcs(
            [(Fraction(2, 7), Fraction(3, 7), 0), (Fraction(1, 7), Fraction(2, 7), 1)]
        )
        assert image == expected

    def test_image_contains_point_images(self, toy_config):
        """Test that the set image contains the images of its points."""
        s = TorusIntervalSet.arc(Fraction(1, 10), Fraction(3, 5), levels=(1,))
        image = skew_image(toy_config, s)
        for i in range(1, 12):
            z = TorusPoint(Fraction(1, 10) + Fraction(i, 20), 1)
            assert image.contains(skew_apply(toy_config, z, 1))

    def test_class_consistency(self, toy_schedule):
        """Test that an angle outside the class is rejected."""
        cfg = SkewConfig(alpha=AngleRep(value=Fraction(1, 3)), schedule=toy_schedule)
        with pytest.raises(ClassViolationError):
            check_consistency(cfg)

    def test_truncated_config(self, toy_config):
        """Test truncated slits."""
        assert toy_config.truncated(0).checkpoint_count == 0
        with pytest.raises(ValidationError):
            toy_config.truncated(2)

    def test_coincidence_set(self, toy_config):
        """Test where T and T_0 agree for one step."""
        agree = coincidence_set(toy_config, 0, 1)
        assert agree.measure() == Fraction(5, 7)
        z = TorusPoint(Fraction(1, 2), 0)
        assert not agree.contains(z)
        assert skew_apply(toy_config, z, 1) != skew_apply(toy_config.truncated(0), z, 1)
        assert coincidence_set(toy_config, 1, 5) == TorusIntervalSet.full()


class TestTower:
    """Tests for the U/V towers."""

    def test_level_zero(self, toy_config):
        """Test the trivial level."""
        level = tower_sequence(toy_config, 0)[0]
        assert level.U == TorusIntervalSet.full(levels=(0,))
        assert level.delta_m == ()

    def test_toy_level_one(self, toy_config):
        """Test U_1 of the toy system."""
        level = build_tower(toy_config, 1)
        expected = TorusIntervalSet.from_arcs(
            [
                (Fraction(1, 7), Fraction(4, 7), 0),
                (Fraction(5, 7), 1, 0),
                (0, Fraction(1, 7), 1),
                (Fraction(4, 7), Fraction(5, 7), 1),
            ]
        )
        assert level.U == expected
        assert level.V == expected.flip_levels()
        assert list(level.delta_m) == sevenths(0, 1, 4, 5)
        assert orbit_span(toy_config.schedule, 1) == 4

    def test_structure_report(self, toy_config):
        """Test every structural check at level one."""
        report = structure_report(build_tower(toy_config, 1), toy_config)
        names = {c.name for c in report.checks}
        assert {"tower.invariance", "tower.involution", "tower.sandwich", "tower.near_zero_left"} <= names
        assert report.passed

    def test_level_past_schedule(self, toy_config):
        """Test that a level without a checkpoint is degenerate."""
        with pytest.raises(TowerDegenerateError):
            tower_sequence(toy_config, 2)

    def test_payload(self, toy_config):
        """Test the tower payload."""
        payload = tower_payload(tower_sequence(toy_config, 1))
        assert [level["m"] for level in payload["levels"]] == [0, 1]
        assert payload["levels"][1]["delta"] == ["0", "1/7", "4/7", "5/7"]
