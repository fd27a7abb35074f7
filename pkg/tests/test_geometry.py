"""
Tests for exact interval sets and distances on T x Z2.
"""

from fractions import Fraction

import pytest

from ergoflow.geometry.intervals import TorusIntervalSet, set_combine, set_translate
from ergoflow.geometry.metric import arc_distance, circle_dist, product_dist
from ergoflow.geometry.models import Arc, TorusPoint

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)


class TestTorusIntervalSet:
    """Tests for TorusIntervalSet construction and queries."""

    def test_wrapping_arc(self):
        """Test that an arc through 0 is one component."""
        s = TorusIntervalSet.arc(Fraction(3, 4), HALF, levels=(0,))
        assert len(s) == 2
        assert s.component_count() == 1
        assert s.arcs() == [Arc(Fraction(3, 4), Fraction(5, 4), 0)]
        assert s.measure() == QUARTER

    def test_contains_half_open(self):
        """Test half-open membership."""
        s = TorusIntervalSet.arc(QUARTER, QUARTER, levels=(1,))
        assert s.contains(TorusPoint(QUARTER, 1))
        assert not s.contains(TorusPoint(HALF, 1))
        assert not s.contains(TorusPoint(QUARTER, 0))
        assert TorusPoint(Fraction(3, 8), 1) in s

    def test_full_and_empty(self):
        """Test the full and empty sets."""
        assert TorusIntervalSet.full().measure() == 1
        assert TorusIntervalSet.empty().is_empty
        assert TorusIntervalSet.full().complement().is_empty

    def test_long_arc_covers_level(self):
        """Test that an arc of length at least 1 covers the level."""
        s = TorusIntervalSet.arc(Fraction(1, 3), 2, levels=(0,))
        assert s == TorusIntervalSet.full(levels=(0,))

    def test_adjacent_arcs_merge(self):
        """Test that touching arcs merge in canonical form."""
        s = TorusIntervalSet.from_arcs([(0, QUARTER, 0), (QUARTER, HALF, 0)])
        assert list(s) == [(Fraction(0), HALF, 0)]

    def test_boolean_algebra(self):
        """Test union, intersection, difference and symmetric difference."""
        a = TorusIntervalSet.arc(0, HALF)
        b = TorusIntervalSet.arc(QUARTER, HALF)
        assert (a | b).measure() == Fraction(3, 4)
        assert (a & b).measure() == QUARTER
        assert (a - b).measure() == QUARTER
        assert (a ^ b) == (a - b) | (b - a)
        assert set_combine(a, b, "intersect") == a & b

    def test_unknown_operation(self):
        """Test that an unknown operation raises."""
        with pytest.raises(ValueError):
            TorusIntervalSet.empty().combine(TorusIntervalSet.full(), "xor")

    def test_translate(self):
        """Test translation with wrap-around."""
        s = TorusIntervalSet.arc(0, HALF, levels=(0,)).translate(Fraction(3, 4))
        assert s == TorusIntervalSet.arc(Fraction(3, 4), HALF, levels=(0,))
        assert set_translate(s, 1) == s

    def test_flip_and_project(self):
        """Test the level involution and projections."""
        s = TorusIntervalSet.arc(0, QUARTER, levels=(0,))
        flipped = s.flip_levels()
        assert flipped == TorusIntervalSet.arc(0, QUARTER, levels=(1,))
        assert flipped.project(1) == s
        assert s.level_slice(1).is_empty

    def test_subset_and_disjoint(self):
        """Test subset and disjointness."""
        inner = TorusIntervalSet.arc(Fraction(1, 8), Fraction(1, 8))
        outer = TorusIntervalSet.arc(0, HALF)
        assert inner.issubset(outer)
        assert not outer.issubset(inner)
        assert inner.isdisjoint(TorusIntervalSet.arc(HALF, HALF))

    def test_discontinuities(self):
        """Test jump points of a level indicator."""
        s = TorusIntervalSet.arc(Fraction(3, 4), HALF, levels=(0,))
        assert s.discontinuities(0) == [QUARTER, Fraction(3, 4)]
        assert s.discontinuities(1) == []

    def test_component_of(self):
        """Test locating the component of a point."""
        s = TorusIntervalSet.arc(Fraction(3, 4), HALF, levels=(0,))
        assert s.component_of(TorusPoint(Fraction(1, 8), 0)) == Arc(Fraction(3, 4), Fraction(5, 4), 0)
        assert s.component_of(TorusPoint(HALF, 0)) is None

    def test_payload_round_trip(self):
        """Test the exact payload form."""
        s = TorusIntervalSet.from_arcs([(Fraction(1, 3), Fraction(2, 3), 1), (0, Fraction(1, 7), 0)])
        assert TorusIntervalSet.from_payload(s.to_payload()) == s
        assert s.to_payload()[0] == {"level": 0, "left": "0", "right": "1/7"}


class TestMetric:
    """Tests for circle and product distances."""

    def test_circle_dist(self):
        """Test the circle distance."""
        assert circle_dist(Fraction(1, 10), Fraction(9, 10)) == Fraction(1, 5)
        assert circle_dist(0, HALF) == HALF

    def test_product_dist_level_penalty(self):
        """Test that differing levels cost exactly 1."""
        a, b = TorusPoint(Fraction(1, 10), 0), TorusPoint(Fraction(1, 5), 1)
        assert product_dist(a, b) == Fraction(11, 10)
        assert product_dist(a, a.flipped().flipped()) == 0

    def test_arc_distance(self):
        """Test the distance to a closed arc."""
        arc = Arc(Fraction(3, 4), Fraction(5, 4), 0)
        assert arc_distance(arc, Fraction(1, 8)) == 0
        assert arc_distance(arc, HALF) == QUARTER

    def test_point_reduction(self):
        """Test that TorusPoint.of reduces mod 1 and checks the level."""
        assert TorusPoint.of(Fraction(5, 4), 1) == TorusPoint(QUARTER, 1)
        with pytest.raises(ValueError):
            TorusPoint.of(0, 2)
