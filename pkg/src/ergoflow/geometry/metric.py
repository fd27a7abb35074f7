"""
Distances on T and T x Z2.

The level penalty is 1 exactly when the levels differ, so that a distance below
1 forces equal levels and equal levels give the circle distance.
"""

from fractions import Fraction
from math import floor
from typing import Union

from ergoflow.geometry.models import Arc, TorusPoint

Number = Union[int, Fraction]


def circle_dist(x: Number, y: Number) -> Fraction:
    """||x - y||, in [0, 1/2]."""
    d = Fraction(x) - Fraction(y)
    d -= floor(d)
    return min(d, 1 - d)


def product_dist(a: TorusPoint, b: TorusPoint) -> Fraction:
    """d((x, i), (y, j)) = ||x - y|| + [i != j]."""
    return circle_dist(a.x, b.x) + (0 if a.level == b.level else 1)


def arc_distance(arc: Arc, x: Number) -> Fraction:
    """Circle distance from x to the closed arc [left, right]."""
    x = Fraction(x)
    offset = x - arc.left
    offset -= floor(offset)
    if offset <= arc.length:
        return Fraction(0)
    return min(circle_dist(x, arc.left), circle_dist(x, arc.right))
