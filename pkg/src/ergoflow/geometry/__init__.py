"""
Exact geometry on T and T x Z2.

Provides points, the product metric and half-open interval sets with their
Boolean algebra.
"""

from ergoflow.geometry.intervals import TorusIntervalSet, set_combine, set_translate
from ergoflow.geometry.metric import arc_distance, circle_dist, product_dist
from ergoflow.geometry.models import Arc, Interval, TorusPoint

__all__ = [
    "TorusIntervalSet",
    "set_combine",
    "set_translate",
    "arc_distance",
    "circle_dist",
    "product_dist",
    "Arc",
    "Interval",
    "TorusPoint",
]
