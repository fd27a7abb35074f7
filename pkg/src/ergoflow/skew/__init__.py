"""
Z2 skew products over circle rotations.

Provides the slit, the maps T and T_s, orbits on an integer lattice, the U/V
towers and their structural verification.
"""

from ergoflow.core.exceptions import TowerDegenerateError
from ergoflow.skew.models import SkewConfig, SlitMode, TowerLevel
from ergoflow.skew.system import (
    Lattice,
    check_consistency,
    image_pieces,
    lattice_for,
    lattice_orbit,
    orbit,
    skew_apply,
    skew_image,
    slit_interval,
    slit_length,
)
from ergoflow.skew.tower import (
    build_tower,
    coincidence_set,
    orbit_span,
    structure_report,
    tower_payload,
    tower_sequence,
)

__all__ = [
    "TowerDegenerateError",
    "SkewConfig",
    "SlitMode",
    "TowerLevel",
    "Lattice",
    "check_consistency",
    "image_pieces",
    "lattice_for",
    "lattice_orbit",
    "orbit",
    "skew_apply",
    "skew_image",
    "slit_interval",
    "slit_length",
    "build_tower",
    "coincidence_set",
    "orbit_span",
    "structure_report",
    "tower_payload",
    "tower_sequence",
]
