"""Linear kinematic transformation groups with anisotropic and
synchrony-dependent light propagation."""
from .classic import Group, GroupTag, classify, galilei_boost, lorentz_boost, rbr_decompose
from .errors import KinegroupError
from .reichenbach import ShearK, TwoWayParams, decompose_two_way, ellipsoid_geometry, two_way_map
from .spacetime import AffineMap4, LinearMap4, compose, composed_velocity, inverse, velocity_of
from .special import Case, SpecialParams, add_velocity, special_matrix, standard_special

__version__ = "0.1.0"

__all__ = [
    "AffineMap4",
    "Case",
    "Group",
    "GroupTag",
    "KinegroupError",
    "LinearMap4",
    "ShearK",
    "SpecialParams",
    "TwoWayParams",
    "add_velocity",
    "classify",
    "compose",
    "composed_velocity",
    "decompose_two_way",
    "ellipsoid_geometry",
    "galilei_boost",
    "inverse",
    "lorentz_boost",
    "rbr_decompose",
    "special_matrix",
    "standard_special",
    "two_way_map",
    "velocity_of",
]
