"""Euler characteristics of immersed manifolds by curvature, index and Morse routes,
plus topological-current tracking of moving zeros."""

__version__ = "0.1.0"

from .chart import ChartSpec
from .current import SpacetimeField, track_zeros
from .density import chart_density, integrate_manifold, normalization
from .errors import GBCError
from .fieldio import FieldFile, load_field, save_field
from .fields import ScalarField, VectorField
from .geometry import Immersion
from .morse import critical_points, euler_morse
from .presets import get_manifold, get_spacetime
from .zeros import find_zeros, poincare_hopf, zeros_with_charges

__all__ = [
    "ChartSpec", "FieldFile", "GBCError", "Immersion", "ScalarField", "SpacetimeField",
    "VectorField", "chart_density", "critical_points", "euler_morse", "find_zeros",
    "get_manifold", "get_spacetime", "integrate_manifold", "load_field", "normalization",
    "poincare_hopf", "save_field", "track_zeros", "zeros_with_charges",
]
