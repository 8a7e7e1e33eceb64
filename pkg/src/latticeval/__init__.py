"""Exact finite-level valuation spaces on Grassmannians over
non-Archimedean local fields: structural operators, certified Haar
integration, and machine verification of the duality theorems."""

from .field import FieldModel, INF, det_valuation, equichar, mixedchar, primitive_basis, smith_form, val
from .grassmann import (
    GrassPoint,
    LevelIndex,
    annihilator_point,
    enumerate_grassmannian,
    fiber_points,
    gaussian_binomial,
    grassmannian_size,
    lift_subspace,
    pair_orbit_invariant,
    reduce_point,
)
from .intervals import CertValue
from .subspace import Subspace
from .valuation import LevelValuation, ValSubspaceBasis, spherical, val_space_basis

__all__ = [
    "FieldModel", "INF", "det_valuation", "equichar", "mixedchar",
    "primitive_basis", "smith_form", "val",
    "GrassPoint", "LevelIndex", "annihilator_point", "enumerate_grassmannian",
    "fiber_points", "gaussian_binomial", "grassmannian_size", "lift_subspace",
    "pair_orbit_invariant", "reduce_point",
    "CertValue", "Subspace", "LevelValuation", "ValSubspaceBasis",
    "spherical", "val_space_basis",
]

__version__ = "0.1.0"
