"""Skew ruled surfaces with polar relative normalizations.

Closed-form relative invariants (shape operator, Pick invariant, scalar
curvature, Tchebychev and support vector fields) together with numeric
oracles that recompute each of them from definitions.
"""

from .expr import Antiderivative, ExprDomainError, ExprSyntaxError, differentiate, parse
from .fixtures import FIXTURES, SUPPORTS, fixture, polar
from .oracle import (
    darboux_pick,
    fd_jet,
    frenet_at,
    frenet_invariants,
    numeric_scalar_curvature,
    numeric_shape_operator,
    residual_report,
)
from .polar import (
    PolarSupport,
    classify,
    polar_normal,
    polar_pick_scalar,
    polar_shape_and_curvatures,
    polar_support_vector,
    polar_tchebychev,
)
from .relative import SupportFunction, SupportVanishingError, make_support, relative_metric
from .special import SpecialPolar, gamma_star, special_fields
from .surface import RuledSurfaceSpec, SurfaceError, euclidean_curvatures, fundamental_forms, integrate_frame

__version__ = "0.1.0"

__all__ = [
    "Antiderivative", "ExprDomainError", "ExprSyntaxError", "differentiate", "parse",
    "FIXTURES", "SUPPORTS", "fixture", "polar",
    "darboux_pick", "fd_jet", "frenet_at", "frenet_invariants", "numeric_scalar_curvature",
    "numeric_shape_operator", "residual_report",
    "PolarSupport", "classify", "polar_normal", "polar_pick_scalar", "polar_shape_and_curvatures",
    "polar_support_vector", "polar_tchebychev",
    "SupportFunction", "SupportVanishingError", "make_support", "relative_metric",
    "SpecialPolar", "gamma_star", "special_fields",
    "RuledSurfaceSpec", "SurfaceError", "euclidean_curvatures", "fundamental_forms", "integrate_frame",
]
