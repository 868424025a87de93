"""Trace-metric geometry of the positive cone of a finite tracial matrix algebra."""

from .algebra import (
    AlgebraElement,
    HermitianElement,
    PositiveElement,
    TracialAlgebra,
    expm,
    inner2,
    logm,
    norm2,
    trace,
)
from .convexity import ConvexSubmanifold, Subspace, check_double_bracket, orthonormalize
from .geometry import Geodesic, dist, exp_map, geodesic, log_map
from .projection import factor_iwasawa, factor_masa, factor_symmetric, project

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "ConvexSubmanifold",
    "Geodesic",
    "HermitianElement",
    "PositiveElement",
    "Subspace",
    "TracialAlgebra",
    "check_double_bracket",
    "dist",
    "exp_map",
    "expm",
    "factor_iwasawa",
    "factor_masa",
    "factor_symmetric",
    "geodesic",
    "inner2",
    "log_map",
    "logm",
    "norm2",
    "orthonormalize",
    "project",
    "trace",
]
