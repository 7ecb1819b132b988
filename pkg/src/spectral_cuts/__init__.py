"""Spectral cuts for finite operator models.

Projections along cycles that may touch the spectrum, an unconventional
holomorphic functional calculus built on them, series formulas for
diagonal-plus-series operators and decomposability witnesses.
"""
__version__ = "0.1.0"

from .contour import Curve, Cycle, Disc, Rect, Region, Segment, circle, polygon, rectangle, winding_number
from .operators import (DenseMatrix, Diagonal, DiagonalPlusSeries, PointMassMultiplication,
                        operator_from_json, operator_to_json)
from .quadrature import QuadratureConfig, integrate
from .cuts import (ProjectionResult, cut_product, cut_sum, local_split, plain_spectral_cut,
                   riesz_projection, verify_projection)
from .calculus import FunctionExpr, calculus_integral, calculus_restrict, parse_function
from .perturbation import PerturbedDiagonal, build_appropriate_grid, series_calculus, series_projection
from .decompose import CoverPair, cover_split, hyperinvariant_witness, line_family_decompose, super_decompose
from .errors import SpectralCutsError

__all__ = [
    "__version__", "Curve", "Cycle", "Disc", "Rect", "Region", "Segment", "circle", "polygon", "rectangle",
    "winding_number", "DenseMatrix", "Diagonal", "DiagonalPlusSeries", "PointMassMultiplication",
    "operator_from_json", "operator_to_json", "QuadratureConfig", "integrate", "ProjectionResult",
    "cut_product", "cut_sum", "local_split", "plain_spectral_cut", "riesz_projection", "verify_projection",
    "FunctionExpr", "calculus_integral", "calculus_restrict", "parse_function", "PerturbedDiagonal",
    "build_appropriate_grid", "series_calculus", "series_projection", "CoverPair", "cover_split",
    "hyperinvariant_witness", "line_family_decompose", "super_decompose", "SpectralCutsError",
]
