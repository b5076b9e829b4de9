"""Exact arithmetic over Q(w), polynomials and linear algebra."""

from .field import CUBE_ROOT, EPS_NUM, ONE, W, ZERO, FieldElem, Rational, from_complex, parse_field
from .linalg import (
    RootFindingError,
    det_field,
    det_poly_matrix,
    null_space,
    null_space_numeric,
    rank,
    roots_with_multiplicity,
    rref,
    solve_affine,
    span_rref,
)
from .poly import ParamPoly, PolyInS

__all__ = [
    "CUBE_ROOT",
    "EPS_NUM",
    "ONE",
    "W",
    "ZERO",
    "FieldElem",
    "ParamPoly",
    "PolyInS",
    "Rational",
    "RootFindingError",
    "det_field",
    "det_poly_matrix",
    "from_complex",
    "null_space",
    "null_space_numeric",
    "parse_field",
    "rank",
    "roots_with_multiplicity",
    "rref",
    "solve_affine",
    "span_rref",
]
