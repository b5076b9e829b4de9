from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from painleve.algebra import FieldElem, ParamPoly
from painleve.system import (
    MissingEquationError,
    NonAutonomousError,
    NonPolynomialError,
    SecondDerivativeError,
    SystemParseError,
    parse_system,
    builtin_system,
    read_system,
    serialize_system,
)

CANONICAL = """\
vars x, y, z
x'' = -x^3 - 6*x*y*z - y^3 - z^3 - 3*x*x' - 3*y*z' - 3*y'*z
y'' = -3*x^2*y - 3*x*z^2 - 3*y^2*z - 3*x*y' - 3*x'*y - 3*z*z'
z'' = -3*x^2*z - 3*x*y^2 - 3*y*z^2 - 3*x*z' - 3*x'*z - 3*y*y'
"""


def test_builtin_system_normal_form():
    sys = builtin_system()
    assert sys.var_names == ("x", "y", "z")
    assert serialize_system(sys) == CANONICAL
    assert parse_system(CANONICAL) == sys


def test_numeric_rhs_agrees_with_exact_evaluation():
    sys = builtin_system()
    q = [FieldElem(1), FieldElem(2, 1), FieldElem(-3)]
    qd = [FieldElem(0, -1), FieldElem(5), FieldElem(1, 1)]
    exact = [v.to_complex() for v in sys.evaluate(q, qd)]
    numeric = sys.numeric_rhs()(np.array([c.to_complex() for c in q]), np.array([c.to_complex() for c in qd]))
    assert np.allclose(numeric, exact, rtol=1e-14)


def test_general_equation_form_is_solved_for_second_derivatives():
    sys = parse_system("x'' + y'' = x\nx'' - y'' = y")
    assert serialize_system(sys) == "vars x, y\nx'' = 1/2*x + 1/2*y\ny'' = 1/2*x - 1/2*y\n"


def test_comments_blank_lines_and_omega():
    sys = parse_system("# header\n\nvars u\n  u'' = w*u^2\n")
    assert sys.rhs[0] == ParamPoly(("u", "u'"), {(2, 0): FieldElem(0, 1)})


def test_read_system_from_file(tmp_path):
    path = tmp_path / "sys.ode"
    path.write_text(CANONICAL)
    assert read_system(path) == builtin_system()


@pytest.mark.parametrize(
    "text, error, line, col",
    [
        ("x'' = x/y\ny'' = x", NonPolynomialError, 1, 8),
        ("x'' = x^-1\ny'' = x", NonPolynomialError, 1, 8),
        ("x'' = x^(1/2)\ny'' = x", NonPolynomialError, 1, 8),
        ("x'' = sin(x)\ny'' = x", NonPolynomialError, 1, 7),
        ("x'' = x\ny'' = t*x", NonAutonomousError, 2, 7),
        ("x'' = x\ny''^2 = x", SecondDerivativeError, 2, 1),
        ("x*x'' = 1\ny'' = x", SecondDerivativeError, 1, 1),
        ("x'' + y'' = x\nx'' + y'' = y", SecondDerivativeError, 1, 1),
        ("vars x, y\nx'' = y", MissingEquationError, 2, 1),
        ("x''' = x", SystemParseError, 1, 1),
        ("x'' = x $ y", SystemParseError, 1, 9),
        ("vars x\nx'' = q", SystemParseError, 2, 7),
        ("# only a comment", SystemParseError, 1, 1),
    ],
)
def test_rejections_carry_position(text, error, line, col):
    with pytest.raises(error) as info:
        parse_system(text)
    assert (info.value.line, info.value.col) == (line, col)
    payload = info.value.to_dict()
    assert payload["line"] == line and payload["column"] == col and payload["message"]


division_by_constant = "x'' = x/2 + y\ny'' = x"


def test_division_by_a_constant_is_allowed():
    assert serialize_system(parse_system(division_by_constant)).splitlines()[1] == "x'' = 1/2*x + y"


# random polynomial systems survive serialise -> parse unchanged
STATE = ("x", "y", "x'", "y'")
coefs = st.builds(FieldElem, st.fractions(-9, 9, max_denominator=5), st.sampled_from([0, 0, 1, -2]))
rhs_polys = st.dictionaries(st.tuples(*(st.integers(0, 2) for _ in STATE)), coefs, max_size=6).map(
    lambda t: ParamPoly(STATE, t)
)


@given(rhs_polys, rhs_polys)
def test_serialisation_round_trip(f, g):
    from painleve.system import ODESystem

    sys = ODESystem(("x", "y"), (f, g))
    again = parse_system(serialize_system(sys))
    assert again == sys
    assert serialize_system(again) == serialize_system(sys)
