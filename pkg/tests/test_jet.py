from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from painleve.jet import Jet, polyval_jet

points = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_constructors():
    t = Jet.variable(2.0, 3)
    assert t.order == 3 and t.value == 2.0 and t.derivative(1) == 1 and t.derivative(2) == 0
    c = Jet.constant(5.0, 2)
    assert list(c.derivatives()) == [5, 0, 0]
    d = Jet.from_derivatives([1.0, 2.0, 6.0])
    assert np.allclose(d.derivatives(), [1, 2, 6])


@given(points)
def test_polynomial_derivatives(t0):
    t = Jet.variable(t0, 3)
    f = polyval_jet([1, -2, 0, 3], t)  # 1 - 2t + 3t^3
    assert np.allclose(f.derivatives(), [1 - 2 * t0 + 3 * t0**3, -2 + 9 * t0**2, 18 * t0, 18])


@given(points)
def test_quotient_and_power(t0):
    t = Jet.variable(t0, 2)
    f = 1 / (t + 3)
    assert np.allclose(f.derivatives(), [1 / (t0 + 3), -1 / (t0 + 3) ** 2, 2 / (t0 + 3) ** 3])
    g = (t + 1) ** 3
    assert np.allclose(g.derivatives(), [(t0 + 1) ** 3, 3 * (t0 + 1) ** 2, 6 * (t0 + 1)])


@given(points)
def test_exp_and_composition(t0):
    t = Jet.variable(t0, 2)
    e = (2 * t).exp()
    assert np.allclose(e.derivatives(), [cmath.exp(2 * t0), 2 * cmath.exp(2 * t0), 4 * cmath.exp(2 * t0)])
    outer = Jet.from_derivatives([math.sin(1.0), math.cos(1.0), -math.sin(1.0)])  # sin about s = 1
    inner = Jet.variable(1.0, 2) * 1  # identity map
    assert np.allclose(outer.compose(inner).derivatives(), outer.derivatives())


def test_chain_rule():
    # f(s) = s^2 expanded at s = 3, composed with s = 3 + 2(t - t0) + (t - t0)^2
    outer = Jet.from_derivatives([9.0, 6.0, 2.0])
    inner = Jet.from_derivatives([3.0, 2.0, 2.0])
    got = outer.compose(inner).derivatives()
    # d/dt s^2 = 2 s s' = 12, d2 = 2 s'^2 + 2 s s'' = 8 + 12 = 20
    assert np.allclose(got, [9, 12, 20])


def test_division_by_a_vanishing_jet():
    with pytest.raises(ZeroDivisionError):
        1 / Jet.constant(0.0, 2)
