from __future__ import annotations

import warnings
from fractions import Fraction

import numpy as np
import pytest

from painleve.algebra import FieldElem
from painleve.balance import (
    Balance,
    BalanceCountWarning,
    DominantBalanceError,
    dominant_exponents,
    enumerate_balances_numeric,
    is_balance,
    leading_order_equations,
    match_numeric_to_exact,
    recognize_exact,
    table1_balances,
)
from painleve.fixtures import TABLE_I
from painleve.system import parse_poly, parse_system

LEADING = [
    "c_x^3 + 6*c_x*c_y*c_z + c_y^3 + c_z^3 - 3*c_x^2 - 6*c_y*c_z + 2*c_x",
    "3*c_x^2*c_y + 3*c_x*c_z^2 + 3*c_y^2*c_z - 6*c_x*c_y - 3*c_z^2 + 2*c_y",
    "3*c_x^2*c_z + 3*c_x*c_y^2 + 3*c_y*c_z^2 - 6*c_x*c_z - 3*c_y^2 + 2*c_z",
]


def test_dominant_exponents(system):
    assert dominant_exponents(system) == (Fraction(-1),) * 3


def test_leading_order_equations(system):
    eqs = leading_order_equations(system)
    assert [p.to_text() for p in eqs.polys] == LEADING
    assert eqs.bezout_bound() == 27


@pytest.mark.parametrize("row", TABLE_I, ids=lambda r: r.label)
def test_every_tabulated_balance_solves_the_leading_equations(system, row):
    assert is_balance(leading_order_equations(system), row.coeffs)


def test_table_is_closed_under_conjugation():
    keys = {b.coeffs for b in table1_balances()}
    assert len(keys) == 27
    assert {b.conj().coeffs for b in table1_balances()} == keys


@pytest.mark.parametrize(
    "text, message",
    [
        ("x'' = x^2\ny'' = y", "no exponent vector"),
        ("x'' = 0\ny'' = 0", "no terms"),
        ("x'' = x*y\ny'' = 0", "not fixed"),
    ],
)
def test_systems_without_a_unique_dominant_balance(text, message):
    with pytest.raises(DominantBalanceError, match=message):
        dominant_exponents(parse_system(text))


def test_scalar_oracle():
    # x'' = -3 x x' - x^3 has leading coefficients 1 and 2
    sys = parse_system("x'' = -3*x*x' - x^3")
    eqs = leading_order_equations(sys)
    assert eqs.polys[0] == parse_poly("c_x^3 - 3*c_x^2 + 2*c_x")
    res = enumerate_balances_numeric(eqs, starts=200, seed=3)
    assert sorted(round(b.numeric()[0].real, 10) for b in res.balances) == [0.0, 1.0, 2.0]


def test_numeric_enumeration_recovers_all_27(system):
    eqs = leading_order_equations(system)
    res = enumerate_balances_numeric(eqs, starts=3000, seed=21)
    exact = table1_balances()
    pairs, extra, missing = match_numeric_to_exact(res.balances, exact, tol=1e-10)
    assert len(res.balances) == 27 and not extra and not missing
    assert not res.warnings
    recognised = {recognize_exact(eqs, b).coeffs for b in res.balances}
    assert recognised == {b.coeffs for b in exact}


def test_enumeration_is_seed_deterministic(system):
    eqs = leading_order_equations(system)
    a = enumerate_balances_numeric(eqs, starts=500, seed=5)
    b = enumerate_balances_numeric(eqs, starts=500, seed=5)
    assert [x.coeffs for x in a.balances] == [x.coeffs for x in b.balances]


def test_shortfall_is_warned_not_hidden(system):
    eqs = leading_order_equations(system)
    with pytest.warns(BalanceCountWarning, match="of at most 27"):
        res = enumerate_balances_numeric(eqs, starts=2, seed=0, deflation_starts=0)
    assert len(res.balances) < 27 and res.warnings


def test_deflation_fills_in_missed_roots(system):
    eqs = leading_order_equations(system)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BalanceCountWarning)
        res = enumerate_balances_numeric(eqs, starts=20, seed=1, deflation_starts=200)
        plain = enumerate_balances_numeric(eqs, starts=20, seed=1, deflation_starts=0)
    assert len(res.balances) > len(plain.balances)


def test_recognition_rejects_a_non_root(system):
    eqs = leading_order_equations(system)
    fake = Balance(eqs.exponents, (0.123 + 0.5j, 1.0, 2.0), exact=False)
    assert recognize_exact(eqs, fake) is None


def test_balance_helpers():
    b = Balance((Fraction(-1),) * 3, (FieldElem(1), FieldElem(0), FieldElem(0, 1)))
    assert b.has_zero
    assert b.conj().coeffs[2] == FieldElem(0, -1)
    assert np.allclose(b.numeric(), [1, 0, 1j * 3**0.5])
