from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from painleve.acceptance import right_series
from painleve.algebra import FieldElem, ParamPoly
from painleve.balance import Balance
from painleve.fixtures import (
    LEFT_SERIES_T3_M1_SYMBOLS,
    RIGHT_SERIES_T1_M1_SYMBOLS,
    left_series_display,
    right_series_display,
    symbol_map,
)
from painleve.resonance import resonance_report
from painleve.series import (
    RESIDUAL_ZERO,
    SeriesKind,
    build_left_series,
    build_right_series,
    evaluate_series,
    guaranteed_residual_order,
    series_residual,
    series_residual_order,
    symbol_name,
)
from painleve.system import ODESystem, parse_poly, parse_system

RIGHT_MAP = symbol_map(RIGHT_SERIES_T1_M1_SYMBOLS)
LEFT_MAP = symbol_map(LEFT_SERIES_T3_M1_SYMBOLS)

# values the recursion produces where the printed display disagrees
X_TAU2 = (
    "a0^3 + 3*a0^2*b0 + 3*a0^2*c0 + 3/2*a0*b0^2 + 3/2*a0*c0^2 - 1/2*b0^3 - 1/2*c0^3"
    " + 3/2*a0*b1 + 3/2*a0*c1 - 3/2*b0*c1 - 3/2*b1*c0"
)
TAU_M3 = {
    "x": "a2^2 - 2*a2*b2 - 2*b2^2",
    "y": "a2^2 + 4*a2*b2 + b2^2",
    "z": "-2*a2^2 - 2*a2*b2 + b2^2",
}


@pytest.fixture(scope="module")
def t11():
    return right_series(1)


@pytest.fixture(scope="module")
def left(system, report):
    return build_left_series(system, report(3, 1), 3)


# --- sympy oracle -----------------------------------------------------------


def _sympy_residual(system: ODESystem, comps: dict[str, sympy.Expr], tau: sympy.Symbol):
    subs = {}
    for v in system.var_names:
        subs[sympy.Symbol(v)] = comps[v]
        subs[sympy.Symbol(v + "'")] = sympy.diff(comps[v], tau)
    out = []
    for v, f in zip(system.var_names, system.rhs):
        rhs = sympy.sympify(f.to_text().replace("^", "**").replace("'", "_d"), locals={
            n + "_d": sympy.Symbol(n + "'") for n in system.var_names
        })
        out.append(sympy.expand(sympy.diff(comps[v], tau, 2) - rhs.subs(subs, simultaneous=True)))
    return out


def _to_sympy(p: ParamPoly) -> sympy.Expr:
    text = p.to_text().replace("^", "**").replace("w", "sqrt(-3)")
    return sympy.sympify(text)


def _ascending(coeffs: dict[str, list[ParamPoly]], tau):
    return {v: sum(_to_sympy(c) * tau ** (k - 1) for k, c in enumerate(cs)) for v, cs in coeffs.items()}


def _descending(coeffs: dict[str, list[ParamPoly]], tau):
    return {v: sum(_to_sympy(c) * tau ** (-1 - k) for k, c in enumerate(cs)) for v, cs in coeffs.items()}


def _named(series, mapping, length):
    return {
        v: [row[i].substitute(mapping) for row in series.coeffs[:length]] for i, v in enumerate(series.var_names)
    }


def test_sympy_certifies_computed_right_series_to_tau2(system, t11):
    tau = sympy.Symbol("tau")
    series, _ = t11
    res = _sympy_residual(system, _ascending(_named(series, RIGHT_MAP, 4), tau), tau)
    for r in res:
        # every power through tau^0 must cancel; tau^-3 .. tau^0 is four orders
        assert all(sympy.expand(r.coeff(tau, k)) == 0 for k in range(-3, 1))


def test_sympy_rejects_printed_tau2_coefficient(system):
    tau = sympy.Symbol("tau")
    res = _sympy_residual(system, _ascending(right_series_display(), tau), tau)
    assert any(sympy.expand(r.coeff(tau, 0)) != 0 for r in res)


def test_sympy_certifies_computed_left_series(system, left):
    tau = sympy.Symbol("tau")
    res = _sympy_residual(system, _descending(_named(left, LEFT_MAP, 4), tau), tau)
    for r in res:
        assert all(sympy.expand(r.coeff(tau, k)) == 0 for k in range(-6, -2))


def test_sympy_rejects_printed_tau_minus3_row(system):
    tau = sympy.Symbol("tau")
    res = _sympy_residual(system, _descending(left_series_display(), tau), tau)
    assert any(sympy.expand(r.coeff(tau, -5)) != 0 for r in res)


# --- ascending series --------------------------------------------------------


def test_right_series_agrees_with_display_except_x_tau2(t11):
    series, _ = t11
    display = right_series_display()
    for j in range(4):
        for i, v in enumerate(series.var_names):
            got = series.coeffs[j][i].substitute(RIGHT_MAP)
            if (v, j) == ("x", 3):
                assert got == parse_poly(X_TAU2)
                assert got != display[v][j]
            else:
                assert got == display[v][j], (v, j)


def test_right_series_compatibility_through_order_8(system, report):
    for member in (1, 2, 3):
        series, compat = right_series(member)
        assert [c.order for c in compat] == [1, 2]
        assert all(c.consistent for c in compat)
        assert series.last_order == 8 and series.halted_at is None
        assert series.symbols() == ["r1_0", "r1_1", "r1_2", "r2_0", "r2_1"]
        assert len(series.symbols()) == 5  # six constants less t0


def test_right_series_residual_beats_guarantee(system, t11):
    series, _ = t11
    for last in (0, 1, 2, 4, 8):
        cut = series.truncate(last)
        order = series_residual_order(system, cut)
        assert order > guaranteed_residual_order(cut), last
    assert series_residual_order(system, series.truncate(0)) == RESIDUAL_ZERO  # x=y=z=1/(3 tau) is exact


def test_perturbing_one_coefficient_exposes_its_order(system, t11):
    series, _ = t11
    # orders 1 and 2 are resonances, where a shift only moves a free constant
    for k in (3, 4, 5):
        cut = series.truncate(6)
        row = list(cut.coeffs[k])
        row[1] = row[1] + ParamPoly.constant(1)
        cut.coeffs[k] = tuple(row)
        assert series_residual_order(system, cut) == k - 3


def test_residual_of_the_zero_system_vanishes():
    sys = parse_system("x'' = 0\ny'' = 0")
    from painleve.series import LaurentSeries

    s = LaurentSeries(SeriesKind.ASCENDING, sys.var_names, (Fraction(-1), Fraction(-1)), [
        (ParamPoly.constant(0), ParamPoly.constant(0)),
    ])
    assert series_residual_order(sys, s) == math.inf
    assert all(not c for eq in series_residual(sys, s) for c in eq.values())


def test_assigned_constants_equal_substitution(system, report):
    assign = {"r1_0": FieldElem(Fraction(2, 5)), "r1_1": FieldElem(-1, 1), "r2_0": FieldElem(3)}
    fixed, _ = build_right_series(system, report(1, 1), 5, assign=assign)
    free, _ = right_series(1)
    free = free.truncate(5).substitute(assign)
    for a, b in zip(fixed.coeffs, free.coeffs):
        assert all(x == y for x, y in zip(a, b))


def test_constants_stay_arbitrary(system, t11):
    """Random values for every constant keep the residual order intact."""
    rng = np.random.default_rng(0)
    series, _ = t11
    cut = series.truncate(5)
    for _ in range(3):
        values = {s: FieldElem(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))) for s in cut.symbols()}
        assert series_residual_order(system, cut.substitute(values)) > guaranteed_residual_order(cut)


def test_coefficients_are_affine_in_the_latest_constant(t11):
    series, _ = t11
    for row in series.coeffs[:4]:
        for c in row:
            assert c.degree_in("r2_0") <= 1 and c.degree_in("r2_1") <= 1


def test_direction_guard(system, report):
    with pytest.raises(ValueError, match="MixedAnnulus"):
        build_right_series(system, report(3, 1), 2)
    series, compat = build_right_series(system, report(3, 1), 2, force=True)
    assert compat and compat[0].order == 1
    with pytest.raises(ValueError, match="descending"):
        build_left_series(system, report(1, 1), 2)


def test_obstruction_halts_the_recursion():
    # a lower-weight x' term feeds the +1 resonance an incompatible right-hand side
    sys = parse_system("x'' = -3*x*x' - x^3 + x'")
    rep = resonance_report(sys, Balance((Fraction(-1),), (FieldElem(1),)))
    assert rep.pattern() == "-1, 1"
    series, compat = build_right_series(sys, rep, 4)
    assert [c.to_dict() for c in compat] == [{"order": 1, "consistent": False, "obstruction": ["-1"]}]
    assert series.halted_at == 1 and series.last_order == 0


def test_compatible_lower_weight_term():
    # a constant forcing term enters at order 3 and leaves the +1 resonance compatible
    sys = parse_system("x'' = -3*x*x' - x^3 + 1")
    rep = resonance_report(sys, Balance((Fraction(-1),), (FieldElem(1),)))
    series, compat = build_right_series(sys, rep, 5)
    assert compat[0].consistent and series.halted_at is None
    assert series_residual_order(sys, series) > guaranteed_residual_order(series)


def test_evaluation_and_derivatives(t11):
    series, _ = t11
    cut = series.truncate(4)
    vals = {s: 0.1 * (i + 1) for i, s in enumerate(cut.symbols())}
    t0, t, h = 0.2, 0.45 + 0.1j, 1e-5
    v, d1, d2 = (np.array(r) for r in evaluate_series(cut, vals, t0, t, derivatives=2))
    plain = np.array(evaluate_series(cut, vals, t0, t))
    assert np.allclose(v, plain, rtol=1e-13)
    fd = (np.array(evaluate_series(cut, vals, t0, t + h)) - np.array(evaluate_series(cut, vals, t0, t - h))) / (2 * h)
    assert np.allclose(d1, fd, rtol=1e-8)
    with pytest.raises(ZeroDivisionError):
        evaluate_series(cut, vals, t0, t0)


def test_series_json_shape(t11):
    doc = t11[0].truncate(2).to_dict()
    assert doc["kind"] == "Ascending"
    assert doc["injected"] == {"1": ["r1_0", "r1_1", "r1_2"], "2": ["r2_0", "r2_1"]}
    assert [o["order"] for o in doc["orders"]] == [0, 1, 2]
    assert doc["orders"][0]["coeffs"] == {"x": "1/3", "y": "1/3", "z": "1/3"}


def test_truncation_guards(t11):
    with pytest.raises(ValueError):
        t11[0].truncate(-1)
    assert symbol_name(2, 0) == "r2_0" and symbol_name(-1, 1) == "rm1_1"


# --- descending series ---------------------------------------------------------


def test_left_series_agrees_with_display_except_tau_minus3(left):
    display = left_series_display()
    for j in range(4):
        for i, v in enumerate(left.var_names):
            got = left.coeffs[j][i].substitute(LEFT_MAP)
            if j == 2:
                assert got == parse_poly(TAU_M3[v])
                assert got != display[v][j]
            else:
                assert got == display[v][j], (v, j)


def test_left_series_shape(system, left):
    assert left.kind is SeriesKind.DESCENDING
    assert left.symbols() == ["rm1_0", "rm1_1"]
    assert left.pinned == {1: 3, 2: 1}
    assert all(c.consistent for c in left.compatibility)
    assert left.orders() == [0, -1, -2, -3]


def test_left_series_residual(system, report):
    deep = build_left_series(system, report(3, 1), 5)
    order = series_residual_order(system, deep)
    assert order < guaranteed_residual_order(deep)


def test_pinning_is_validated(system, report):
    with pytest.raises(ValueError, match="pinned"):
        build_left_series(system, report(3, 1), 2, pinned={1: 3})


def test_descending_series_needs_homogeneous_weights(report):
    # adding a lower-weight term means negative powers of tau are no longer balanced
    sys = parse_system(
        "x'' = -3*x*x' - 3*y*z' - 3*y'*z - x^3 - y^3 - z^3 - 6*x*y*z + x\n"
        "y'' = -3*x*y' - 3*y*x' - 3*z*z' - 3*x^2*y - 3*y^2*z - 3*z^2*x\n"
        "z'' = -3*x*z' - 3*y*y' - 3*z*x' - 3*x*y^2 - 3*y*z^2 - 3*z*x^2"
    )
    with pytest.raises(ValueError):
        build_left_series(sys, report(3, 1), 2)
