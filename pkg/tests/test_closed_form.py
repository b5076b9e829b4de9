from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
import sympy

from painleve.closed_form import (
    PARAM_NAMES,
    ClosedFormParams,
    DegenerateParamsError,
    PoleError,
    UnsupportedMultiplicityError,
    delta_coeffs,
    eval_closed_form,
    local_expansion,
    pole_set,
    random_safe_params,
    sum_expansion,
    transformed_params_scaling,
)
from painleve.fixtures import TABLE_I

T = sympy.Symbol("t")


def _symbolic_solution(params: ClosedFormParams):
    v = [sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in params.values()]
    A, B, C = (v[k] + v[k + 1] * T + v[k + 2] * T**2 for k in (0, 3, 6))
    dA, dB, dC = (sympy.diff(q, T) for q in (A, B, C))
    D = A**3 + B**3 + C**3 - 3 * A * B * C
    x = (A * A * dA + B * B * dB + C * C * dC - dA * B * C - A * dB * C - A * B * dC) / D
    y = (C * C * dA + A * A * dB + B * B * dC - A * B * dA - B * C * dB - A * C * dC) / D
    z = (B * B * dA + C * C * dB + A * A * dC - A * C * dA - A * B * dB - B * C * dC) / D
    return x, y, z, D


def _residuals(x, y, z):
    d = lambda f, k=1: sympy.diff(f, T, k)  # noqa: E731
    return [
        d(x, 2) + 3 * (x * d(x) + y * d(z) + z * d(y)) + x**3 + y**3 + z**3 + 6 * x * y * z,
        d(y, 2) + 3 * (x * d(y) + y * d(x) + z * d(z)) + 3 * (x**2 * y + y**2 * z + z**2 * x),
        d(z, 2) + 3 * (x * d(z) + y * d(y) + z * d(x)) + 3 * (x * y**2 + y * z**2 + z * x**2),
    ]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_exact_certification(seed):
    """Exact proof that the formulas solve the system for rational parameters.

    ``x = N/D`` with deg N <= 5 and deg D = 6, so every residual times ``D**3``
    is a polynomial of degree at most 15.  Vanishing exactly at 16 distinct
    rational points that are not zeros of ``D`` proves it vanishes identically.
    """
    params = ClosedFormParams.random(np.random.default_rng(seed), rational=True)
    x, y, z, D = _symbolic_solution(params)
    residuals = _residuals(x, y, z)
    points = [sympy.Rational(k, 7) for k in range(-40, 40)]
    checked = 0
    for t0 in points:
        if D.subs(T, t0) == 0:
            continue
        assert all(r.subs(T, t0) == 0 for r in residuals), t0
        checked += 1
        if checked == 16:
            break
    assert checked == 16


def test_x_is_a_logarithmic_derivative():
    params = ClosedFormParams.random(np.random.default_rng(4), rational=True)
    x, _, _, D = _symbolic_solution(params)
    assert sympy.cancel(x - sympy.diff(D, T) / (3 * D)) == 0


def test_numeric_evaluation_agrees_with_sympy():
    params = ClosedFormParams.random(np.random.default_rng(5), rational=True)
    x, y, z, _ = _symbolic_solution(params)
    t0 = 0.3 + 0.7j
    ours = eval_closed_form(params, t0, derivatives=2)
    for i, f in enumerate((x, y, z)):
        for k in range(3):
            want = complex(sympy.N(sympy.diff(f, T, k).subs(T, sympy.nsimplify(t0)), 30))
            assert abs(ours[k, i] - want) <= 1e-10 * max(1.0, abs(want))


def test_generic_parameters_have_six_simple_poles():
    rng = np.random.default_rng(2)
    for _ in range(20):
        poles = pole_set(ClosedFormParams.random(rng))
        assert poles.count == 6 and len(poles.simple()) == 6
        coeffs = delta_coeffs(ClosedFormParams.random(rng))
        assert coeffs.size == 7


def test_poles_are_zeros_of_delta():
    params = ClosedFormParams.random(np.random.default_rng(8))
    full = delta_coeffs(params)
    for r in pole_set(params).simple():
        assert abs(np.polynomial.polynomial.polyval(r, full)) < 1e-10
        with pytest.raises(PoleError):
            eval_closed_form(params, r)


def test_evaluation_near_but_off_a_pole_is_finite():
    params = ClosedFormParams.random(np.random.default_rng(8))
    r = pole_set(params).simple()[0]
    vals = np.array(eval_closed_form(params, r + 1e-4))
    assert np.all(np.isfinite(vals)) and np.max(np.abs(vals)) > 1e2


def test_constant_delta_has_no_poles():
    params = ClosedFormParams(a0=1)  # A = 1, B = C = 0, D = 1
    assert pole_set(params).count == 0
    assert eval_closed_form(params, 3.0) == (0, 0, 0)


def test_degenerate_parameters_are_rejected():
    with pytest.raises(DegenerateParamsError):
        ClosedFormParams()
    with pytest.raises(DegenerateParamsError):
        ClosedFormParams(a0=1, a1=1, a2=1)  # A = B = C makes D vanish identically


def test_repeated_pole_is_refused_for_expansion():
    params = ClosedFormParams(a0=-1, b0=1)  # A = t - 1, D = (t - 1)^3
    poles = pole_set(params)
    assert poles.roots and poles.roots[0][1] == 3
    with pytest.raises(UnsupportedMultiplicityError):
        local_expansion(params, 1.0, 4)


def test_sum_factor_roots_are_poles():
    # A = t^2 - 3t + 2, B = 1/2, C = t, so A + B + C = t^2 - 2t + 5/2 with roots 1 +- i*sqrt(3/2)
    params = ClosedFormParams(a0=2, b0=-3, c0=1, a1=Fraction(1, 2), b2=1)
    poles = [r for r, _ in pole_set(params).roots]
    for r in (1 + 1.5**0.5 * 1j, 1 - 1.5**0.5 * 1j):
        assert min(abs(r - p) for p in poles) < 1e-9


def test_simple_poles_carry_triplet_one_balances():
    rng = np.random.default_rng(3)
    triplet1 = [np.array([c.to_complex() for c in r.coeffs]) for r in TABLE_I if r.triplet == 1]
    for _ in range(5):
        params = ClosedFormParams.random(rng)
        for pole in pole_set(params).simple():
            lead = local_expansion(params, pole, 2)[0]
            assert min(np.max(np.abs(lead - v)) for v in triplet1) < 1e-9


def test_local_expansion_resums():
    params = ClosedFormParams.random(np.random.default_rng(6))
    poles = pole_set(params)
    pole = poles.simple()[0]
    coeffs = local_expansion(params, pole, 24)
    gap = min(abs(r - pole) for r, _ in poles.roots if r != pole)
    tau = 0.1 * gap * np.exp(0.4j)
    assert np.allclose(sum_expansion(coeffs, tau), eval_closed_form(params, pole + tau), rtol=1e-9)
    with pytest.raises(ValueError):
        local_expansion(params, pole + 0.5 * gap, 4)


def test_scaling_transform():
    params = ClosedFormParams.random(np.random.default_rng(9))
    lam, t0 = 1.7 - 0.2j, 0.35 + 0.1j
    scaled = transformed_params_scaling(params, lam)
    assert np.allclose(
        np.array(eval_closed_form(scaled, t0)), lam * np.array(eval_closed_form(params, lam * t0)), rtol=1e-10
    )


def test_safe_parameters_keep_poles_away():
    params = random_safe_params(np.random.default_rng(10), clearance=0.4)
    for r, _ in pole_set(params).roots:
        x = min(max(r.real, 0.0), 1.0)
        assert abs(r - x) >= 0.4


def test_json_round_trip(tmp_path):
    params = ClosedFormParams.from_mapping({"a0": Fraction(1, 3), "b0": 2, "c1": -1.5, "a2": "1/2"})
    text = json.dumps(params.to_dict())
    again = ClosedFormParams.from_json(text)
    assert np.allclose(again.as_complex(), params.as_complex())
    path = tmp_path / "p.json"
    path.write_text(text)
    assert np.allclose(ClosedFormParams.read(path).as_complex(), params.as_complex())
    assert list(params.to_dict()) == list(PARAM_NAMES)
    with pytest.raises(ValueError):
        ClosedFormParams.from_mapping({"q9": 1})
