"""Numeric cross-checks: integration, residuals, symmetry actions, series fits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .closed_form import ClosedFormParams, PoleError, closed_form_jets, eval_closed_form
from .jet import Jet
from .series import LaurentSeries, evaluate_series
from .system import ODESystem

# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)
# ---------------------------------------------------------------------------

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Samples along a straight path ``t = t_a + s u`` with ``|u| = 1``.

    ``states`` rows are ``(x_1, ..., x_n, x_1', ..., x_n')``; ``slopes`` are
    their time derivatives, used for cubic Hermite dense output.
    """

    var_names: tuple[str, ...]
    t_start: complex
    direction: complex
    s: np.ndarray
    states: np.ndarray
    slopes: np.ndarray
    complete: bool = True
    message: str = ""
    steps: int = 0
    rejected: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.s * self.direction

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def at(self, t: complex) -> np.ndarray:
        """Dense output by cubic Hermite interpolation between accepted steps."""
        s = ((complex(t) - self.t_start) / self.direction).real
        if s < self.s[0] - 1e-12 or s > self.s[-1] + 1e-12:
            raise ValueError(f"t = {t} lies outside the integrated segment")
        k = int(np.clip(np.searchsorted(self.s, s) - 1, 0, len(self.s) - 2))
        h = self.s[k + 1] - self.s[k]
        th = (s - self.s[k]) / h
        y0, y1 = self.states[k], self.states[k + 1]
        d0, d1 = self.slopes[k] * self.direction * h, self.slopes[k + 1] * self.direction * h
        h00 = 2 * th**3 - 3 * th**2 + 1
        h10 = th**3 - 2 * th**2 + th
        h01 = -2 * th**3 + 3 * th**2
        h11 = th**3 - th**2
        return h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1

    def to_csv(self, fh: io.TextIOBase | None = None) -> str:
        """Columns ``t_re, t_im`` then value and derivative parts per variable."""
        out = fh if fh is not None else io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        header = ["t_re", "t_im"]
        for v in self.var_names:
            header += [f"{v}_re", f"{v}_im", f"d{v}_re", f"d{v}_im"]
        writer.writerow(header)
        n = len(self.var_names)
        for t, row in zip(self.times, self.states):
            cells = [repr(float(t.real)), repr(float(t.imag))]
            for i in range(n):
                for z in (row[i], row[n + i]):
                    cells += [repr(float(z.real)), repr(float(z.imag))]
            writer.writerow(cells)
        return out.getvalue() if fh is None else ""


def integrate(
    sys: ODESystem,
    init: Sequence[complex],
    span: tuple[complex, complex],
    tol: float = 1e-10,
    h0: float | None = None,
    fixed_step: float | None = None,
    h_min: float = 1e-14,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Dormand-Prince 5(4) along the straight segment from ``span[0]`` to ``span[1]``.

    ``init`` is ``(x_1, ..., x_n, x_1', ..., x_n')`` at ``span[0]``.  The local
    error estimate is held below ``tol * (1 + |y|)`` componentwise.  With
    ``fixed_step`` the error control is switched off (used for order checks).
    If the step size underflows (typically at a pole) the partial trajectory
    is returned with ``complete = False`` and a diagnostic message.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _integrate(sys, init, span, tol, h0, fixed_step, h_min, max_steps)


def _integrate(sys, init, span, tol, h0, fixed_step, h_min, max_steps) -> Trajectory:
    ta, tb = complex(span[0]), complex(span[1])
    length = abs(tb - ta)
    n = sys.n
    y = np.array(init, dtype=complex)
    if y.shape != (2 * n,):
        raise ValueError(f"initial state needs {2 * n} entries")
    if length == 0:
        f = _vector_field(sys)(y)
        return Trajectory(sys.var_names, ta, 1.0, np.array([0.0]), y[None, :], f[None, :])
    u = (tb - ta) / length
    field_ = _vector_field(sys)

    def g(yv: np.ndarray) -> np.ndarray:
        return u * field_(yv)

    s = 0.0
    k1 = g(y)
    s_list, y_list, f_list = [0.0], [y.copy()], [k1 / u]
    if fixed_step is not None:
        h = float(fixed_step)
    else:
        h = h0 if h0 is not None else _initial_step(g, y, k1, tol, length)
    steps = rejected = 0
    complete, message = True, ""
    while s < length:
        if steps + rejected >= max_steps:
            complete, message = False, f"step budget exhausted at t = {ta + s * u}"
            break
        h = min(h, length - s)
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
            ks.append(g(yi))
        y_new = y + h * sum(b * k for b, k in zip(_B5, ks) if b)
        if not np.all(np.isfinite(y_new)):
            err = math.inf
        elif fixed_step is not None:
            err = 0.0
        else:
            err_vec = h * sum(e * k for e, k in zip(_E, ks) if e)
            scale = tol * (1 + np.maximum(np.abs(y), np.abs(y_new)))
            err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            s = s + h if length - s > h else length
            y, k1 = y_new, ks[6]
            s_list.append(s)
            y_list.append(y.copy())
            f_list.append(k1 / u)
            steps += 1
            if fixed_step is None:
                factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h *= factor
        else:
            rejected += 1
            if fixed_step is not None:
                complete, message = False, f"non-finite state at t = {ta + s * u}"
                break
            h *= max(0.2, 0.9 * err ** -0.2) if math.isfinite(err) else 0.2
            if h < h_min * max(1.0, s):
                complete, message = False, f"step size underflow at t = {ta + s * u} (singularity?)"
                break
    return Trajectory(
        sys.var_names, ta, u, np.array(s_list), np.array(y_list), np.array(f_list),
        complete, message, steps, rejected,
    )


def _vector_field(sys: ODESystem) -> Callable[[np.ndarray], np.ndarray]:
    rhs = sys.numeric_rhs()
    n = sys.n

    def f(y: np.ndarray) -> np.ndarray:
        q, qd = y[:n], y[n:]
        return np.concatenate([qd, rhs(q, qd)])

    return f


def _initial_step(g, y, f0, tol, length) -> float:
    """Starting step from the usual derivative-size heuristic."""
    d0 = np.max(np.abs(y)) + 1e-300
    d1 = np.max(np.abs(f0)) + 1e-300
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, length)
    d2 = np.max(np.abs(g(y + h * f0) - f0)) / h
    h1 = (0.01 / max(d1, d2)) ** 0.2 if max(d1, d2) > 1e-15 else max(1e-6, h * 1e-3)
    return float(min(100 * h, h1, length))


# ---------------------------------------------------------------------------
# trajectory providers and residuals
# ---------------------------------------------------------------------------


class ClosedFormProvider:
    """Closed-form solution with exact derivatives via jets."""

    def __init__(self, params: ClosedFormParams):
        self.params = params

    def __call__(self, t: complex) -> np.ndarray:
        return np.array(eval_closed_form(self.params, t))

    def derivatives(self, t: complex, order: int = 2) -> np.ndarray:
        return eval_closed_form(self.params, t, order)

    def jets(self, t: Jet) -> list[Jet]:
        return list(closed_form_jets(self.params, t))


class SeriesProvider:
    """Truncated series with numeric constants; derivatives are exact term by term."""

    def __init__(self, series: LaurentSeries, values: Mapping[str, complex], t0: complex = 0.0):
        self.series, self.values, self.t0 = series, dict(values), complex(t0)

    def __call__(self, t: complex) -> np.ndarray:
        return np.array(evaluate_series(self.series, self.values, self.t0, t))

    def derivatives(self, t: complex, order: int = 2) -> np.ndarray:
        return np.array(evaluate_series(self.series, self.values, self.t0, t, derivatives=order))


class FunctionProvider:
    """Plain callable ``t -> values``; derivatives fall back to finite differences."""

    def __init__(self, fn: Callable[[complex], Sequence[complex]]):
        self.fn = fn

    def __call__(self, t: complex) -> np.ndarray:
        return np.asarray(self.fn(t), dtype=complex)


FD_STEP = 1e-5


def finite_difference_derivatives(fn: Callable[[complex], np.ndarray], t: complex, h: float = FD_STEP) -> np.ndarray:
    """Value, first and second derivative by central differences with one Richardson step.

    Truncation error is ``O(h^4)``; rounding error is about ``eps |f| / h^2``
    for the second derivative, near ``1e-6 |f|`` at the default step.
    """
    t = complex(t)

    def central(step: float):
        fp, fm, f0 = np.asarray(fn(t + step)), np.asarray(fn(t - step)), np.asarray(fn(t))
        return (fp - fm) / (2 * step), (fp - 2 * f0 + fm) / step**2

    d1h, d2h = central(h)
    d1h2, d2h2 = central(h / 2)
    d1 = (4 * d1h2 - d1h) / 3
    d2 = (4 * d2h2 - d2h) / 3
    return np.array([np.asarray(fn(t)), d1, d2])


def _derivs(fn, t: complex) -> np.ndarray:
    if hasattr(fn, "derivatives"):
        return np.asarray(fn.derivatives(t, 2))
    return finite_difference_derivatives(fn, t)


def residual(sys: ODESystem, fn, samples: Sequence[complex]) -> float:
    """Max over samples and equations of ``|x_i'' - F_i(x, x')|``."""
    rhs = sys.numeric_rhs()
    worst = 0.0
    for t in samples:
        d = _derivs(fn, t)
        r = d[2] - rhs(d[0], d[1])
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


# ---------------------------------------------------------------------------
# symmetry actions
# ---------------------------------------------------------------------------


class SymmetryPoleError(PoleError):
    """The transformed solution hits a singularity at the requested time."""


@dataclass(frozen=True)
class SymmetryGenerator:
    """Finite one-parameter action ``(eps, t, x) -> (t~, x~)`` of a point symmetry.

    ``inverse_time`` gives ``t`` as a function of ``t~``; ``state_map``
    gives ``x~`` from ``t`` and ``x``.  Both accept jets so transformed
    solutions carry exact derivatives.
    """

    name: str
    generator: str
    time_map: Callable[[float, object], object]
    inverse_time: Callable[[float, object], object]
    state_map: Callable[[float, object, Sequence[object]], list]
    algebra: str = field(default="sl(2,R)", compare=False)

    def point_map(self, eps: float, t: complex, xs: Sequence[complex]) -> tuple[complex, list[complex]]:
        return self.time_map(eps, t), list(self.state_map(eps, t, xs))


def _g3_state(eps, t, xs):
    w = 1 + eps * t
    return [w * w * xs[0] - 2 * eps * w] + [w * w * x for x in xs[1:]]


GAMMA1 = SymmetryGenerator(
    "Gamma1", "d/dt",
    time_map=lambda eps, t: t + eps,
    inverse_time=lambda eps, tt: tt - eps,
    state_map=lambda eps, t, xs: list(xs),
)
GAMMA2 = SymmetryGenerator(
    "Gamma2", "-t d/dt + x d/dx + y d/dy + z d/dz",
    time_map=lambda eps, t: math.exp(-eps) * t,
    inverse_time=lambda eps, tt: math.exp(eps) * tt,
    state_map=lambda eps, t, xs: [math.exp(eps) * x for x in xs],
)
GAMMA3 = SymmetryGenerator(
    "Gamma3", "-t^2 d/dt + 2(-1 + t x) d/dx + 2 t y d/dy + 2 t z d/dz",
    time_map=lambda eps, t: t / (1 + eps * t),
    inverse_time=lambda eps, tt: tt / (1 - eps * tt),
    state_map=_g3_state,
)
GENERATORS = {g.name: g for g in (GAMMA1, GAMMA2, GAMMA3)}


def transformed_jets(gen: SymmetryGenerator, sol, eps: float, t_new: complex, order: int = 2) -> list[Jet]:
    """Jets in ``t~`` of the transformed solution at ``t~ = t_new``."""
    tt = Jet.variable(t_new, order)
    try:
        t_jet = gen.inverse_time(eps, tt)
    except ZeroDivisionError as exc:
        raise SymmetryPoleError(t_new) from exc
    try:
        if hasattr(sol, "jets"):
            xs = sol.jets(t_jet)
        else:
            d = _derivs(sol, t_jet.value)
            xs = [Jet.from_derivatives(d[: order + 1, i]).compose(t_jet) for i in range(d.shape[1])]
    except PoleError as exc:
        raise SymmetryPoleError(t_new, exc.root) from exc
    return gen.state_map(eps, t_jet, xs)


def symmetry_check(
    sys: ODESystem,
    gen: SymmetryGenerator,
    sol,
    eps: float = 1e-2,
    samples: Sequence[complex] = (0.1, 0.35, 0.6, 0.85),
) -> float:
    """Residual of the transformed solution at the given ``t~`` samples."""
    rhs = sys.numeric_rhs()
    worst = 0.0
    for t_new in samples:
        jets = transformed_jets(gen, sol, eps, t_new)
        d = np.array([j.derivatives() for j in jets]).T
        r = d[2] - rhs(d[0], d[1])
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


# ---------------------------------------------------------------------------
# series against local expansions
# ---------------------------------------------------------------------------


def fit_series_constants(series: LaurentSeries, oracle: np.ndarray) -> dict[str, complex]:
    """Choose injected constants so the series matches ``oracle`` at every resonance order.

    ``oracle`` row ``k`` holds the numeric coefficient vector of order ``k``.
    New symbols enter linearly at their own order, so each resonance is a
    small least-squares solve given the constants fixed earlier.
    """
    values: dict[str, complex] = {}
    for order in series.orders():
        names = series.injected.get(order)
        if not names:
            continue
        row = series.coefficient(order)
        trial = dict(values, **{nm: 0.0 for nm in names})
        base = np.array([c.evaluate_numeric(trial) for c in row])
        jac = np.array([[c.diff(nm).evaluate_numeric(trial) for nm in names] for c in row])
        target = np.asarray(oracle[series.sign * order]) - base
        sol, *_ = np.linalg.lstsq(jac, target, rcond=None)
        values.update(zip(names, (complex(v) for v in sol)))
    return values


def series_numeric_coeffs(series: LaurentSeries, values: Mapping[str, complex]) -> np.ndarray:
    return np.array([[c.evaluate_numeric(values) for c in row] for row in series.coeffs])


def max_relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest per-order gap, relative to that order's size (at least 1)."""
    gaps = np.abs(np.asarray(a) - np.asarray(b)).max(axis=1)
    scale = np.maximum(1.0, np.abs(np.asarray(b)).max(axis=1))
    return float(np.max(gaps / scale))
