"""Resonances (Kovalevskaya exponents) of a dominant balance.

Perturbing ``x_i = c_i tau**p_i + m_i tau**(p_i + s)`` and keeping the part
linear in ``m`` gives ``M(s) m = 0`` at the power ``tau**(p_i - 2 + s)`` of
row ``i``, with

    M_ij(s) = delta_ij (p_i + s)(p_i + s - 1) - dF_i/dx_j - (p_j + s) dF_i/dx_j'

evaluated at the balance.  Resonances are the roots of ``det M(s)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import (
    EPS_NUM,
    FieldElem,
    PolyInS,
    det_poly_matrix,
    null_space,
    null_space_numeric,
    roots_with_multiplicity,
    span_rref,
)
from .balance import Balance, dominant_part
from .system import ODESystem


class ParticularBranchError(ValueError):
    """Balance with a zero coefficient: it only yields a particular solution."""


class BranchClass(str, enum.Enum):
    RIGHT = "RightSeries"
    MIXED = "MixedAnnulus"
    LEFT = "LeftSeries"


@dataclass(frozen=True)
class ResonanceMatrix:
    balance: Balance
    entries: tuple[tuple[PolyInS, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    def at(self, s) -> list[list]:
        """Matrix evaluated at ``s`` (exact for field values, complex otherwise)."""
        return [[e(s) for e in row] for row in self.entries]

    def at_numeric(self, s: complex) -> np.ndarray:
        return np.array([[complex(e(complex(s))) for e in row] for row in self.entries], dtype=complex)

    def determinant(self) -> PolyInS:
        return det_poly_matrix(self.entries)


@dataclass(frozen=True)
class ResonanceRoot:
    value: FieldElem | complex
    alg_mult: int
    geo_mult: int
    null_basis: tuple  # tuple of vectors (FieldElem tuples, or complex arrays)

    @property
    def exact(self) -> bool:
        return isinstance(self.value, FieldElem)

    def as_int(self) -> int | None:
        """Integer value of the resonance, if it is one."""
        if self.exact:
            if self.value.is_rational() and self.value.re.denominator == 1:
                return int(self.value.re)
            return None
        z = complex(self.value)
        k = round(z.real)
        return k if abs(z - k) <= EPS_NUM else None

    def real(self) -> float:
        return complex(self.value).real


@dataclass(frozen=True)
class ResonanceReport:
    balance: Balance
    matrix: ResonanceMatrix
    poly: PolyInS
    roots: tuple[ResonanceRoot, ...]
    branch_class: BranchClass
    tol: float = EPS_NUM

    def multiset(self) -> list[tuple[object, int]]:
        return [(r.value, r.alg_mult) for r in self.roots]

    def root(self, value) -> ResonanceRoot:
        for r in self.roots:
            if r.exact and isinstance(value, (int, Fraction, FieldElem)) and r.value == value:
                return r
            if abs(complex(r.value) - complex(value)) <= self.tol:
                return r
        raise KeyError(value)

    def integer_resonances(self) -> dict[int, ResonanceRoot]:
        return {k: r for r in self.roots if (k := r.as_int()) is not None}

    def pattern(self) -> str:
        """Compact text like ``-1, 1(3), 2(2)``."""
        parts = []
        for r in self.roots:
            k = r.as_int()
            v = str(k) if k is not None else _fmt_complex(complex(r.value))
            parts.append(v if r.alg_mult == 1 else f"{v}({r.alg_mult})")
        return ", ".join(parts)


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) <= EPS_NUM:
        return f"{z.real:.10g}"
    return f"{z.real:.10g}{z.imag:+.10g}i"


def build_resonance_matrix(sys: ODESystem, bal: Balance) -> ResonanceMatrix:
    """Exact linearisation about an exact balance (polynomial entries in ``s``)."""
    if bal.has_zero:
        raise ParticularBranchError(
            f"balance {bal} has a zero coefficient and gives only a particular-solution branch"
        )
    if not bal.exact:
        raise TypeError("exact resonance matrix requires an exact balance; use numeric_resonance_report")
    n = sys.n
    p = [Fraction(x) for x in bal.exponents]
    values = {}
    for j, v in enumerate(sys.var_names):
        values[v] = bal.coeffs[j]
        values[v + "'"] = bal.coeffs[j] * FieldElem(p[j])
    rows = []
    for i in range(n):
        f = dominant_part(sys, i, p)
        row = []
        for j, v in enumerate(sys.var_names):
            dx = f.diff(v).evaluate(values)
            dv = f.diff(v + "'").evaluate(values)
            # -(dx + (p_j + s) dv)
            entry = PolyInS([-dx - dv * FieldElem(p[j]), -dv])
            if i == j:
                entry = entry + PolyInS([p[i] * (p[i] - 1), 2 * p[i] - 1, 1])
            row.append(entry)
        rows.append(tuple(row))
    return ResonanceMatrix(bal, tuple(rows))


def classify_branch(roots: Sequence[ResonanceRoot] | ResonanceReport) -> BranchClass:
    """Right if every non-generic resonance is positive, Left if every one is negative.

    One copy of -1 is generic; further copies of -1 count as negative.
    """
    if isinstance(roots, ResonanceReport):
        roots = roots.roots
    values: list[float] = []
    generic_taken = False
    for r in roots:
        for _ in range(r.alg_mult):
            if not generic_taken and r.as_int() == -1:
                generic_taken = True
                continue
            values.append(r.real())
    if all(v > 0 for v in values):
        return BranchClass.RIGHT
    if all(v < 0 for v in values):
        return BranchClass.LEFT
    return BranchClass.MIXED


def resonance_report(sys: ODESystem, bal: Balance, tol: float = EPS_NUM) -> ResonanceReport:
    if not bal.exact:
        return numeric_resonance_report(sys, bal, tol)
    matrix = build_resonance_matrix(sys, bal)
    poly = matrix.determinant()
    roots = []
    for value, mult in roots_with_multiplicity(poly, eps=tol):
        if isinstance(value, FieldElem):
            basis = tuple(null_space(matrix.at(value)))
        else:
            basis = tuple(null_space_numeric(matrix.at_numeric(value), tol=1e-7))
        roots.append(ResonanceRoot(value, mult, len(basis), basis))
    return ResonanceReport(bal, matrix, poly, tuple(roots), classify_branch(roots), tol)


def numeric_resonance_report(sys: ODESystem, bal: Balance, tol: float = EPS_NUM) -> ResonanceReport:
    """Resonances of a balance known only numerically.

    The matrix entries are quadratic in ``s``; the determinant is assembled
    numerically and rooted with clustering.  Geometric multiplicities come
    from SVD null spaces.
    """
    if bal.has_zero:
        raise ParticularBranchError(f"balance {bal} has a zero coefficient")
    n = sys.n
    p = [float(x) for x in bal.exponents]
    c = bal.numeric()
    state_vals = {}
    for j, v in enumerate(sys.var_names):
        state_vals[v] = c[j]
        state_vals[v + "'"] = c[j] * p[j]
    coeffs = np.zeros((n, n, 3), dtype=complex)
    exps = [Fraction(x) for x in bal.exponents]
    for i in range(n):
        f = dominant_part(sys, i, exps)
        for j, v in enumerate(sys.var_names):
            dx = f.diff(v).evaluate_numeric(state_vals)
            dv = f.diff(v + "'").evaluate_numeric(state_vals)
            coeffs[i, j, 0] -= dx + p[j] * dv
            coeffs[i, j, 1] -= dv
        coeffs[i, i] += [p[i] * (p[i] - 1), 2 * p[i] - 1, 1]
    det = _numeric_det_poly(coeffs)
    raw = np.roots(det[::-1])
    clusters: list[list[complex]] = []
    for z in sorted(raw, key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if abs(cl[0] - z) <= 1e-4 * max(1.0, abs(z)):
                cl.append(z)
                break
        else:
            clusters.append([z])
    roots = []
    for cl in clusters:
        z = complex(np.mean(cl))
        k = round(z.real)
        if abs(z - k) <= 1e-6:
            z = complex(k)
        m = coeffs[:, :, 0] + z * coeffs[:, :, 1] + z * z * coeffs[:, :, 2]
        basis = tuple(null_space_numeric(m, tol=1e-6))
        roots.append(ResonanceRoot(z, len(cl), len(basis), basis))
    matrix = ResonanceMatrix(bal, ())
    poly = PolyInS()
    return ResonanceReport(bal, matrix, poly, tuple(roots), classify_branch(roots), tol)


def _numeric_det_poly(coeffs: np.ndarray) -> np.ndarray:
    """Determinant of a matrix polynomial given as ``(n, n, deg+1)`` coefficients."""
    n = coeffs.shape[0]
    if n == 1:
        return coeffs[0, 0]
    total = np.zeros(1, dtype=complex)
    for k in range(n):
        minor = np.delete(np.delete(coeffs, 0, axis=0), k, axis=1)
        term = np.polynomial.polynomial.polymul(coeffs[0, k], _numeric_det_poly(minor))
        total = np.polynomial.polynomial.polyadd(total, term if k % 2 == 0 else -term)
    return total


def constant_count(report: ResonanceReport) -> int:
    """Total number of arbitrary constants signalled: sum of geometric multiplicities."""
    return sum(r.geo_mult for r in report.roots)


def same_span(a: Sequence[Sequence[FieldElem]], b: Sequence[Sequence[FieldElem]]) -> bool:
    return span_rref(a) == span_rref(b)


def conj_vectors(basis) -> list[tuple[FieldElem, ...]]:
    return [tuple(x.conj() for x in v) for v in basis]
