"""Exact linear algebra over Q(w) and polynomial rings, plus root finding."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence, TypeVar

import numpy as np

from .field import EPS_NUM, ONE, ZERO, FieldElem
from .poly import PolyInS

T = TypeVar("T")


class RootFindingError(ArithmeticError):
    """Numeric root finding failed on a deflated factor."""


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------


def det_poly_matrix(m: Sequence[Sequence[PolyInS]]) -> PolyInS:
    """Exact determinant of a square matrix of polynomials in ``s``.

    Laplace expansion along rows with memoised minors, O(n 2^n) products.
    """
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix must be square")
    if n == 0:
        return PolyInS([1])
    rows = [[e if isinstance(e, PolyInS) else PolyInS([e]) for e in row] for row in m]

    @lru_cache(maxsize=None)
    def minor(r: int, cols: tuple[int, ...]) -> PolyInS:
        if r == n:
            return PolyInS([1])
        total = PolyInS()
        for k, c in enumerate(cols):
            entry = rows[r][c]
            if entry.is_zero():
                continue
            sub = minor(r + 1, cols[:k] + cols[k + 1 :])
            term = entry * sub
            total = total + term if k % 2 == 0 else total - term
        return total

    return minor(0, tuple(range(n)))


def det_field(m: Sequence[Sequence[FieldElem]]) -> FieldElem:
    """Exact determinant by Gaussian elimination over Q(w)."""
    a = [[FieldElem.coerce(x) for x in row] for row in m]
    n = len(a)
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


# ---------------------------------------------------------------------------
# elimination / null spaces
# ---------------------------------------------------------------------------


def rref(m: Sequence[Sequence[FieldElem]]) -> tuple[list[list[FieldElem]], list[int]]:
    """Reduced row echelon form with pivots scanned left to right."""
    a = [[FieldElem.coerce(x) for x in row] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Sequence[Sequence[FieldElem]]) -> int:
    return len(rref(m)[1]) if m else 0


def null_space(m: Sequence[Sequence[FieldElem]]) -> list[tuple[FieldElem, ...]]:
    """Canonical exact basis of the right null space.

    One vector per free column, in increasing column order; each vector has
    a 1 in its own free column and 0 in the other free columns.
    """
    if not m:
        return []
    reduced, pivots = rref(m)
    n = len(m[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(tuple(v))
    return basis


def span_rref(vectors: Sequence[Sequence[FieldElem]]) -> list[tuple[FieldElem, ...]]:
    """Canonical form of a span: nonzero rows of the RREF of the stacked vectors.

    Two families span the same space iff their ``span_rref`` agree.
    """
    if not vectors:
        return []
    reduced, pivots = rref(vectors)
    return [tuple(row) for row in reduced[: len(pivots)]]


def solve_affine(m: Sequence[Sequence[FieldElem]], rhs: Sequence[T], zero: T) -> tuple[list[T], list[T]]:
    """Solve ``m @ u = rhs`` where ``rhs`` entries live in a Q(w)-module.

    ``rhs`` entries need ``+``, ``-`` and multiplication by FieldElem (e.g.
    ParamPoly).  Returns ``(particular, obstruction)``: the particular solution
    has every free variable set to zero; ``obstruction`` lists the transformed
    right-hand sides of zero rows, all zero iff the system is consistent.
    """
    a = [[FieldElem.coerce(x) for x in row] for row in m]
    b = list(rhs)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        b[r], b[piv] = b[piv], b[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        b[r] = b[r] * inv
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                b[i] = b[i] - b[r] * f
        pivots.append(c)
        r += 1
        if r == rows:
            break
    particular = [zero] * cols
    for i, p in enumerate(pivots):
        particular[p] = b[i]
    obstruction = b[len(pivots):]
    return particular, obstruction


# ---------------------------------------------------------------------------
# numeric null space (for balances that are only known numerically)
# ---------------------------------------------------------------------------


def null_space_numeric(m: np.ndarray, tol: float = 1e-8) -> list[np.ndarray]:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return []
    _, sv, vh = np.linalg.svd(m)
    scale = max(1.0, float(sv[0])) if sv.size else 1.0
    rank_ = int(np.sum(sv > tol * scale))
    return [vh[k].conj() for k in range(rank_, m.shape[1])]


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _primitive_integer(coeffs: Sequence[Fraction]) -> list[int]:
    den = reduce(math.lcm, (c.denominator for c in coeffs), 1)
    ints = [int(c * den) for c in coeffs]
    g = reduce(math.gcd, ints, 0)
    return [x // g for x in ints] if g else ints


def _rational_candidates(p: PolyInS) -> list[Fraction]:
    re_part = [c.re for c in p.coeffs]
    om_part = [c.om for c in p.coeffs]
    # a rational root must kill both the rational and the w component
    base = re_part if any(re_part) else om_part
    ints = _primitive_integer(base)
    while ints and ints[-1] == 0:
        ints.pop()
    lo = next(i for i, c in enumerate(ints) if c)
    const, lead = ints[lo], ints[-1]
    cands = {Fraction(0)} if lo else set()
    for d in _divisors(const):
        for e in _divisors(lead):
            cands.add(Fraction(d, e))
            cands.add(Fraction(-d, e))
    return sorted(cands)


def roots_with_multiplicity(
    p: PolyInS, eps: float = EPS_NUM, cluster_tol: float = 1e-5
) -> list[tuple[FieldElem | complex, int]]:
    """Roots of ``p`` with algebraic multiplicities.

    Rational roots are found exactly (rational-root theorem on the primitive
    integer form, then repeated synthetic division).  Whatever factor remains
    is rooted numerically and clustered; clustered roots are reported as
    complex numbers.  Results are sorted by real part, exact roots first
    within ties.
    """
    if p.is_zero():
        raise ValueError("roots of the zero polynomial are undefined")
    found: list[tuple[FieldElem | complex, int]] = []
    rest = p
    if rest.degree > 0:
        for r in _rational_candidates(rest):
            mult = 0
            while rest.degree > 0:
                q, rem = rest.divmod_linear(r)
                if rem:
                    break
                rest, mult = q, mult + 1
            if mult:
                found.append((FieldElem(r), mult))
    if rest.degree > 0:
        found.extend(_numeric_roots(rest, eps, cluster_tol))
    found.sort(key=lambda rm: (complex(rm[0]).real, complex(rm[0]).imag))
    return found


def _numeric_roots(p: PolyInS, eps: float, cluster_tol: float) -> list[tuple[complex, int]]:
    coeffs = np.array(p.to_complex_coeffs()[::-1], dtype=complex)
    raw = np.roots(coeffs)
    if raw.size != p.degree or not np.all(np.isfinite(raw)):
        raise RootFindingError(f"numeric rooting failed for factor {p}")
    clusters: list[list[complex]] = []
    for z in sorted(raw, key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if abs(cl[0] - z) <= cluster_tol * max(1.0, abs(z)):
                cl.append(z)
                break
        else:
            clusters.append([z])
    out = []
    for cl in clusters:
        z = complex(np.mean(cl))
        m = len(cl)
        # the (m-1)th derivative must vanish there as well, to working precision
        check = p
        for _ in range(m - 1):
            check = check.derivative()
        scale = sum(abs(c) for c in check.to_complex_coeffs()) * max(1.0, abs(z)) ** check.degree
        if abs(check(z)) > max(eps, 1e-6) * max(1.0, scale):
            raise RootFindingError(f"root {z} of factor {p} did not converge")
        out.append((z, m))
    return out
