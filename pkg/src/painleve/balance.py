"""Leading-order (dominant balance) analysis.

For an all-terms-dominant system the ansatz ``x_i = c_i * tau**p_i`` with
``tau = t - t0`` turns every equation into a single power of ``tau``; the
exponents are fixed by weight homogeneity and the coefficients solve a
polynomial system.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import FieldElem, ParamPoly, from_complex, rref
from .fixtures import TABLE_I, TableRow
from .system import ODESystem


class DominantBalanceError(ValueError):
    """The system has no unique all-terms-dominant exponent vector."""


class BalanceCountWarning(UserWarning):
    """Fewer numeric roots were found than the Bezout bound."""


@dataclass(frozen=True)
class Balance:
    exponents: tuple[Fraction, ...]
    coeffs: tuple  # FieldElem when exact, complex when numeric
    exact: bool = True
    label: str | None = None

    @property
    def has_zero(self) -> bool:
        if self.exact:
            return any(not c for c in self.coeffs)
        return any(abs(c) < 1e-8 for c in self.coeffs)

    def numeric(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=complex)

    def conj(self) -> Balance:
        if self.exact:
            return Balance(self.exponents, tuple(c.conj() for c in self.coeffs), True)
        return Balance(self.exponents, tuple(complex(c).conjugate() for c in self.coeffs), False)

    def __str__(self) -> str:
        return "{" + ", ".join(str(c) for c in self.coeffs) + "}"


@dataclass(frozen=True)
class BalanceEquations:
    symbols: tuple[str, ...]
    polys: tuple[ParamPoly, ...]
    exponents: tuple[Fraction, ...]

    def bezout_bound(self) -> int:
        out = 1
        for p in self.polys:
            out *= max(p.total_degree(), 1)
        return out


def coeff_symbols(sys: ODESystem) -> tuple[str, ...]:
    return tuple(f"c_{v}" for v in sys.var_names)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------


def dominant_exponents(sys: ODESystem) -> tuple[Fraction, ...]:
    """Unique exponent vector making every term of every equation equally weighted.

    A monomial ``prod x_j**a_j * x_j'**b_j`` in ``F_i`` carries weight
    ``sum a_j p_j + b_j (p_j - 1)``, which must equal ``p_i - 2``.
    """
    n = sys.n
    rows = []
    for i, f in enumerate(sys.rhs):
        for mono in f.terms:
            row = [Fraction(0)] * n
            for j in range(n):
                row[j] += mono[j] + mono[n + j]
            row[i] -= 1
            rhs = Fraction(sum(mono[n:])) - 2
            rows.append(row + [rhs])
    if not rows:
        raise DominantBalanceError("system has no terms; every exponent is admissible")
    reduced, pivots = rref(rows)
    if n in pivots:
        raise DominantBalanceError(
            "no exponent vector balances all terms; subdominant balances are not analysed"
        )
    if len(pivots) < n:
        free = [sys.var_names[j] for j in range(n) if j not in pivots]
        raise DominantBalanceError(f"exponents of {free} are not fixed by the all-terms-dominant condition")
    p = [Fraction(0)] * n
    for row, piv in zip(reduced, pivots):
        val = row[n]
        if not val.is_rational():
            raise DominantBalanceError("non-rational exponent")
        p[piv] = val.re
    return tuple(p)


def dominant_part(sys: ODESystem, i: int, p: Sequence[Fraction]) -> ParamPoly:
    """Terms of ``F_i`` whose weight equals ``p_i - 2`` under exponents ``p``."""
    f = sys.rhs[i]
    n = sys.n
    keep = {}
    for mono, c in f.terms.items():
        weight = sum(Fraction(mono[j]) * p[j] + Fraction(mono[n + j]) * (p[j] - 1) for j in range(n))
        if weight == p[i] - 2:
            keep[mono] = c
    return ParamPoly(f.variables, keep)


# ---------------------------------------------------------------------------
# leading-order equations
# ---------------------------------------------------------------------------


def leading_order_equations(sys: ODESystem, p: Sequence[Fraction] | None = None) -> BalanceEquations:
    """``p_i (p_i - 1) c_i - F_i(c, p*c) = 0`` for each equation."""
    if p is None:
        p = dominant_exponents(sys)
    p = tuple(Fraction(x) for x in p)
    symbols = coeff_symbols(sys)
    cs = [ParamPoly.var(s, symbols) for s in symbols]
    subst = {}
    for j, v in enumerate(sys.var_names):
        subst[v] = cs[j]
        subst[v + "'"] = cs[j].scale(FieldElem(p[j]))
    polys = []
    for i in range(sys.n):
        f = dominant_part(sys, i, p)
        lhs = cs[i].scale(FieldElem(p[i] * (p[i] - 1)))
        polys.append((lhs - f.substitute(subst)).extend(symbols))
    return BalanceEquations(symbols, tuple(polys), p)


def verify_balance(eqs: BalanceEquations, cand: Balance | Sequence) -> tuple[FieldElem, ...]:
    coeffs = cand.coeffs if isinstance(cand, Balance) else tuple(cand)
    values = dict(zip(eqs.symbols, coeffs))
    return tuple(poly.evaluate(values) for poly in eqs.polys)


def is_balance(eqs: BalanceEquations, cand: Balance | Sequence) -> bool:
    return all(not r for r in verify_balance(eqs, cand))


# ---------------------------------------------------------------------------
# numeric enumeration
# ---------------------------------------------------------------------------


class _Compiled:
    """Batched complex evaluation of a polynomial system and its Jacobian."""

    def __init__(self, eqs: BalanceEquations):
        self.n = len(eqs.symbols)
        self.funcs = [self._compile(p) for p in eqs.polys]
        self.jac = [[self._compile(p.diff(s)) for s in eqs.symbols] for p in eqs.polys]

    @staticmethod
    def _compile(p: ParamPoly):
        if not p.terms:
            return np.zeros(0, dtype=complex), np.zeros((0, len(p.variables)), dtype=int)
        coeffs = np.array([c.to_complex() for c in p.terms.values()], dtype=complex)
        exps = np.array(list(p.terms.keys()), dtype=int)
        return coeffs, exps

    @staticmethod
    def _eval(compiled, x: np.ndarray) -> np.ndarray:
        coeffs, exps = compiled
        out = np.zeros(x.shape[0], dtype=complex)
        for c, e in zip(coeffs, exps):
            out += c * np.prod(x ** e, axis=1)
        return out

    def f(self, x: np.ndarray) -> np.ndarray:
        return np.stack([self._eval(c, x) for c in self.funcs], axis=1)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.stack([np.stack([self._eval(c, x) for c in row], axis=1) for row in self.jac], axis=1)


def _newton_step(comp: _Compiled, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    fx = comp.f(x)
    jx = comp.jacobian(x)
    step = np.full_like(x, np.nan)
    with np.errstate(all="ignore"):
        det = np.abs(np.linalg.det(jx))
    ok = np.isfinite(det) & (det > 1e-14)
    if np.any(ok):
        step[ok] = np.linalg.solve(jx[ok], fx[ok][..., None])[..., 0]
    return step, fx


def _deflation_gradient(x: np.ndarray, roots: list[np.ndarray], direction: np.ndarray) -> np.ndarray:
    """Log-gradient of the holomorphic deflation operator prod(1/(a.(x - r))**2 + 1)."""
    grad = np.zeros_like(x)
    for r in roots:
        ad = (x - r) @ direction
        ad = np.where(np.abs(ad) < 1e-300, 1e-300, ad)
        m = 1.0 / ad**2 + 1.0
        grad += (-2.0 / ad**3 / m)[:, None] * direction[None, :]
    return grad


@dataclass
class EnumerationResult:
    balances: list[Balance]
    bezout: int
    starts: int
    warnings: list[str] = field(default_factory=list)


def enumerate_balances_numeric(
    eqs: BalanceEquations,
    starts: int = 10_000,
    tol: float = 1e-12,
    max_iter: int = 100,
    seed: int = 0,
    cluster_tol: float = 1e-8,
    radius: float = 3.0,
    deflation_starts: int = 200,
) -> EnumerationResult:
    """Multi-start Newton with clustering, then deflated restarts if short.

    Starts are uniform in the complex ball of the given radius (per
    coordinate modulus).  Converged points are clustered at
    ``cluster_tol`` after a deterministic sort.
    """
    comp = _Compiled(eqs)
    n = comp.n
    rng = np.random.default_rng(seed)
    x0 = _random_ball(rng, starts, n, radius)
    roots = _cluster(_run_newton(comp, x0, tol, max_iter), cluster_tol)

    bezout = eqs.bezout_bound()
    if len(roots) < bezout and deflation_starts:
        direction = _random_ball(rng, 1, n, 1.0)[0]
        misses = 0
        while len(roots) < bezout and misses < 5:
            x1 = _random_ball(rng, deflation_starts, n, radius)
            new = _run_deflated(comp, x1, roots, tol, max_iter, direction)
            if new is None:
                misses += 1
                continue
            roots = _cluster(roots + [new], cluster_tol)

    notes = []
    if len(roots) < bezout:
        msg = f"found {len(roots)} of at most {bezout} balances after {starts} starts"
        warnings.warn(msg, BalanceCountWarning, stacklevel=2)
        notes.append(msg)
    balances = [Balance(eqs.exponents, tuple(complex(c) for c in r), exact=False) for r in roots]
    return EnumerationResult(balances, bezout, starts, notes)


def _random_ball(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    mod = radius * np.sqrt(rng.random((count, n)))
    arg = 2 * np.pi * rng.random((count, n))
    return mod * np.exp(1j * arg)


def _run_newton(comp: _Compiled, x: np.ndarray, tol: float, max_iter: int) -> list[np.ndarray]:
    x = x.copy()
    active = np.ones(x.shape[0], dtype=bool)
    done = np.zeros(x.shape[0], dtype=bool)
    for _ in range(max_iter):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        step, _ = _newton_step(comp, x[idx])
        bad = ~np.all(np.isfinite(step), axis=1)
        x[idx[~bad]] -= step[~bad]
        size = np.linalg.norm(step, axis=1)
        conv = ~bad & (size <= tol * np.maximum(1.0, np.linalg.norm(x[idx], axis=1)))
        diverged = bad | (np.linalg.norm(x[idx], axis=1) > 1e6)
        done[idx[conv]] = True
        active[idx[conv | diverged]] = False
    x = x[done]
    # two polishing steps on converged points
    for _ in range(2):
        if x.size == 0:
            break
        step, _ = _newton_step(comp, x)
        good = np.all(np.isfinite(step), axis=1)
        x[good] -= step[good]
    fx = comp.f(x) if x.size else np.zeros((0, comp.n))
    keep = np.linalg.norm(fx, axis=1) <= 1e-9
    return [row for row in x[keep]]


def _run_deflated(comp: _Compiled, x0: np.ndarray, roots, tol: float, max_iter: int, direction: np.ndarray):
    """Newton on F deflated at known roots; returns one new root or None."""
    x = x0.copy()
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            step, _ = _newton_step(comp, x)
            denom = 1.0 - np.sum(_deflation_gradient(x, roots, direction) * step, axis=1)
            good = np.all(np.isfinite(step), axis=1) & (np.abs(denom) > 1e-14)
            x[good] -= step[good] / denom[good, None]
            x[~good] = np.nan
            x[np.linalg.norm(x, axis=1) > 1e6] = np.nan
    finite = np.all(np.isfinite(x), axis=1)
    cands = _run_newton(comp, x[finite], tol, 10)
    for c in cands:
        if all(np.linalg.norm(c - r) > 1e-6 for r in roots):
            return c
    return None


def _cluster(points: list[np.ndarray], tol: float) -> list[np.ndarray]:
    pts = sorted(points, key=lambda p: tuple(np.round(np.concatenate([p.real, p.imag]), 6)))
    groups: list[list[np.ndarray]] = []
    for p in pts:
        for g in groups:
            if np.linalg.norm(g[0] - p) <= tol * max(1.0, np.linalg.norm(p)):
                g.append(p)
                break
        else:
            groups.append([p])
    reps = [np.mean(g, axis=0) for g in groups]
    reps.sort(key=lambda p: tuple(np.round(np.concatenate([p.real, p.imag]), 8)))
    return reps


# ---------------------------------------------------------------------------
# exact recognition and the fixture table
# ---------------------------------------------------------------------------


def recognize_exact(eqs: BalanceEquations, bal: Balance, max_den: int = 1000) -> Balance | None:
    """Snap a numeric balance to Q(w) and keep it only if it verifies exactly."""
    coeffs = []
    for c in bal.coeffs:
        q = from_complex(complex(c), max_den=max_den, tol=1e-8)
        if q is None:
            return None
        coeffs.append(q)
    exact = Balance(bal.exponents, tuple(coeffs), True, bal.label)
    return exact if is_balance(eqs, exact) else None


def balance_from_row(row: TableRow) -> Balance:
    return Balance((Fraction(-1),) * 3, row.coeffs, True, row.label)


def table1_balances() -> list[Balance]:
    """The 27 exact balances of the fixture system, in printed order."""
    return [balance_from_row(row) for row in TABLE_I]


def match_numeric_to_exact(
    numeric: Sequence[Balance], exact: Sequence[Balance], tol: float = 1e-10
) -> tuple[list[tuple[int, int, float]], list[int], list[int]]:
    """One-to-one matching within ``tol``; returns (pairs, unmatched numeric, unmatched exact)."""
    pairs = []
    used: set[int] = set()
    unmatched = []
    ex = [b.numeric() for b in exact]
    for i, b in enumerate(numeric):
        v = b.numeric()
        dists = [(float(np.max(np.abs(v - e))), j) for j, e in enumerate(ex) if j not in used]
        if not dists:
            unmatched.append(i)
            continue
        d, j = min(dists)
        if d <= tol:
            pairs.append((i, j, d))
            used.add(j)
        else:
            unmatched.append(i)
    return pairs, unmatched, [j for j in range(len(exact)) if j not in used]


__all__ = [
    "Balance",
    "BalanceCountWarning",
    "BalanceEquations",
    "DominantBalanceError",
    "EnumerationResult",
    "balance_from_row",
    "dominant_part",
    "coeff_symbols",
    "dominant_exponents",
    "enumerate_balances_numeric",
    "is_balance",
    "leading_order_equations",
    "match_numeric_to_exact",
    "recognize_exact",
    "table1_balances",
    "verify_balance",
]
