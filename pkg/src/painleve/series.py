"""Truncated Laurent expansions about a movable singularity.

A series stores, for every variable ``x_i``, coefficients ``c_{i,k}`` with
``x_i = sum_k c_{i,k} tau**(p_i + k)`` and ``tau = t - t0``.  Ascending
series run over ``k = 0, 1, 2, ...``; descending ones over
``k = 0, -1, -2, ...``.  Coefficients are ParamPoly values in the arbitrary
constants injected at resonance orders.

At order ``k`` the recursion reads ``M(k) c_k = R_k`` where ``M`` is the
resonance matrix and ``R_k`` collects everything at that order built from
lower-order coefficients.  When ``M(k)`` is singular the system is
solvable only if the transformed right-hand side vanishes on the zero rows
(compatibility); the null space then supplies fresh arbitrary constants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import FieldElem, ParamPoly, null_space, solve_affine
from .balance import DominantBalanceError
from .resonance import BranchClass, ResonanceReport, build_resonance_matrix
from .system import ODESystem

#: returned by :func:`series_residual_order` when the residual vanishes identically
RESIDUAL_ZERO = math.inf

DEFAULT_MAX_ORDER = 8


class SeriesKind(str, enum.Enum):
    ASCENDING = "Ascending"
    DESCENDING = "Descending"


class SeriesDirectionWarning(UserWarning):
    """A series was requested in a direction the branch class does not predict."""


@dataclass(frozen=True)
class CompatibilityResult:
    order: int
    consistent: bool
    obstruction: tuple[ParamPoly, ...]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "consistent": self.consistent,
            "obstruction": [p.to_text() for p in self.obstruction],
        }


@dataclass
class LaurentSeries:
    kind: SeriesKind
    var_names: tuple[str, ...]
    exponents: tuple[Fraction, ...]
    coeffs: list[tuple[ParamPoly, ...]]  # entry j holds order sign*j
    injected: dict[int, list[str]] = field(default_factory=dict)
    t0_symbol: str = "t0"
    pinned: dict[int, int] = field(default_factory=dict)
    halted_at: int | None = None  # order of a failed compatibility check

    @property
    def sign(self) -> int:
        return 1 if self.kind is SeriesKind.ASCENDING else -1

    @property
    def base_exponent(self) -> Fraction:
        """Common leading exponent (the smallest one when they differ)."""
        return min(self.exponents)

    @property
    def last_order(self) -> int:
        return self.sign * (len(self.coeffs) - 1)

    def orders(self) -> list[int]:
        return [self.sign * j for j in range(len(self.coeffs))]

    def coefficient(self, order: int) -> tuple[ParamPoly, ...]:
        j = self.sign * order
        if j < 0 or j >= len(self.coeffs):
            raise KeyError(order)
        return self.coeffs[j]

    def component(self, var: str) -> list[ParamPoly]:
        i = self.var_names.index(var)
        return [c[i] for c in self.coeffs]

    def symbols(self) -> list[str]:
        return [s for k in sorted(self.injected, key=abs) for s in self.injected[k]]

    def substitute(self, mapping: Mapping[str, object]) -> LaurentSeries:
        coeffs = [tuple(c.substitute(mapping) for c in row) for row in self.coeffs]
        return LaurentSeries(
            self.kind, self.var_names, self.exponents, coeffs, dict(self.injected),
            self.t0_symbol, dict(self.pinned), self.halted_at,
        )

    def truncate(self, last_order: int) -> LaurentSeries:
        steps = self.sign * last_order
        if steps < 0:
            raise ValueError("truncation order lies on the wrong side of the leading term")
        injected = {k: v for k, v in self.injected.items() if self.sign * k <= steps}
        return LaurentSeries(
            self.kind, self.var_names, self.exponents, list(self.coeffs[: steps + 1]), injected,
            self.t0_symbol, dict(self.pinned), self.halted_at,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "variables": list(self.var_names),
            "exponents": [str(p) for p in self.exponents],
            "t0_symbol": self.t0_symbol,
            "injected": {str(k): list(v) for k, v in sorted(self.injected.items(), key=lambda kv: abs(kv[0]))},
            "pinned": {str(k): v for k, v in sorted(self.pinned.items())},
            "halted_at": self.halted_at,
            "orders": [
                {
                    "order": k,
                    "coeffs": {v: c.to_text() for v, c in zip(self.var_names, row)},
                }
                for k, row in zip(self.orders(), self.coeffs)
            ],
        }


def symbol_name(order: int, index: int) -> str:
    """Fresh symbol for null direction ``index`` at resonance ``order``."""
    return f"r{order}_{index}" if order >= 0 else f"rm{-order}_{index}"


# ---------------------------------------------------------------------------
# recursion machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Term:
    coef: FieldElem
    factors: tuple[tuple[int, bool], ...]  # sorted (variable index, is derivative), repeated per power
    offset: int  # steps after the leading order at which the term first contributes


def _terms(sys: ODESystem, p: Sequence[Fraction], sign: int) -> list[list[_Term]]:
    n = sys.n
    slot = {v: (j, False) for j, v in enumerate(sys.var_names)}
    slot.update({v + "'": (j, True) for j, v in enumerate(sys.var_names)})
    out = []
    for i, f in enumerate(sys.rhs):
        row = []
        for mono, c in f.terms.items():
            factors = []
            weight = Fraction(0)
            for v, e in zip(f.variables, mono):
                if e:
                    j, d = slot[v]
                    factors.extend([(j, d)] * e)
                    weight += e * (p[j] - 1 if d else p[j])
            off = weight - (p[i] - 2)
            if off.denominator != 1:
                raise NotImplementedError("fractional order offsets would need Puiseux series")
            off = int(off)
            if off < 0:
                raise DominantBalanceError(f"term {mono} of equation {i} dominates the balance exponents")
            if sign < 0 and off != 0:
                raise ValueError(
                    "descending series need every term to have the balance weight; "
                    f"equation {sys.var_names[i]} has a term {off} orders below it"
                )
            row.append(_Term(c, tuple(sorted(factors)), off))
        out.append(row)
    del n
    return out


class _Products:
    """Coefficients of products of truncated series, memoised by factor signature.

    A signature is a sorted tuple of ``(variable index, is derivative)``
    slots.  Coefficients up to ``final`` only involve settled series entries
    and are cached; later ones are recomputed on every request.
    """

    def __init__(self, lookup, zero: ParamPoly):
        self.lookup = lookup
        self.zero = zero
        self.store: dict[tuple, list[ParamPoly]] = {}
        self.final = -1

    def coeff(self, sig: tuple, m: int) -> ParamPoly:
        if m < 0:
            return self.zero
        if len(sig) == 1:
            f = self.lookup(sig[0])
            return f[m] if m < len(f) else self.zero
        if m <= self.final:
            cached = self.store.setdefault(sig, [])
            while len(cached) <= m:
                cached.append(self._compute(sig, len(cached)))
            return cached[m]
        return self._compute(sig, m)

    def _compute(self, sig: tuple, m: int) -> ParamPoly:
        head, last = sig[:-1], self.lookup(sig[-1])
        total = self.zero
        for b in range(min(m, len(last) - 1) + 1):
            w = last[b]
            if not w:
                continue
            u = self.coeff(head, m - b)
            if u:
                total = total + u * w
        return total


def _product_full(factors: Sequence[Sequence[ParamPoly]], zero: ParamPoly) -> list[ParamPoly]:
    acc = list(factors[0])
    for f in factors[1:]:
        new = [zero] * (len(acc) + len(f) - 1)
        for a, u in enumerate(acc):
            if not u:
                continue
            for b, w in enumerate(f):
                if w:
                    new[a + b] = new[a + b] + u * w
        acc = new
    return acc


def _build(
    sys: ODESystem,
    report: ResonanceReport,
    steps: int,
    sign: int,
    assign: Mapping[str, object] | None,
) -> tuple[LaurentSeries, list[CompatibilityResult]]:
    bal = report.balance
    if not bal.exact:
        raise TypeError("series construction needs an exact balance")
    if steps < 0:
        raise ValueError("series length must be non-negative")
    matrix = report.matrix if report.matrix.entries else build_resonance_matrix(sys, bal)
    p = tuple(Fraction(x) for x in bal.exponents)
    n = sys.n
    terms = _terms(sys, p, sign)

    # one shared variable tuple keeps ParamPoly arithmetic alignment-free
    ring: list[str] = []
    for k, root in sorted(report.integer_resonances().items(), key=lambda kr: abs(kr[0])):
        if k != 0 and (k > 0) == (sign > 0) and abs(k) <= steps:
            ring.extend(symbol_name(k, j) for j in range(root.geo_mult))
    ring_t = tuple(ring)
    zero = ParamPoly.zero(ring_t)
    assign = dict(assign or {})

    def const(c: FieldElem) -> ParamPoly:
        return ParamPoly.constant(c, ring_t)

    X: list[list[ParamPoly]] = [[const(c)] for c in bal.coeffs]
    D: list[list[ParamPoly]] = [[const(c * FieldElem(p[i]))] for i, c in enumerate(bal.coeffs)]
    injected: dict[int, list[str]] = {}
    compat: list[CompatibilityResult] = []
    halted = None

    products = _Products(lambda slot: D[slot[0]] if slot[1] else X[slot[0]], zero)
    for s in range(1, steps + 1):
        k = sign * s
        for i in range(n):
            X[i].append(zero)
            D[i].append(zero)
        products.final = s - 1
        rhs = []
        for i in range(n):
            total = zero
            for t in terms[i]:
                idx = s - t.offset
                if idx < 0:
                    continue
                if not t.factors:
                    c = const(t.coef) if idx == 0 else zero
                else:
                    c = products.coeff(t.factors, idx).scale(t.coef)
                total = total + c
            rhs.append(total)
        m_k = matrix.at(FieldElem(k))
        particular, obstruction = solve_affine(m_k, rhs, zero)
        if obstruction:
            ok = all(not o for o in obstruction)
            compat.append(CompatibilityResult(k, ok, tuple(obstruction)))
            if not ok:
                halted = k
                for i in range(n):
                    X[i].pop()
                    D[i].pop()
                break
            names = []
            for j, vec in enumerate(null_space(m_k)):
                name = symbol_name(k, j)
                names.append(name)
                amp = const(FieldElem.coerce(assign[name])) if name in assign else ParamPoly.var(name, ring_t)
                particular = [u + amp.scale(c) for u, c in zip(particular, vec)]
            injected[k] = names
        for i in range(n):
            X[i][s] = particular[i]
            D[i][s] = particular[i].scale(FieldElem(p[i] + k))

    coeffs = [tuple(X[i][s] for i in range(n)) for s in range(len(X[0]))]
    kind = SeriesKind.ASCENDING if sign > 0 else SeriesKind.DESCENDING
    series = LaurentSeries(kind, sys.var_names, p, coeffs, injected, halted_at=halted)
    return series, compat


def build_right_series(
    sys: ODESystem,
    report: ResonanceReport,
    max_order: int = DEFAULT_MAX_ORDER,
    assign: Mapping[str, object] | None = None,
    force: bool = False,
) -> tuple[LaurentSeries, list[CompatibilityResult]]:
    """Ascending series through ``tau**(p + max_order)``.

    ``assign`` replaces named injected constants by field values at the moment
    they are introduced.  Building the ascending half of a branch that is not
    classified RightSeries requires ``force=True``.
    """
    if report.branch_class is not BranchClass.RIGHT and not force:
        raise ValueError(f"branch is {report.branch_class.value}; pass force=True to build the ascending half")
    return _build(sys, report, max_order, 1, assign)


def build_left_series(
    sys: ODESystem,
    report: ResonanceReport,
    max_depth: int = DEFAULT_MAX_ORDER,
    pinned: Mapping[int, int] | None = None,
    assign: Mapping[str, object] | None = None,
) -> LaurentSeries:
    """Descending series through ``tau**(p - max_depth)``.

    Constants belonging to positive resonances cannot appear in a descending
    expansion, so they are set to zero.  ``pinned`` maps each positive
    resonance to the number of its constants set to zero; it defaults to all
    of them and is validated against the geometric multiplicities.
    """
    negative = [k for k in report.integer_resonances() if k < 0]
    nongeneric = sum(report.integer_resonances()[k].alg_mult for k in negative) - 1
    if nongeneric <= 0:
        raise ValueError("a descending series needs negative non-generic resonances")
    positive = {k: r.geo_mult for k, r in report.integer_resonances().items() if k > 0}
    if pinned is None:
        pinned = positive
    pinned = dict(pinned)
    if pinned != positive:
        raise ValueError(f"pinned constants {pinned} must cover every positive resonance {positive}")
    series, compat = _build(sys, report, max_depth, -1, assign)
    series.pinned = pinned
    series.compatibility = compat  # type: ignore[attr-defined]
    return series


# ---------------------------------------------------------------------------
# verification and evaluation
# ---------------------------------------------------------------------------


def series_residual(sys: ODESystem, series: LaurentSeries) -> list[dict[Fraction, ParamPoly]]:
    """Exact expansion of ``x_i'' - F_i`` for the truncated series, per equation.

    Each entry maps an absolute power of ``tau`` to its nonzero coefficient.
    """
    p = series.exponents
    sign = series.sign
    n = len(series.var_names)
    if n != sys.n:
        raise ValueError("series and system have different dimensions")
    variables: tuple[str, ...] = ()
    for row in series.coeffs:
        for c in row:
            variables = variables + tuple(v for v in c.variables if v not in variables)
    zero = ParamPoly.zero(variables)
    X = [[row[i].extend(variables) for row in series.coeffs] for i in range(n)]
    D = [[c.scale(FieldElem(p[i] + sign * s)) for s, c in enumerate(X[i])] for i in range(n)]
    slot = {v: (j, False) for j, v in enumerate(sys.var_names)}
    slot.update({v + "'": (j, True) for j, v in enumerate(sys.var_names)})
    out = []
    for i, f in enumerate(sys.rhs):
        acc: dict[Fraction, ParamPoly] = {}

        def add(power: Fraction, c: ParamPoly) -> None:
            if c:
                acc[power] = acc.get(power, zero) + c

        for s, c in enumerate(X[i]):
            e = p[i] + sign * s
            add(e - 2, c.scale(FieldElem(e * (e - 1))))
        for mono, coef in f.terms.items():
            factors, weight = [], Fraction(0)
            for v, e in zip(f.variables, mono):
                if e:
                    j, d = slot[v]
                    factors.extend([D[j] if d else X[j]] * e)
                    weight += e * (p[j] - 1 if d else p[j])
            prod = _product_full(factors, zero) if factors else [ParamPoly.constant(FieldElem(1), variables)]
            for s, c in enumerate(prod):
                add(weight + sign * s, -c.scale(coef))
        out.append({k: v for k, v in acc.items() if v})
    return out


def series_residual_order(sys: ODESystem, series: LaurentSeries) -> int | Fraction | float:
    """Leading power of ``tau`` left in the residual after substitution.

    For an ascending series that is the lowest power with a nonzero
    coefficient; for a descending series, where ``tau`` is large, it is the
    highest.  Returns :data:`RESIDUAL_ZERO` when the residual vanishes.
    """
    lead = _leading_residual_power(sys, series)
    if lead is None:
        powers = [k for eq in series_residual(sys, series) for k in eq]
        if not powers:
            return RESIDUAL_ZERO
        lead = min(powers) if series.sign > 0 else max(powers)
    elif lead is RESIDUAL_ZERO:
        return RESIDUAL_ZERO
    return int(lead) if lead.denominator == 1 else lead


def _leading_residual_power(sys: ODESystem, series: LaurentSeries):
    """Scan residual orders outward from the leading one, stopping at the first nonzero.

    Returns None when some term sits a fractional number of orders away, in
    which case the caller falls back to the full expansion.
    """
    p = series.exponents
    sign = series.sign
    n = len(series.var_names)
    if n != sys.n:
        raise ValueError("series and system have different dimensions")
    variables: tuple[str, ...] = ()
    for row in series.coeffs:
        for c in row:
            variables = variables + tuple(v for v in c.variables if v not in variables)
    zero = ParamPoly.zero(variables)
    length = len(series.coeffs)
    X = [[row[i].extend(variables) for row in series.coeffs] for i in range(n)]
    D = [[c.scale(FieldElem(p[i] + sign * s)) for s, c in enumerate(X[i])] for i in range(n)]
    products = _Products(lambda slot: D[slot[0]] if slot[1] else X[slot[0]], zero)
    products.final = math.inf
    slot = {v: (j, False) for j, v in enumerate(sys.var_names)}
    slot.update({v + "'": (j, True) for j, v in enumerate(sys.var_names)})
    best = None
    for i, f in enumerate(sys.rhs):
        base = p[i] - 2
        terms = []
        for mono, coef in f.terms.items():
            factors, weight = [], Fraction(0)
            for v, e in zip(f.variables, mono):
                if e:
                    j, d = slot[v]
                    factors.extend([(j, d)] * e)
                    weight += e * (p[j] - 1 if d else p[j])
            off = sign * (weight - base)
            if off.denominator != 1:
                return None
            span = (length - 1) * len(factors) + 1
            terms.append((coef, tuple(sorted(factors)), int(off), span))
        lo = min([0] + [t[2] for t in terms])
        hi = max([length - 1] + [t[2] + t[3] - 1 for t in terms])
        for s in range(lo, hi + 1):
            e = p[i] + sign * s
            total = X[i][s].scale(FieldElem(e * (e - 1))) if 0 <= s < length else zero
            for coef, factors, off, span in terms:
                idx = s - off
                if idx < 0 or idx >= span:
                    continue
                if not factors:
                    total = total - ParamPoly.constant(coef, variables)
                else:
                    total = total - products.coeff(factors, idx).scale(coef)
            if total:
                power = base + sign * s
                if best is None or sign * (power - best) < 0:
                    best = power
                break
    return RESIDUAL_ZERO if best is None else best


def guaranteed_residual_order(series: LaurentSeries) -> Fraction:
    """Bound that the residual order must exceed (ascending) or undercut (descending)."""
    return series.last_order + (series.base_exponent - 2)


def evaluate_series(
    series: LaurentSeries,
    param_values: Mapping[str, complex],
    t0: complex,
    t: complex,
    derivatives: int = 0,
) -> tuple[complex, ...] | tuple[tuple[complex, ...], ...]:
    """Numeric value of the truncation at ``t``.

    With ``derivatives=0`` returns one value per variable.  Otherwise returns
    a tuple ``(values, first derivatives, ...)`` up to the requested order.
    """
    tau = complex(t) - complex(t0)
    if tau == 0:
        raise ZeroDivisionError("series evaluated at its singularity")
    sign = series.sign
    results = [[0j] * len(series.var_names) for _ in range(derivatives + 1)]
    for i, p in enumerate(series.exponents):
        nums = [c[i].evaluate_numeric(param_values) for c in series.coeffs]
        if derivatives == 0:
            # Horner in tau (ascending) or 1/tau (descending)
            z = tau if sign > 0 else 1 / tau
            acc = 0j
            for c in reversed(nums):
                acc = acc * z + c
            results[0][i] = acc * tau ** complex(p) if p.denominator != 1 else acc * tau ** int(p)
            continue
        for s, c in enumerate(nums):
            if not c:
                continue
            e = p + sign * s
            falling = Fraction(1)
            for d in range(derivatives + 1):
                power = e - d
                tp = tau ** int(power) if power.denominator == 1 else tau ** complex(power)
                results[d][i] += complex(falling) * c * tp
                falling *= e - d
    if derivatives == 0:
        return tuple(results[0])
    return tuple(tuple(r) for r in results)
