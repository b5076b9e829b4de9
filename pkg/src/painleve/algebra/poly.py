"""Sparse multivariate polynomials and univariate polynomials over Q(w)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .field import ONE, ZERO, FieldElem

Monomial = tuple[int, ...]


def _coerce(c) -> FieldElem:
    return c if isinstance(c, FieldElem) else FieldElem.coerce(c)


class ParamPoly:
    """Polynomial over Q(w) in an ordered tuple of named variables.

    Terms are stored as ``{exponent tuple: coefficient}`` with no zero
    coefficients.  Operations between polynomials over different variable
    tuples first extend both to the union (left operand's order first).
    Equality ignores variables that do not occur.
    """

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str], terms: Mapping[Monomial, object] | None = None):
        self.variables: tuple[str, ...] = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variables in {self.variables}")
        n = len(self.variables)
        clean: dict[Monomial, FieldElem] = {}
        for mono, c in (terms or {}).items():
            if len(mono) != n:
                raise ValueError(f"monomial {mono} does not match {n} variables")
            c = _coerce(c)
            if c:
                clean[tuple(mono)] = c
        self.terms = clean

    @classmethod
    def _from_clean(cls, variables: tuple[str, ...], terms: dict[Monomial, FieldElem]) -> ParamPoly:
        obj = object.__new__(cls)
        obj.variables = variables
        obj.terms = terms
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c, variables: Iterable[str] = ()) -> ParamPoly:
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def zero(cls, variables: Iterable[str] = ()) -> ParamPoly:
        return cls._from_clean(tuple(variables), {})

    @classmethod
    def var(cls, name: str, variables: Iterable[str] | None = None) -> ParamPoly:
        variables = tuple(variables) if variables is not None else (name,)
        if name not in variables:
            variables = variables + (name,)
        mono = tuple(1 if v == name else 0 for v in variables)
        return cls._from_clean(variables, {mono: ONE})

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self) -> FieldElem:
        return self.terms.get((0,) * len(self.variables), ZERO)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def degree_in(self, name: str) -> int:
        if name not in self.variables:
            return 0 if self.terms else -1
        i = self.variables.index(name)
        return max((m[i] for m in self.terms), default=-1)

    def used_variables(self) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.variables) if any(m[i] for m in self.terms))

    def named_terms(self) -> dict[tuple[tuple[str, int], ...], FieldElem]:
        out = {}
        for mono, c in self.terms.items():
            key = tuple(sorted((v, e) for v, e in zip(self.variables, mono) if e))
            out[key] = c
        return out

    def extend(self, variables: Iterable[str]) -> ParamPoly:
        """Re-express over ``variables`` (must contain every used variable)."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        index = {v: i for i, v in enumerate(variables)}
        n = len(variables)
        new: dict[Monomial, FieldElem] = {}
        for mono, c in self.terms.items():
            out = [0] * n
            for v, e in zip(self.variables, mono):
                if e:
                    if v not in index:
                        raise ValueError(f"variable {v!r} missing from {variables}")
                    out[index[v]] = e
            new[tuple(out)] = c
        return ParamPoly._from_clean(variables, new)

    def _aligned(self, other: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
        if self.variables == other.variables:
            return self, other
        merged = self.variables + tuple(v for v in other.variables if v not in self.variables)
        return self.extend(merged), other.extend(merged)

    def _lift(self, other) -> ParamPoly | None:
        if isinstance(other, ParamPoly):
            return other
        try:
            c = _coerce(other)
        except TypeError:
            return None
        return ParamPoly.constant(c, self.variables)

    # -- ring operations ----------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        a, b = self._aligned(other)
        terms = dict(a.terms)
        for mono, c in b.terms.items():
            s = terms.get(mono)
            if s is None:
                terms[mono] = c
            else:
                s = s + c
                if s:
                    terms[mono] = s
                else:
                    del terms[mono]
        return ParamPoly._from_clean(a.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> ParamPoly:
        return ParamPoly._from_clean(self.variables, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> ParamPoly:
        c = _coerce(c)
        if not c:
            return ParamPoly._from_clean(self.variables, {})
        if c == ONE:
            return self
        return ParamPoly._from_clean(self.variables, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (FieldElem, int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        a, b = self._aligned(other)
        if not a.terms or not b.terms:
            return ParamPoly._from_clean(a.variables, {})
        terms: dict[Monomial, FieldElem] = {}
        get = terms.get
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                mono = tuple(x + y for x, y in zip(m1, m2))
                prev = get(mono)
                terms[mono] = c1 * c2 if prev is None else prev + c1 * c2
        return ParamPoly._from_clean(a.variables, {m: c for m, c in terms.items() if c})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int) -> ParamPoly:
        if not isinstance(n, int) or n < 0:
            raise ValueError("ParamPoly powers must be non-negative integers")
        result = ParamPoly.constant(ONE, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        c = _coerce(other)
        return self.scale(c.inverse())

    # -- calculus / evaluation ----------------------------------------------
    def diff(self, name: str) -> ParamPoly:
        if name not in self.variables:
            return ParamPoly._from_clean(self.variables, {})
        i = self.variables.index(name)
        terms = {}
        for mono, c in self.terms.items():
            e = mono[i]
            if e:
                new = list(mono)
                new[i] = e - 1
                terms[tuple(new)] = c * e
        return ParamPoly._from_clean(self.variables, terms)

    def evaluate(self, values: Mapping[str, object]) -> FieldElem:
        """Exact evaluation; every used variable must be given a field value."""
        vals = [_coerce(values[v]) if v in values else None for v in self.variables]
        total = ZERO
        for mono, c in self.terms.items():
            term = c
            for v, e, val in zip(self.variables, mono, vals):
                if e:
                    if val is None:
                        raise KeyError(f"no value for variable {v!r}")
                    term = term * val**e
            total = total + term
        return total

    def evaluate_numeric(self, values: Mapping[str, complex]) -> complex:
        total = 0j
        for mono, c in self.terms.items():
            term = c.to_complex()
            for v, e in zip(self.variables, mono):
                if e:
                    term *= complex(values[v]) ** e
            total += term
        return total

    def substitute(self, mapping: Mapping[str, object]) -> ParamPoly:
        """Replace variables by polynomials (or field constants).

        Unmapped variables are kept.
        """
        images = {}
        for v in self.variables:
            if v in mapping:
                img = mapping[v]
                images[v] = img if isinstance(img, ParamPoly) else ParamPoly.constant(img)
            else:
                images[v] = ParamPoly.var(v)
        result = ParamPoly.zero(tuple(v for v in self.variables if v not in mapping))
        for mono, c in self.terms.items():
            term = ParamPoly.constant(c)
            for v, e in zip(self.variables, mono):
                if e:
                    term = term * images[v] ** e
            result = result + term
        return result

    # -- comparison / display ----------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, ParamPoly):
            if self.variables == other.variables:
                return self.terms == other.terms
            return self.named_terms() == other.named_terms()
        try:
            c = _coerce(other)
        except TypeError:
            return NotImplemented
        return self == ParamPoly.constant(c, self.variables)

    def __hash__(self) -> int:
        return hash(frozenset(self.named_terms().items()))

    def sorted_terms(self) -> list[tuple[Monomial, FieldElem]]:
        """Terms in graded-lexicographic order, highest first."""
        return sorted(self.terms.items(), key=lambda mc: (sum(mc[0]), mc[0]), reverse=True)

    def __iter__(self) -> Iterator[tuple[Monomial, FieldElem]]:
        return iter(self.sorted_terms())

    def __repr__(self) -> str:
        return f"ParamPoly({self.variables!r}, {str(self)!r})"

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        """Canonical text: used variables sorted by name, terms in graded-lex order."""
        if not self.terms:
            return "0"
        canon = self.extend(tuple(sorted(self.used_variables())))
        pieces: list[str] = []
        for mono, c in canon.sorted_terms():
            factors = [v if e == 1 else f"{v}^{e}" for v, e in zip(canon.variables, mono) if e]
            neg = False
            if c.is_rational() and c.re < 0:
                neg, c = True, -c
            elif not c.re and c.om < 0:
                neg, c = True, -c
            if not factors:
                body = str(c)
            elif c == ONE:
                body = "*".join(factors)
            else:
                cs = str(c) if c.is_atomic_text() else f"({c})"
                body = "*".join([cs] + factors)
            if not pieces:
                pieces.append(f"-{body}" if neg else body)
            else:
                pieces.append(f" - {body}" if neg else f" + {body}")
        return "".join(pieces)


class PolyInS:
    """Univariate polynomial in the resonance symbol ``s`` over Q(w)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[object] = ()):
        cs = [_coerce(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs: tuple[FieldElem, ...] = tuple(cs)

    @classmethod
    def s(cls) -> PolyInS:
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Iterable[object]) -> PolyInS:
        p = cls([1])
        for r in roots:
            p = p * cls([-_coerce(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading(self) -> FieldElem:
        return self.coeffs[-1] if self.coeffs else ZERO

    def _lift(self, other) -> PolyInS | None:
        if isinstance(other, PolyInS):
            return other
        try:
            return PolyInS([_coerce(other)])
        except TypeError:
            return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (n - len(other.coeffs))
        return PolyInS(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> PolyInS:
        return PolyInS(-c for c in self.coeffs)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return PolyInS()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return PolyInS(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> PolyInS:
        result = PolyInS([1])
        for _ in range(n):
            result = result * self
        return result

    def __call__(self, x):
        if isinstance(x, (FieldElem, int, Fraction)):
            acc = ZERO
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c.to_complex()
        return acc

    def divmod_linear(self, root) -> tuple[PolyInS, FieldElem]:
        """Synthetic division by ``(s - root)``; returns (quotient, remainder)."""
        root = _coerce(root)
        if not self.coeffs:
            return PolyInS(), ZERO
        acc = ZERO
        out = []
        for c in reversed(self.coeffs):
            acc = acc * root + c
            out.append(acc)
        remainder = out.pop()
        return PolyInS(reversed(out)), remainder

    def derivative(self) -> PolyInS:
        return PolyInS(c * i for i, c in enumerate(self.coeffs) if i)

    def to_complex_coeffs(self) -> list[complex]:
        """Coefficients lowest power first, embedded in C."""
        return [c.to_complex() for c in self.coeffs]

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"PolyInS({str(self)!r})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        names = ("s",)
        terms = {(i,): c for i, c in enumerate(self.coeffs)}
        return ParamPoly(names, terms).to_text()
