"""Exact arithmetic in the quadratic field Q(w), w**2 = -3.

Every coefficient appearing in the leading-order analysis of the fixture
system lives in this field, so all golden checks can be made without any
floating point.  ``w`` embeds into the complex numbers as ``i*sqrt(3)``;
the primitive cube root of unity is ``(-1 + w)/2``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction

SQRT3 = math.sqrt(3.0)

#: default tolerance for every numeric (complex) equality test in the package
EPS_NUM = 1e-10


class FieldElem:
    """An element ``re + om*w`` of Q(w), immutable and hashable."""

    __slots__ = ("re", "om")

    re: Fraction
    om: Fraction

    def __init__(self, re: int | Fraction | str = 0, om: int | Fraction | str = 0) -> None:
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "om", Fraction(om))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElem is immutable")

    @classmethod
    def _raw(cls, re: Fraction, om: Fraction) -> FieldElem:
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "om", om)
        return obj

    @classmethod
    def coerce(cls, value) -> FieldElem:
        if isinstance(value, FieldElem):
            return value
        if isinstance(value, (int, Fraction, _RationalABC)):
            return cls._raw(Fraction(value), _ZERO_Q)
        if isinstance(value, str):
            return parse_field(value)
        raise TypeError(f"cannot coerce {value!r} to FieldElem")

    # -- predicates ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.re and not self.om

    def is_rational(self) -> bool:
        return not self.om

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        return FieldElem._raw(self.re + other.re, self.om + other.om)

    __radd__ = __add__

    def __neg__(self) -> FieldElem:
        return FieldElem._raw(-self.re, -self.om)

    def __pos__(self) -> FieldElem:
        return self

    def __sub__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        return FieldElem._raw(self.re - other.re, self.om - other.om)

    def __rsub__(self, other):
        return FieldElem.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, FieldElem):
            if isinstance(other, (int, Fraction)):
                return FieldElem._raw(self.re * other, self.om * other)
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.om, other.re, other.om
        if not b and not d:
            return FieldElem._raw(a * c, _ZERO_Q)
        return FieldElem._raw(a * c - 3 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def conj(self) -> FieldElem:
        return FieldElem._raw(self.re, -self.om)

    def norm(self) -> Fraction:
        """``self * conj(self)``, always a non-negative rational."""
        return self.re * self.re + 3 * self.om * self.om

    def inverse(self) -> FieldElem:
        n = self.norm()
        if not n:
            raise ZeroDivisionError("FieldElem division by zero")
        return FieldElem._raw(self.re / n, -self.om / n)

    def __truediv__(self, other):
        if not isinstance(other, FieldElem):
            try:
                other = FieldElem.coerce(other)
            except TypeError:
                return NotImplemented
        if not other.om:
            if not other.re:
                raise ZeroDivisionError("FieldElem division by zero")
            return FieldElem._raw(self.re / other.re, self.om / other.re)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return FieldElem.coerce(other) / self

    def __pow__(self, n: int) -> FieldElem:
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison / hashing ----------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.re == other.re and self.om == other.om
        if isinstance(other, (int, Fraction)):
            return not self.om and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        if not self.om:
            return hash(self.re)
        return hash((self.re, self.om))

    def sort_key(self) -> tuple[Fraction, Fraction]:
        return (self.re, self.om)

    # -- conversions --------------------------------------------------------
    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.om) * SQRT3)

    def __complex__(self) -> complex:
        return self.to_complex()

    def __repr__(self) -> str:
        return f"FieldElem({str(self.re)!r}, {str(self.om)!r})"

    def __str__(self) -> str:
        if not self.om:
            return str(self.re)
        om = _fmt_w(self.om)
        if not self.re:
            return om
        if om.startswith("-"):
            return f"{self.re} - {om[1:]}"
        return f"{self.re} + {om}"

    def is_atomic_text(self) -> bool:
        """True when ``str(self)`` needs no parentheses inside a product."""
        return not (self.re and self.om)


def _fmt_w(q: Fraction) -> str:
    if q == 1:
        return "w"
    if q == -1:
        return "-w"
    return f"{q}*w"


_ZERO_Q = Fraction(0)
ZERO = FieldElem(0)
ONE = FieldElem(1)
W = FieldElem(0, 1)
#: primitive cube root of unity (-1 + i*sqrt(3))/2
CUBE_ROOT = FieldElem(Fraction(-1, 2), Fraction(1, 2))


_TERM = re.compile(r"\s*([+-]?)\s*(\d+(?:/\d+)?)?\s*(\*?\s*w)?\s*")


def parse_field(text: str) -> FieldElem:
    """Parse the canonical text produced by ``str(FieldElem)``.

    Accepts forms like ``"1/3"``, ``"-w"``, ``"-1/6 - 1/6*w"``, ``"(2/3)"``.
    """
    src = text.strip()
    if src.startswith("(") and src.endswith(")"):
        src = src[1:-1]
    if not src:
        raise ValueError("empty field element")
    pos, re_part, om_part = 0, Fraction(0), Fraction(0)
    while pos < len(src):
        m = _TERM.match(src, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"bad field element {text!r}")
        sign, num, wpart = m.groups()
        if num is None and wpart is None:
            raise ValueError(f"bad field element {text!r}")
        value = Fraction(num) if num is not None else Fraction(1)
        if sign == "-":
            value = -value
        if wpart:
            om_part += value
        else:
            re_part += value
        pos = m.end()
    return FieldElem(re_part, om_part)


def from_complex(z: complex, max_den: int = 1000, tol: float = 1e-9) -> FieldElem | None:
    """Recognise a complex number as an element of Q(w) with small denominators.

    Returns ``None`` when no candidate within ``tol`` exists.
    """
    re_q = Fraction(z.real).limit_denominator(max_den)
    om_q = Fraction(z.imag / SQRT3).limit_denominator(max_den)
    cand = FieldElem(re_q, om_q)
    if abs(cand.to_complex() - z) <= tol:
        return cand
    return None


def close(a: complex, b: complex, eps: float = EPS_NUM) -> bool:
    return abs(complex(a) - complex(b)) <= eps


def phase_sort_key(z: complex) -> tuple[float, float]:
    """Deterministic ordering for complex numbers (real part, then imaginary)."""
    return (round(z.real, 9), round(z.imag, 9))
