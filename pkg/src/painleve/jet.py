"""Truncated Taylor series ("jets") with complex coefficients.

A jet of order ``K`` at a point ``t0`` stores ``f(t0 + h) mod h**(K+1)``
as coefficients ``[f(t0), f'(t0), f''(t0)/2, ...]``.  Arithmetic on jets
propagates exact derivatives through rational expressions, which is all
the closed-form solution and the symmetry actions need.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray):
        self.c = np.array(coeffs, dtype=complex)
        if self.c.ndim != 1 or self.c.size == 0:
            raise ValueError("a jet needs a non-empty 1-d coefficient array")

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, value: complex, order: int) -> Jet:
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, value: complex, order: int) -> Jet:
        """The identity function ``t`` expanded at ``value``."""
        c = np.zeros(order + 1, dtype=complex)
        c[0] = value
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def from_derivatives(cls, derivs: Sequence[complex]) -> Jet:
        return cls([d / math.factorial(k) for k, d in enumerate(derivs)])

    # -- structure ----------------------------------------------------------
    @property
    def order(self) -> int:
        return self.c.size - 1

    @property
    def value(self) -> complex:
        return complex(self.c[0])

    def derivative(self, k: int) -> complex:
        return complex(self.c[k]) * math.factorial(k)

    def derivatives(self) -> np.ndarray:
        return self.c * np.array([math.factorial(k) for k in range(self.c.size)])

    def _other(self, other) -> Jet:
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jets of different orders")
            return other
        return Jet.constant(complex(other), self.order)

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return Jet(self.c + self._other(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._other(other).c)

    def __rsub__(self, other):
        return Jet(self._other(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * complex(other))
        return Jet(np.convolve(self.c, self._other(other).c)[: self.c.size])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / complex(other))
        b = self._other(other).c
        if b[0] == 0:
            raise ZeroDivisionError("jet division by a function vanishing at the expansion point")
        q = np.zeros_like(self.c)
        for k in range(self.c.size):
            q[k] = (self.c[k] - np.dot(b[1 : k + 1], q[k - 1 :: -1][:k])) / b[0] if k else self.c[0] / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet.constant(complex(other), self.order) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = Jet.constant(1.0, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exp(self) -> Jet:
        """``exp`` of a jet by the standard recurrence ``k e_k = sum j a_j e_{k-j}``."""
        e = np.zeros_like(self.c)
        e[0] = np.exp(self.c[0])
        for k in range(1, self.c.size):
            j = np.arange(1, k + 1)
            e[k] = np.sum(j * self.c[j] * e[k - j]) / k
        return Jet(e)

    def compose(self, inner: Jet) -> Jet:
        """``f(g)`` where ``self`` is the jet of ``f`` at ``g``'s value."""
        if inner.order != self.order:
            raise ValueError("jets of different orders")
        shift = Jet(inner.c - np.concatenate([[inner.c[0]], np.zeros(inner.order)]))
        result = Jet.constant(self.c[-1], self.order)
        for coef in self.c[-2::-1]:
            result = result * shift + coef
        return result

    def __repr__(self) -> str:
        return f"Jet({self.c.tolist()!r})"


def polyval_jet(coeffs_low_to_high: Sequence[complex], t: Jet) -> Jet:
    """Horner evaluation of a polynomial at a jet."""
    result = Jet.constant(0.0, t.order)
    for c in reversed(list(coeffs_low_to_high)):
        result = result * t + c
    return result
