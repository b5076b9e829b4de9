"""Explicit solution of the built-in three-variable system.

With quadratics ``A = a0 + b0 t + c0 t^2``, ``B = a1 + b1 t + c1 t^2`` and
``C = a2 + b2 t + c2 t^2`` and ``D = A^3 + B^3 + C^3 - 3ABC``:

    x = (A^2 A' + B^2 B' + C^2 C' - A'BC - AB'C - ABC') / D  =  D' / (3D)
    y = (C^2 A' + A^2 B' + B^2 C' - ABA' - BCB' - ACC') / D
    z = (B^2 A' + C^2 B' + A^2 C' - ACA' - ABB' - BCC') / D

The x component is not among the tabulated formulas.  It follows from
writing the system as ``U''' = 0`` for the circulant matrix ``U`` with first
row ``(A, B, C)``: ``X = U' U^{-1}`` is circulant with entries ``(x, y, z)``
and ``D = det U``.  The formula is certified by residual tests.

Poles are the zeros of ``D``.  The identity
``a^3 + b^3 + c^3 - 3abc = (a + b + c)(a^2 + b^2 + c^2 - ab - bc - ca)``
splits ``D`` into a quadratic and a quartic before numeric rooting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .algebra import FieldElem, parse_field
from .jet import Jet, polyval_jet

PARAM_NAMES = ("a0", "b0", "c0", "a1", "b1", "c1", "a2", "b2", "c2")


class PoleError(ZeroDivisionError):
    """Closed form evaluated at (or numerically on top of) a zero of D."""

    def __init__(self, t: complex, root: complex | None = None):
        self.t = t
        self.root = root
        where = f" (nearest root of D: {root})" if root is not None else ""
        super().__init__(f"t = {t} is a pole of the closed-form solution{where}")


class DegenerateParamsError(ValueError):
    """D vanishes identically, so the formula defines no solution."""


class UnsupportedMultiplicityError(ValueError):
    """Local expansions are only extracted at simple poles."""


def _num(v) -> complex:
    if isinstance(v, FieldElem):
        return v.to_complex()
    return complex(v)


@dataclass(frozen=True)
class ClosedFormParams:
    """The nine coefficients of A, B and C (only six are independent)."""

    a0: object = 0
    b0: object = 0
    c0: object = 0
    a1: object = 0
    b1: object = 0
    c1: object = 0
    a2: object = 0
    b2: object = 0
    c2: object = 0

    def __post_init__(self):
        if not any(self.as_complex()):
            raise DegenerateParamsError("A, B and C are all identically zero")
        if not np.any(delta_coeffs(self)):
            raise DegenerateParamsError("A^3 + B^3 + C^3 - 3ABC vanishes identically")

    def values(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def as_complex(self) -> np.ndarray:
        return np.array([_num(v) for v in self.values()], dtype=complex)

    def quadratics(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        v = self.as_complex()
        return v[0:3], v[3:6], v[6:9]

    def to_dict(self) -> dict[str, str]:
        out = {}
        for name, v in zip(PARAM_NAMES, self.values()):
            if isinstance(v, (int, Fraction, FieldElem)):
                out[name] = str(v)
            else:
                z = complex(v)
                out[name] = repr(z.real) if z.imag == 0 else repr(z)
        return out

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> ClosedFormParams:
        unknown = set(data) - set(PARAM_NAMES)
        if unknown:
            raise ValueError(f"unknown parameter names: {sorted(unknown)}")
        return cls(**{k: _parse_value(v) for k, v in data.items()})

    @classmethod
    def from_json(cls, text: str) -> ClosedFormParams:
        return cls.from_mapping(json.loads(text))

    @classmethod
    def read(cls, path: str | Path) -> ClosedFormParams:
        return cls.from_json(Path(path).read_text())

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0, rational: bool = False) -> ClosedFormParams:
        if rational:
            vals = [Fraction(int(k), 8) for k in rng.integers(-16, 17, size=9)]
        else:
            vals = list(rng.uniform(-scale, scale, size=9))
        try:
            return cls(*vals)
        except DegenerateParamsError:
            return cls.random(rng, scale, rational)


def _parse_value(v) -> object:
    if isinstance(v, (int, float, complex, Fraction, FieldElem)):
        return v
    if isinstance(v, str):
        text = v.strip()
        try:
            return Fraction(text)
        except ValueError:
            pass
        if "w" in text:
            return parse_field(text)
        return complex(text.replace("i", "j")) if "i" in text else float(text)
    raise TypeError(f"cannot read parameter value {v!r}")


# ---------------------------------------------------------------------------
# D and its factors
# ---------------------------------------------------------------------------


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.array(c, dtype=complex)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


def delta_factors(params: ClosedFormParams) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients (low to high) of ``A+B+C`` and ``A^2+B^2+C^2-AB-BC-CA``."""
    a, b, c = params.quadratics()
    s = a + b + c
    q = P.polysub(
        P.polyadd(P.polyadd(P.polymul(a, a), P.polymul(b, b)), P.polymul(c, c)),
        P.polyadd(P.polyadd(P.polymul(a, b), P.polymul(b, c)), P.polymul(c, a)),
    )
    return _trim(s), _trim(q)


def delta_coeffs(params: ClosedFormParams) -> np.ndarray:
    s, q = delta_factors(params)
    return _trim(P.polymul(s, q))


@dataclass(frozen=True)
class PoleSet:
    roots: tuple[tuple[complex, int], ...]
    degree: int

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def count(self) -> int:
        return sum(m for _, m in self.roots)

    def simple(self) -> list[complex]:
        return [r for r, m in self.roots if m == 1]

    def nearest(self, t: complex) -> complex | None:
        if not self.roots:
            return None
        return min((r for r, _ in self.roots), key=lambda r: abs(r - t))


def _polish(coeffs: np.ndarray, z: complex, steps: int = 3) -> complex:
    d = P.polyder(coeffs)
    for _ in range(steps):
        dv = P.polyval(z, d)
        if dv == 0:
            break
        step = P.polyval(z, coeffs) / dv
        z = z - step
        if abs(step) <= 1e-17 * max(1.0, abs(z)):
            break
    return complex(z)


def pole_set(params: ClosedFormParams, cluster_tol: float = 1e-6) -> PoleSet:
    """Zeros of D with multiplicities, rooted factor by factor.

    A constant nonzero D has no zeros and gives an empty set.
    """
    s, q = delta_factors(params)
    full = delta_coeffs(params)
    if not np.any(full):
        raise DegenerateParamsError("D vanishes identically")
    raw: list[complex] = []
    for factor in (s, q):
        if factor.size > 1:
            raw.extend(complex(z) for z in P.polyroots(factor))
    clusters: list[list[complex]] = []
    for z in sorted(raw, key=lambda z: (z.real, z.imag)):
        for cl in clusters:
            if abs(cl[0] - z) <= cluster_tol * max(1.0, abs(z)):
                cl.append(z)
                break
        else:
            clusters.append([z])
    roots = []
    for cl in clusters:
        z = complex(np.mean(cl))
        if len(cl) == 1:
            z = _polish(full, z)
        roots.append((z, len(cl)))
    return PoleSet(tuple(roots), full.size - 1)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _check_pole(params: ClosedFormParams, t: complex) -> None:
    """Raise :class:`PoleError` when ``t`` is a zero of D to working precision."""
    full = delta_coeffs(params)
    d_val = P.polyval(t, full)
    scale = float(np.sum(np.abs(full) * max(1.0, abs(t)) ** np.arange(full.size)))
    if abs(d_val) <= 1e-14 * scale:
        root = pole_set(params).nearest(t) if full.size > 1 else None
        raise PoleError(t, root)


def closed_form_jets(params: ClosedFormParams, t: Jet) -> tuple[Jet, Jet, Jet]:
    """Jets of ``(x, y, z)`` at a jet-valued time (exact derivative propagation)."""
    qa, qb, qc = params.quadratics()
    A, B, C = (polyval_jet(q, t) for q in (qa, qb, qc))
    dA, dB, dC = (polyval_jet(P.polyder(q), t) for q in (qa, qb, qc))
    _check_pole(params, t.value)
    D = A * A * A + B * B * B + C * C * C - 3 * A * B * C
    x = (A * A * dA + B * B * dB + C * C * dC - dA * B * C - A * dB * C - A * B * dC) / D
    y = (C * C * dA + A * A * dB + B * B * dC - A * B * dA - B * C * dB - A * C * dC) / D
    z = (B * B * dA + C * C * dB + A * A * dC - A * C * dA - A * B * dB - B * C * dC) / D
    return x, y, z


def eval_closed_form(params: ClosedFormParams, t: complex, derivatives: int = 0):
    """``(x, y, z)`` at ``t``; with ``derivatives=k`` an array of shape ``(k+1, 3)``.

    Raises :class:`PoleError` when ``t`` is a zero of D to working precision.
    """
    t = complex(t)
    jets = closed_form_jets(params, Jet.variable(t, derivatives))
    if derivatives == 0:
        return tuple(j.value for j in jets)
    return np.array([j.derivatives() for j in jets]).T


def local_expansion(
    params: ClosedFormParams,
    pole: complex,
    depth: int,
    points: int = 128,
    radius: float | None = None,
) -> np.ndarray:
    """Laurent coefficients of ``(x, y, z)`` about a simple pole.

    Returns an array of shape ``(depth + 2, 3)`` whose row ``k`` holds the
    coefficient of ``tau**(k - 1)``.  Coefficients are discrete Cauchy
    integrals over a circle of radius half the distance to the nearest other
    pole; the aliasing error decays like ``2**-points``.
    """
    poles = pole_set(params)
    match = [(r, m) for r, m in poles.roots if abs(r - pole) <= 1e-8 * max(1.0, abs(pole))]
    if not match:
        raise ValueError(f"{pole} is not a pole of this solution")
    center, mult = min(match, key=lambda rm: abs(rm[0] - pole))
    if mult != 1:
        raise UnsupportedMultiplicityError(f"pole {center} has multiplicity {mult}")
    others = [abs(r - center) for r, _ in poles.roots if r != center]
    if radius is None:
        radius = 0.5 * min(others) if others else 1.0
    theta = 2 * np.pi * np.arange(points) / points
    ring = radius * np.exp(1j * theta)
    samples = np.array([eval_closed_form(params, center + h) for h in ring])  # (points, 3)
    # coefficient of tau**m is mean(f * h**-m); FFT does all m at once
    out = np.zeros((depth + 2, 3), dtype=complex)
    spectrum = np.fft.fft(samples, axis=0) / points  # entry m ~ c_m r^m (aliased)
    for k in range(depth + 2):
        m = k - 1
        out[k] = spectrum[m % points] / radius**m
    return out


def sum_expansion(coeffs: np.ndarray, tau: complex) -> np.ndarray:
    """Evaluate a local expansion (row ``k`` multiplies ``tau**(k-1)``)."""
    powers = tau ** (np.arange(coeffs.shape[0]) - 1)
    return powers @ coeffs


def transformed_params_scaling(params: ClosedFormParams, lam: complex) -> ClosedFormParams:
    """Parameters whose solution is ``lam * (x, y, z)(lam * t)``.

    Replacing ``t`` by ``lam t`` multiplies the linear coefficients by ``lam``
    and the quadratic ones by ``lam^2``.
    """
    v = list(params.as_complex())
    for base in (0, 3, 6):
        v[base + 1] *= lam
        v[base + 2] *= lam * lam
    return ClosedFormParams(*v)


def random_safe_params(
    rng: np.random.Generator,
    segment: Sequence[float] = (0.0, 1.0),
    clearance: float = 0.3,
    attempts: int = 1000,
) -> ClosedFormParams:
    """Random parameters with every pole at least ``clearance`` from a real segment."""
    lo, hi = segment
    for _ in range(attempts):
        params = ClosedFormParams.random(rng)
        poles = pole_set(params)
        if poles.count != 6:
            continue
        if all(_dist_to_segment(r, lo, hi) >= clearance for r, _ in poles.roots):
            return params
    raise RuntimeError("no parameter set with the requested clearance found")


def _dist_to_segment(z: complex, lo: float, hi: float) -> float:
    x = min(max(z.real, lo), hi)
    return abs(z - x)
