"""Golden data for the built-in three-variable system.

Values are transcribed exactly as printed.  Where a
printed value is known to be defective the transcription is kept verbatim
and the defect is tested for explicitly; the one exception is the
second-member eigenvector table, whose printed ``(1 - sqrt 3)/2`` entry is
stored with the missing ``i`` restored (the companion statement that the
third member is obtained by ``i -> -i`` fixes the reading).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q

from .algebra import FieldElem, ParamPoly
from .system import parse_poly


def fe(re, om=0) -> FieldElem:
    return FieldElem(Q(re), Q(om))


@dataclass(frozen=True)
class TableRow:
    """One row of the leading-order table."""

    coeffs: tuple[FieldElem, FieldElem, FieldElem]
    resonances: tuple[tuple[int, int], ...]  # (value, multiplicity), ascending
    triplet: int | None = None  # 1..8, None for rows with a zero coefficient
    member: int | None = None  # 1..3 within a triplet

    @property
    def label(self) -> str:
        if self.triplet is None:
            return "{" + ", ".join(str(c) for c in self.coeffs) + "}"
        return f"T{self.triplet}.{self.member}"

    @property
    def has_zero(self) -> bool:
        return any(not c for c in self.coeffs)


def _triplet(k: int, alpha: str, members, resonances) -> list[TableRow]:
    a = fe(alpha)
    return [
        TableRow((a, fe(*b), fe(*c)), resonances, k, i + 1)
        for i, (b, c) in enumerate(members)
    ]


_sixth = Q(1, 6)
_third = Q(1, 3)

#: all 27 solutions of the leading-order equations, in printed order
TABLE_I: tuple[TableRow, ...] = tuple(
    [TableRow((fe(0), fe(0), fe(0)), ())]
    + _triplet(1, "1/3", [((_third,), (_third,)), ((-_sixth, -_sixth), (-_sixth, _sixth)), ((-_sixth, _sixth), (-_sixth, -_sixth))],
               ((-1, 1), (1, 3), (2, 2)))
    + _triplet(2, "2/3", [((2 * _third,), (2 * _third,)), ((-_third, -_third), (-_third, _third)), ((-_third, _third), (-_third, -_third))],
               ((-2, 1), (-1, 1), (1, 2), (2, 2)))
    + _triplet(3, "2/3", [((-_third,), (-_third,)), ((_sixth, -_sixth), (_sixth, _sixth)), ((_sixth, _sixth), (_sixth, -_sixth))],
               ((-1, 2), (1, 3), (2, 1)))
    + [TableRow((fe(1), fe(0), fe(0)), ())]
    + _triplet(4, "1", [((0, _third), (0, -_third)), ((-Q(1, 2), -_sixth), (-Q(1, 2), _sixth)), ((Q(1, 2), -_sixth), (Q(1, 2), _sixth))],
               ((-2, 1), (-1, 2), (1, 2), (2, 1)))
    + _triplet(5, "1", [((0, -_third), (0, _third)), ((-Q(1, 2), _sixth), (-Q(1, 2), -_sixth)), ((Q(1, 2), _sixth), (Q(1, 2), -_sixth))],
               ((-2, 1), (-1, 2), (1, 2), (2, 1)))
    + _triplet(6, "4/3", [((-2 * _third,), (-2 * _third,)), ((_third, -_third), (_third, _third)), ((_third, _third), (_third, -_third))],
               ((-2, 2), (-1, 2), (1, 1), (2, 1)))
    + _triplet(7, "4/3", [((_third,), (_third,)), ((-_sixth, -_sixth), (-_sixth, _sixth)), ((-_sixth, _sixth), (-_sixth, -_sixth))],
               ((-2, 1), (-1, 3), (1, 2)))
    + _triplet(8, "5/3", [((-_third,), (-_third,)), ((_sixth, -_sixth), (_sixth, _sixth)), ((_sixth, _sixth), (_sixth, -_sixth))],
               ((-2, 2), (-1, 3), (1, 1)))
    + [TableRow((fe(2), fe(0), fe(0)), ())]
)


def table_row(triplet: int, member: int) -> TableRow:
    for row in TABLE_I:
        if row.triplet == triplet and row.member == member:
            return row
    raise KeyError((triplet, member))


# ---------------------------------------------------------------------------
# eigenvectors (null-space bases), keyed by resonance value
# ---------------------------------------------------------------------------

_E = [fe(1), fe(0), fe(0)], [fe(0), fe(1), fe(0)], [fe(0), fe(0), fe(1)]
_IDENTITY = tuple(tuple(v) for v in _E)

#: first member of triplet 3 (and of triplet 8, once resonances are matched in order)
EIGEN_T3_M1 = {
    -1: ((fe(1), fe(0), fe(-1)), (fe(0), fe(1), fe(-1))),
    1: _IDENTITY,
    2: ((fe(1), fe(1), fe(1)),),
}

#: second member of triplet 3
EIGEN_T3_M2 = {
    -1: ((fe(1), fe(0), fe(Q(1, 2), Q(1, 2))), (fe(0), fe(1), fe(Q(1, 2), -Q(1, 2)))),
    1: _IDENTITY,
    2: ((fe(-Q(1, 2), -Q(1, 2)), fe(1), fe(-Q(1, 2), Q(1, 2))),),
}

#: triple -1 resonance of the first member of triplet 8
EIGEN_T8_M1_TRIPLE = _IDENTITY


# ---------------------------------------------------------------------------
# displayed Laurent series
# ---------------------------------------------------------------------------


def _polys(rows: dict[str, list[str]]) -> dict[str, list[ParamPoly]]:
    return {v: [parse_poly(t) for t in texts] for v, texts in rows.items()}


#: ascending series about the first member of triplet 1; entry k multiplies tau^(k-1)
RIGHT_SERIES_T1_M1_TEXT = {
    "x": [
        "1/3",
        "a0",
        "-(b1 + c1 + (a0 + b0 + c0)^2)",
        # printed with an unbalanced parenthesis; closed at the end of the brace
        "1/2*((a0 - b0)^3 + (c0 - a0)^3 - 3*a0^2*(b0 + c0) + 3*(b1 + c1)*(a0 - b0))",
    ],
    "y": [
        "1/3",
        "b0",
        "b1",
        "-3/2*(c0*c1 + c0^2*a0 - b0*c0^2 - c1*b0 - 2*a0*b0*c0 - b0^2*c0 - 2*a0*b0^2 - b0^3 + a0*b1 - b0*b1)",
    ],
    "z": [
        "1/3",
        "c0",
        "c1",
        "3/2*(c0^3 + 2*a0*c0^2 + b0*c0^2 + 2*a0*b0*c0 + b0^2*c0 - a0*b0^2 + c0*(b1 + c1) - a0*c1 - b0*b1)",
    ],
}

#: injected symbol -> printed name for the ascending triplet-1 series
RIGHT_SERIES_T1_M1_SYMBOLS = {"r1_0": "a0", "r1_1": "b0", "r1_2": "c0", "r2_0": "b1", "r2_1": "c1"}

#: descending series about the first member of triplet 3; entry k multiplies tau^(-1-k)
LEFT_SERIES_T3_M1_TEXT = {
    "x": ["2/3", "a2", "a2 - 2*a2*b2 - 2*b2^2", "-9*(a2 + b2)*a2*b2"],
    "y": ["-1/3", "b2", "a2 + 4*a2*b2 + b2^2", "3*(a2^3 + 3*a2^2*b2 - b2^3)"],
    "z": ["-1/3", "-(a2 + b2)", "-(a2 + a2*b2 - b2^2)", "-3*(a2^3 - 3*a2*b2^2 - b2^3)"],
}

#: injected symbols at the double -1 resonance expressed in the printed constants.
#: The canonical null basis is (-1, 1, 0), (-1, 0, 1); the printed leading
#: correction is (a2, b2, -a2 - b2).
LEFT_SERIES_T3_M1_SYMBOLS = {"rm1_0": "b2", "rm1_1": "-a2 - b2"}


def right_series_display() -> dict[str, list[ParamPoly]]:
    return _polys(RIGHT_SERIES_T1_M1_TEXT)


def left_series_display() -> dict[str, list[ParamPoly]]:
    return _polys(LEFT_SERIES_T3_M1_TEXT)


def symbol_map(table: dict[str, str]) -> dict[str, ParamPoly]:
    return {k: parse_poly(v) for k, v in table.items()}
