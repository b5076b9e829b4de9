"""End-to-end checks of the built-in system against its tabulated data.

Each check returns a :class:`CheckResult`; the test suite and the
``verify-paper`` command share them.  Checks that compare against printed
series compare against them exactly as printed, so a misprint shows up as a
failure with the offending coefficient named in ``detail``.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .algebra import FieldElem, ParamPoly, null_space, rank, span_rref
from .balance import (
    balance_from_row,
    enumerate_balances_numeric,
    leading_order_equations,
    match_numeric_to_exact,
    table1_balances,
    verify_balance,
)
from .closed_form import (
    ClosedFormParams,
    PoleError,
    eval_closed_form,
    local_expansion,
    pole_set,
    random_safe_params,
)
from .fixtures import (
    EIGEN_T3_M1,
    EIGEN_T3_M2,
    EIGEN_T8_M1_TRIPLE,
    LEFT_SERIES_T3_M1_SYMBOLS,
    RIGHT_SERIES_T1_M1_SYMBOLS,
    TABLE_I,
    TableRow,
    left_series_display,
    right_series_display,
    symbol_map,
    table_row,
)
from .resonance import ResonanceReport, resonance_report
from .series import LaurentSeries, build_left_series, build_right_series
from .system import ODESystem, builtin_system, parse_system, serialize_system
from .verify import (
    GENERATORS,
    ClosedFormProvider,
    fit_series_constants,
    max_relative_gap,
    series_numeric_coeffs,
    symmetry_check,
)


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.name} ({self.seconds:.1f}s): {self.detail}"


@lru_cache(maxsize=None)
def _system() -> ODESystem:
    return builtin_system()


@lru_cache(maxsize=None)
def _report(triplet: int, member: int) -> ResonanceReport:
    return resonance_report(_system(), balance_from_row(table_row(triplet, member)))


@lru_cache(maxsize=None)
def right_series(member: int, max_order: int = 8) -> tuple[LaurentSeries, tuple]:
    series, compat = build_right_series(_system(), _report(1, member), max_order)
    return series, tuple(compat)


def _nonzero_rows(table: Sequence[TableRow]) -> list[TableRow]:
    return [r for r in table if not r.has_zero]


# ---------------------------------------------------------------------------
# 1-4: balances and resonances
# ---------------------------------------------------------------------------


def check_table(table: Sequence[TableRow] = TABLE_I) -> tuple[bool, str]:
    sys = _system()
    eqs = leading_order_equations(sys)
    bad = []
    rows = _nonzero_rows(table)
    for row in rows:
        bal = balance_from_row(row)
        if any(verify_balance(eqs, bal)):
            bad.append(f"{row.label}: leading-order residual nonzero")
            continue
        rep = resonance_report(sys, bal)
        got = []
        for r in rep.roots:
            k = r.as_int()
            got.append((k if k is not None else complex(r.value), r.alg_mult))
        if tuple(got) != row.resonances:
            bad.append(f"{row.label}: resonances {got} != {list(row.resonances)}")
    if len(rows) != 24:
        bad.append(f"expected 24 nonzero balances, table has {len(rows)}")
    if bad:
        return False, "; ".join(bad)
    return True, f"{len(rows)} balances exact, resonance multisets match"


def check_enumeration(seeds: Sequence[int] = (0, 1, 2, 3, 4), starts: int = 10_000) -> tuple[bool, str]:
    eqs = leading_order_equations(_system())
    exact = table1_balances()
    bad, worst = [], 0.0
    for seed in seeds:
        res = enumerate_balances_numeric(eqs, starts=starts, seed=seed)
        pairs, un_num, un_ex = match_numeric_to_exact(res.balances, exact, tol=1e-10)
        worst = max([worst] + [d for _, _, d in pairs])
        if len(res.balances) != 27 or un_num or un_ex:
            bad.append(f"seed {seed}: {len(res.balances)} clusters, {len(un_num)} unmatched")
    if bad:
        return False, "; ".join(bad)
    return True, f"27 clusters for seeds {list(seeds)}, max distance {worst:.1e}"


def check_generic_resonance() -> tuple[bool, str]:
    bad = []
    for row in _nonzero_rows(TABLE_I):
        rep = _report(row.triplet, row.member)
        ints = rep.integer_resonances()
        if -1 not in ints:
            bad.append(f"{row.label}: -1 missing")
        if sum(r.alg_mult for r in rep.roots) != 6:
            bad.append(f"{row.label}: total multiplicity {sum(r.alg_mult for r in rep.roots)}")
        for r in rep.roots:
            if r.geo_mult != r.alg_mult:
                bad.append(f"{row.label}: at {r.value} geometric {r.geo_mult} != algebraic {r.alg_mult}")
    if bad:
        return False, "; ".join(bad)
    return True, "-1 present, multiplicity 6, geometric = algebraic for all 24"


def _bases_by_value(rep: ResonanceReport) -> dict[int, tuple]:
    return {r.as_int(): r.null_basis for r in rep.roots}


def check_eigenvectors() -> tuple[bool, str]:
    bad = []
    for label, (t, m), fixture in (("T3.1", (3, 1), EIGEN_T3_M1), ("T3.2", (3, 2), EIGEN_T3_M2)):
        bases = _bases_by_value(_report(t, m))
        for k, vecs in fixture.items():
            if span_rref(bases.get(k, ())) != span_rref(vecs):
                bad.append(f"{label} at {k}: span differs")
    for m in (1, 2, 3):
        b3 = [r.null_basis for r in _report(3, m).roots]
        b8 = [r.null_basis for r in _report(8, m).roots]
        if b3 != b8:
            bad.append(f"T8.{m} bases differ from T3.{m}")
    triple = _bases_by_value(_report(8, 1)).get(-1, ())
    if len(triple) != 3 or span_rref(triple) != span_rref(EIGEN_T8_M1_TRIPLE):
        bad.append("T8.1 triple -1 null space is not the whole space")
    if bad:
        return False, "; ".join(bad)
    return True, "triplet 3 spans match, triplet 8 bases identical in order, triple -1 spans 3-space"


# ---------------------------------------------------------------------------
# 5-6: displayed series
# ---------------------------------------------------------------------------


def _compare_display(series: LaurentSeries, display: dict[str, list[ParamPoly]], mapping, label_power) -> list[str]:
    out = []
    for j, row in enumerate(series.coeffs[: len(next(iter(display.values())))]):
        for i, v in enumerate(series.var_names):
            got = row[i].substitute(mapping)
            want = display[v][j]
            if got != want:
                out.append(f"{v} at tau^{label_power(j)}: computed {got.to_text()} vs printed {want.to_text()}")
    return out


def right_series_mismatches() -> list[str]:
    series, _ = right_series(1)
    return _compare_display(series, right_series_display(), symbol_map(RIGHT_SERIES_T1_M1_SYMBOLS), lambda j: j - 1)


def check_right_series() -> tuple[bool, str]:
    series, compat = right_series(1)
    bad = right_series_mismatches()
    orders = {c.order for c in compat}
    if orders != {1, 2} or not all(c.consistent for c in compat):
        bad.append(f"compatibility log {[(c.order, c.consistent) for c in compat]}")
    if series.injected != {1: ["r1_0", "r1_1", "r1_2"], 2: ["r2_0", "r2_1"]}:
        bad.append(f"injected symbols {series.injected}")
    if bad:
        return False, "; ".join(bad)
    return True, "display reproduced, compatible at +1 and +2 through order 8"


def left_series_mismatches(series: LaurentSeries | None = None) -> list[str]:
    if series is None:
        series = build_left_series(_system(), _report(3, 1), 3)
    return _compare_display(series, left_series_display(), symbol_map(LEFT_SERIES_T3_M1_SYMBOLS), lambda j: -1 - j)


def check_left_series() -> tuple[bool, str]:
    series = build_left_series(_system(), _report(3, 1), 3)
    bad = left_series_mismatches(series)
    if len(series.symbols()) != 2:
        bad.append(f"{len(series.symbols())} injected symbols, expected 2")
    if bad:
        return False, "; ".join(bad)
    return True, "descending display reproduced with two constants"


# ---------------------------------------------------------------------------
# 7-9: closed form, bridge, symmetries
# ---------------------------------------------------------------------------


def closed_form_samples(seed: int = 7, count: int = 1000, clearance: float = 0.05):
    """Random ``(params, t)`` pairs with ``t`` at least ``clearance`` from every pole."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        params = ClosedFormParams.random(rng)
        poles = pole_set(params)
        for _ in range(10):
            t = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if all(abs(t - r) >= clearance for r, _ in poles.roots):
                out.append((params, t))
                break
    return out


def check_closed_form(seed: int = 7) -> tuple[bool, str]:
    rhs = _system().numeric_rhs()
    worst = 0.0
    for params, t in closed_form_samples(seed):
        d = eval_closed_form(params, t, 2)
        worst = max(worst, float(np.max(np.abs(d[2] - rhs(d[0], d[1])))))
    rng = np.random.default_rng(seed + 1)
    counts = {pole_set(ClosedFormParams.random(rng)).count for _ in range(50)}
    ok = worst < 1e-9 and counts == {6}
    return ok, f"max residual {worst:.1e} over 1000 samples; pole counts {sorted(counts)}"


def check_bridge(seed: int = 11, solutions: int = 20, depth: int = 8) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    nonzero = [(row, np.array([c.to_complex() for c in row.coeffs])) for row in _nonzero_rows(TABLE_I)]
    worst_lead = worst_fit = 0.0
    bad = []
    poles_seen = 0
    for _ in range(solutions):
        params = ClosedFormParams.random(rng)
        for pole in pole_set(params).simple():
            oracle = local_expansion(params, pole, depth)
            row, dist = min(((r, float(np.max(np.abs(oracle[0] - v)))) for r, v in nonzero), key=lambda rv: rv[1])
            worst_lead = max(worst_lead, dist)
            poles_seen += 1
            if dist > 1e-8:
                bad.append(f"pole {pole:.3f}: leading coefficients {dist:.1e} from the balance table")
                continue
            if row.triplet != 1:
                bad.append(f"pole {pole:.3f}: branch {row.label} has no ascending series")
                continue
            series, _ = right_series(row.member, depth)
            values = fit_series_constants(series, oracle)
            gap = max_relative_gap(series_numeric_coeffs(series, values), oracle[: depth + 1])
            worst_fit = max(worst_fit, gap)
            if gap > 1e-8:
                bad.append(f"pole {pole:.3f}: series/oracle gap {gap:.1e}")
    detail = f"{poles_seen} simple poles; leading gap {worst_lead:.1e}; series gap {worst_fit:.1e}"
    if bad:
        return False, detail + "; " + "; ".join(bad[:5])
    return True, detail


def check_symmetries(seed: int = 13, solutions: int = 10, eps: float = 1e-2) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    sys = _system()
    worst = {name: 0.0 for name in GENERATORS}
    for _ in range(solutions):
        sol = ClosedFormProvider(random_safe_params(rng))
        for name, gen in GENERATORS.items():
            worst[name] = max(worst[name], symmetry_check(sys, gen, sol, eps))
    ok = all(v < 1e-7 for v in worst.values())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


# ---------------------------------------------------------------------------
# 10: property suites
# ---------------------------------------------------------------------------


def _rand_field(rng: random.Random, den: int = 6) -> FieldElem:
    return FieldElem(Fraction(rng.randint(-9, 9), rng.randint(1, den)), Fraction(rng.randint(-9, 9), rng.randint(1, den)))


def _field_axioms(rng: random.Random, samples: int) -> list[str]:
    bad = []
    zero, one = FieldElem(0), FieldElem(1)
    for _ in range(samples):
        a, b, c = (_rand_field(rng) for _ in range(3))
        checks = [
            a + b == b + a,
            a * b == b * a,
            (a + b) + c == a + (b + c),
            (a * b) * c == a * (b * c),
            a * (b + c) == a * b + a * c,
            a + zero == a and a * one == a,
            a + (-a) == zero,
            (not a) or a * a.inverse() == one,
        ]
        if not all(checks):
            bad.append(f"field axiom failed for {a}, {b}, {c}")
            break
    return bad


def _rank_nullity(rng: random.Random, samples: int) -> list[str]:
    for _ in range(samples):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        low = rng.randint(0, min(rows, cols))
        left = [[_rand_field(rng) for _ in range(low)] for _ in range(rows)]
        right = [[_rand_field(rng) for _ in range(cols)] for _ in range(low)]
        m = [[sum((left[i][k] * right[k][j] for k in range(low)), FieldElem(0)) for j in range(cols)] for i in range(rows)]
        basis = null_space(m)
        if rank(m) + len(basis) != cols:
            return [f"rank-nullity failed for {rows}x{cols}"]
        for v in basis:
            if any(sum((m[i][j] * v[j] for j in range(cols)), FieldElem(0)) for i in range(rows)):
                return ["null vector not annihilated"]
    return []


def _round_trip(rng: random.Random, samples: int) -> list[str]:
    for _ in range(samples):
        n = rng.randint(1, 3)
        names = tuple(rng.sample(["u", "v", "w1", "q", "p2"], n))
        state = names + tuple(v + "'" for v in names)
        rhs = []
        for _ in range(n):
            terms = {}
            for _ in range(rng.randint(0, 4)):
                mono = tuple(rng.choice([0, 0, 0, 1, 2]) for _ in state)
                terms[mono] = _rand_field(rng, 4)
            rhs.append(ParamPoly(state, terms))
        sys = ODESystem(names, tuple(rhs))
        text = serialize_system(sys)
        again = parse_system(text)
        if again != sys or serialize_system(again) != text:
            return [f"round trip failed for:\n{text}"]
    return []


def _conjugation_closure(seeds: Sequence[int]) -> list[str]:
    exact = set(b.coeffs for b in table1_balances())
    bad = [f"conjugate of {c} missing" for c in exact if tuple(x.conj() for x in c) not in exact]
    eqs = leading_order_equations(_system())
    for seed in seeds:
        found = [b.numeric() for b in enumerate_balances_numeric(eqs, starts=10_000, seed=seed).balances]
        for v in found:
            if min(float(np.max(np.abs(np.conj(v) - u))) for u in found) > 1e-9:
                bad.append(f"seed {seed}: conjugate of {v} not found")
                break
    return bad


def _triplet_sum_rule() -> list[str]:
    bad = []
    for t in range(1, 9):
        members = [table_row(t, m).coeffs for m in (1, 2, 3)]
        for idx, name in ((1, "beta"), (2, "gamma")):
            if members[1][idx] + members[2][idx] != -members[0][idx]:
                bad.append(f"triplet {t}: {name} sum rule fails")
    return bad


def check_properties(seed: int = 17) -> tuple[bool, str]:
    rng = random.Random(seed)
    bad = (
        _field_axioms(rng, 10_000)
        + _rank_nullity(rng, 200)
        + _round_trip(rng, 200)
        + _conjugation_closure((seed,))
        + _triplet_sum_rule()
    )
    if bad:
        return False, "; ".join(bad)
    return True, "field axioms (1e4), rank-nullity, round trip, conjugation closure, triplet sums"


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

CHECKS: tuple[tuple[int, str, Callable[[], tuple[bool, str]]], ...] = (
    (1, "Balance table reproduction", check_table),
    (2, "27-root enumeration", check_enumeration),
    (3, "Generic resonance", check_generic_resonance),
    (4, "Eigenvector fixtures", check_eigenvectors),
    (5, "Right series fixture", check_right_series),
    (6, "Left series fixture", check_left_series),
    (7, "Closed-form certification", check_closed_form),
    (8, "Bridge test", check_bridge),
    (9, "Symmetry suite", check_symmetries),
    (10, "Property suites", check_properties),
)


def run_check(number: int) -> CheckResult:
    for num, name, fn in CHECKS:
        if num == number:
            start = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed check, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(num, name, ok, detail, time.perf_counter() - start)
    raise KeyError(number)


def run_all(numbers: Sequence[int] | None = None) -> list[CheckResult]:
    return [run_check(n) for n, _, _ in CHECKS if numbers is None or n in numbers]


__all__ = ["CHECKS", "CheckResult", "run_all", "run_check", "PoleError"]
