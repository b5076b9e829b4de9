"""Command-line front end.

Exit status: 0 on success, 1 when an analysis step fails, 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .algebra import EPS_NUM, FieldElem, RootFindingError
from .balance import (
    Balance,
    BalanceCountWarning,
    DominantBalanceError,
    dominant_exponents,
    enumerate_balances_numeric,
    leading_order_equations,
    recognize_exact,
)
from .fixtures import LEFT_SERIES_T3_M1_SYMBOLS, RIGHT_SERIES_T1_M1_SYMBOLS, TABLE_I, symbol_map
from .resonance import BranchClass, ParticularBranchError, ResonanceReport, constant_count, resonance_report
from .series import SeriesDirectionWarning, build_left_series, build_right_series
from .system import ODESystem, SystemParseError, builtin_system, parse_system, serialize_system

EXIT_OK, EXIT_ANALYSIS, EXIT_INPUT = 0, 1, 2
BUILTIN = "@builtin"
CLUSTER_TOL = 1e-8
RECOGNITION_TOL = 1e-8


class InputError(Exception):
    """Bad command-line input that is not a parse error."""


def load_system(path: str) -> ODESystem:
    if path == BUILTIN:
        return parse_system(resources.files("painleve").joinpath("data/builtin.ode").read_text())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_system(text)


def schema_path():
    return resources.files("painleve").joinpath("data/analysis.schema.json")


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------


@dataclass
class AnalysedBalance:
    balance: Balance
    label: str | None
    report: ResonanceReport | None


def _table_labels(sys: ODESystem) -> dict | None:
    if sys != builtin_system():
        return None
    return {row.coeffs: (i, row) for i, row in enumerate(TABLE_I)}


def analyse(sys: ODESystem, seed: int, tol: float, starts: int) -> tuple[list[AnalysedBalance], dict]:
    exps = dominant_exponents(sys)
    eqs = leading_order_equations(sys, exps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BalanceCountWarning)
        result = enumerate_balances_numeric(eqs, starts=starts, tol=tol, seed=seed, cluster_tol=CLUSTER_TOL)
    labels = _table_labels(sys)
    rows = []
    for bal in result.balances:
        exact = recognize_exact(eqs, bal)
        chosen = exact if exact is not None else bal
        label, order = None, None
        if labels is not None and exact is not None and exact.coeffs in labels:
            order, row = labels[exact.coeffs]
            label = row.label if row.triplet is not None else None
        report = None if chosen.has_zero else resonance_report(sys, chosen)
        rows.append((order, chosen, label, report))
    if labels is not None and all(r[0] is not None for r in rows):
        rows.sort(key=lambda r: r[0])
    else:
        rows.sort(key=lambda r: _balance_key(r[1]))
    enum_info = {
        "seed": seed,
        "starts": starts,
        "bezout_bound": result.bezout,
        "found": len(result.balances),
        "warnings": result.warnings,
    }
    return [AnalysedBalance(b, lab, rep) for _, b, lab, rep in rows], enum_info


def _balance_key(b: Balance):
    return tuple(x for c in b.numeric() for x in (round(c.real, 9), round(c.imag, 9)))


def _num(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _value_json(v) -> dict:
    if isinstance(v, FieldElem):
        return {"exact": str(v), "numeric": _num(v.to_complex())}
    return {"exact": None, "numeric": _num(v)}


def report_json(rep: ResonanceReport) -> dict:
    roots = []
    for r in rep.roots:
        entry = _value_json(r.value)
        entry.update(
            alg_mult=r.alg_mult,
            geo_mult=r.geo_mult,
            null_basis=[[str(x) if isinstance(x, FieldElem) else _num(x) for x in vec] for vec in r.null_basis],
        )
        roots.append(entry)
    return {
        "pattern": rep.pattern(),
        "polynomial": str(rep.poly) if rep.matrix.entries else None,
        "roots": roots,
        "branch_class": rep.branch_class.value,
        "constant_count": constant_count(rep),
        "tol": rep.tol,
    }


def analysis_document(sys: ODESystem, rows: list[AnalysedBalance], enum_info: dict, tol: float) -> dict:
    exps = dominant_exponents(sys)
    balances = []
    for i, row in enumerate(rows):
        b = row.balance
        balances.append(
            {
                "index": i,
                "label": row.label,
                "exact": b.exact,
                "coeffs": [str(c) for c in b.coeffs] if b.exact else None,
                "numeric": {"values": [_num(c) for c in b.numeric()], "tol": tol},
                "particular": row.report is None,
                "resonances": report_json(row.report) if row.report is not None else None,
            }
        )
    return {
        "tool": "painleve",
        "version": __version__,
        "system": serialize_system(sys),
        "variables": list(sys.var_names),
        "exponents": [str(p) for p in exps],
        "tolerances": {
            "newton": tol,
            "cluster": CLUSTER_TOL,
            "exact_recognition": RECOGNITION_TOL,
            "resonance": EPS_NUM,
        },
        "enumeration": enum_info,
        "balances": balances,
    }


def render_table(rows: list[AnalysedBalance]) -> str:
    body = []
    for i, row in enumerate(rows):
        coeffs = "{" + ", ".join(str(c) if isinstance(c, FieldElem) else f"{complex(c):.6g}" for c in row.balance.coeffs) + "}"
        if row.report is None:
            res = "particular solution"
        else:
            res = row.report.pattern()
        trip = ""
        if row.label and row.label.startswith("T"):
            trip = row.label[1:].split(".")[0]
        body.append((str(i), coeffs, res, trip))
    header = ("#", "Coefficients {alpha, beta, gamma}", "Resonances", "Triplet")
    widths = [max(len(r[k]) for r in body + [header]) for k in range(4)]
    fmt = "  ".join("{:<" + str(w) + "}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*r).rstrip() for r in body]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    sys_ = load_system(args.path)
    rows, info = analyse(sys_, args.seed, args.tol, args.starts)
    if args.json:
        doc = analysis_document(sys_, rows, info, args.tol)
        print(json.dumps(doc, indent=2))
    if args.table or not args.json:
        print(render_table(rows))
    return EXIT_OK


def _pick_balance(rows: list[AnalysedBalance], key: str) -> AnalysedBalance:
    for i, row in enumerate(rows):
        if key == str(i) or (row.label is not None and key == row.label):
            return row
    raise InputError(f"no balance {key!r}; use an index from `analyze` or a label such as T1.1")


def cmd_series(args) -> int:
    sys_ = load_system(args.path)
    rows, _ = analyse(sys_, args.seed, args.tol, args.starts)
    row = _pick_balance(rows, args.balance)
    if row.report is None:
        raise ParticularBranchError(f"balance {row.balance} has a zero coefficient")
    rep = row.report
    notes = []
    if args.direction == "right":
        if rep.branch_class is not BranchClass.RIGHT:
            msg = f"branch is {rep.branch_class.value}; building the ascending half only"
            warnings.warn(msg, SeriesDirectionWarning, stacklevel=1)
            notes.append(msg)
        series, compat = build_right_series(sys_, rep, args.max_order, force=True)
        names = RIGHT_SERIES_T1_M1_SYMBOLS if row.label == "T1.1" else None
    else:
        if rep.branch_class is BranchClass.RIGHT:
            raise InputError("this branch has no negative non-generic resonances; no descending series")
        series = build_left_series(sys_, rep, args.max_order)
        compat = series.compatibility  # type: ignore[attr-defined]
        names = LEFT_SERIES_T3_M1_SYMBOLS if row.label == "T3.1" else None
    if args.named and names is None:
        raise InputError("named constants are only tabulated for T1.1 (right) and T3.1 (left)")
    shown = series.substitute(symbol_map(names)) if args.named else series
    if args.json:
        doc = shown.to_dict()
        doc["balance"] = {"index": rows.index(row), "label": row.label, "coeffs": [str(c) for c in row.balance.coeffs]}
        doc["compatibility"] = [c.to_dict() for c in compat]
        doc["symbol_names"] = dict(names) if args.named else None
        doc["notes"] = notes
        print(json.dumps(doc, indent=2))
        return EXIT_OK if series.halted_at is None else EXIT_ANALYSIS
    print(f"balance {rows.index(row)} {row.label or ''} {row.balance}  ({rep.branch_class.value})")
    print("injected constants:")
    for k in sorted(series.injected, key=abs):
        syms = series.injected[k]
        shown_syms = [f"{s} = {names[s]}" for s in syms] if args.named else syms
        print(f"  resonance {k}: {', '.join(shown_syms)}")
    if series.pinned:
        print(f"pinned to zero: {series.pinned}")
    print("compatibility:")
    for c in compat:
        print(f"  order {c.order}: {'consistent' if c.consistent else 'OBSTRUCTED'}")
    for k, coeffs in zip(shown.orders(), shown.coeffs):
        for v, c in zip(shown.var_names, coeffs):
            print(f"  [{v}] tau^{series.exponents[shown.var_names.index(v)] + k}: {c.to_text()}")
    return EXIT_OK if series.halted_at is None else EXIT_ANALYSIS


def cmd_verify_paper(args) -> int:
    from .acceptance import run_all

    numbers = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_all(numbers)
    if args.json:
        print(json.dumps([r.__dict__ for r in results], indent=2))
    else:
        for r in results:
            print(r.line())
        passed = sum(r.passed for r in results)
        print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if all(r.passed for r in results) else EXIT_ANALYSIS


def cmd_integrate(args) -> int:
    from .verify import integrate

    sys_ = load_system(args.path)
    try:
        init = [complex(x.replace("i", "j")) for x in args.init.split(",")]
        span = (complex(args.start.replace("i", "j")), complex(args.end.replace("i", "j")))
    except ValueError as exc:
        raise InputError(f"bad number: {exc}") from exc
    if len(init) != 2 * sys_.n:
        raise InputError(f"--init needs {2 * sys_.n} values (positions then velocities)")
    traj = integrate(sys_, init, span, args.tol)
    out = traj.to_csv()
    if args.output:
        Path(args.output).write_text(out)
    else:
        sys.stdout.write(out)
    if not traj.complete:
        print(f"warning: {traj.message}", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="painleve", description="Singularity analysis of polynomial ODE systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("path", help=f"system file (.ode), or {BUILTIN} for the built-in system")
        sp.add_argument("--seed", type=int, default=0, help="seed for the multi-start root search")
        sp.add_argument("--tol", type=float, default=1e-12, help="Newton convergence tolerance")
        sp.add_argument("--starts", type=int, default=10_000, help="number of Newton starts")
        sp.add_argument("--json", action="store_true", help="emit JSON")

    a = sub.add_parser("analyze", help="balances, resonances and branch classes")
    common(a)
    a.add_argument("--table", action="store_true", help="print the balance/resonance table")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("series", help="truncated Laurent series about one balance")
    common(s)
    s.add_argument("--balance", required=True, help="balance index from `analyze`, or a label like T1.1")
    s.add_argument("--direction", choices=("right", "left"), default="right")
    s.add_argument("--max-order", type=int, default=8, help="number of orders beyond the leading one")
    s.add_argument("--named", action="store_true", help="rename injected constants to the tabulated names")
    s.set_defaults(func=cmd_series)

    v = sub.add_parser("verify-paper", help="run the built-in acceptance checks")
    v.add_argument("--only", help="comma-separated check numbers")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify_paper)

    g = sub.add_parser("integrate", help="integrate a system and write a CSV trajectory")
    g.add_argument("path")
    g.add_argument("--init", required=True, help="comma-separated positions then velocities")
    g.add_argument("--start", default="0")
    g.add_argument("--end", default="1")
    g.add_argument("--tol", type=float, default=1e-10)
    g.add_argument("--output", "-o")
    g.set_defaults(func=cmd_integrate)
    return p


def _fail(args, code: int, payload: dict, text: str) -> int:
    if getattr(args, "json", False):
        print(json.dumps({"error": payload}, indent=2))
    else:
        print(f"error: {text}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except SystemParseError as exc:
        return _fail(args, EXIT_INPUT, exc.to_dict(), str(exc))
    except InputError as exc:
        return _fail(args, EXIT_INPUT, {"error": "input", "message": str(exc)}, str(exc))
    except (DominantBalanceError, ParticularBranchError, RootFindingError, NotImplementedError, ValueError) as exc:
        return _fail(args, EXIT_ANALYSIS, {"error": "analysis", "message": str(exc)}, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
