from __future__ import annotations

import dataclasses
import json
import subprocess
import sys

import jsonschema
import pytest

from painleve.acceptance import check_table
from painleve.algebra import FieldElem
from painleve.cli import main, schema_path
from painleve.fixtures import TABLE_I
from painleve.system import BUILTIN_SYSTEM_TEXT

FAST = ["--starts", "3000"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def ode_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("ode") / "system.ode"
    path.write_text(BUILTIN_SYSTEM_TEXT)
    return str(path)


def test_table_matches_the_fixture_row_for_row(capsys, ode_file):
    code, out, _ = run(capsys, "analyze", ode_file, "--table", *FAST)
    assert code == 0
    lines = out.strip().splitlines()[2:]
    assert len(lines) == 27
    for line, row in zip(lines, TABLE_I):
        coeffs = "{" + ", ".join(str(c) for c in row.coeffs) + "}"
        assert coeffs in line
        if row.has_zero:
            assert "particular solution" in line
        else:
            pattern = ", ".join(str(v) if m == 1 else f"{v}({m})" for v, m in row.resonances)
            assert line.split("  ")[-1].strip() == str(row.triplet)
            assert pattern in line


def test_json_document_validates_and_is_byte_stable(capsys, ode_file):
    code, first, _ = run(capsys, "analyze", ode_file, "--json", "--seed", "7", *FAST)
    assert code == 0
    _, second, _ = run(capsys, "analyze", ode_file, "--json", "--seed", "7", *FAST)
    assert first == second
    doc = json.loads(first)
    schema = json.loads(schema_path().read_text())
    jsonschema.validate(doc, schema)
    assert doc["enumeration"]["found"] == 27 and doc["enumeration"]["seed"] == 7
    labelled = [b for b in doc["balances"] if b["resonances"]]
    assert len(labelled) == 24
    assert {b["resonances"]["branch_class"] for b in labelled} == {"RightSeries", "MixedAnnulus"}


def test_seed_changes_nothing_exact(capsys):
    _, a, _ = run(capsys, "analyze", "@builtin", "--json", "--seed", "1", *FAST)
    _, b, _ = run(capsys, "analyze", "@builtin", "--json", "--seed", "2", *FAST)
    strip = lambda d: [x["coeffs"] for x in json.loads(d)["balances"]]  # noqa: E731
    assert strip(a) == strip(b)


def test_bad_input_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.ode"
    bad.write_text("vars x, y\nx'' = x\ny'' = x/y\n")
    code, out, err = run(capsys, "analyze", str(bad))
    assert code == 2 and "line 3, column 8" in err and not out
    code, out, _ = run(capsys, "analyze", str(bad), "--json")
    assert code == 2
    assert json.loads(out) == {
        "error": {"error": "non-polynomial", "message": "division by a non-constant expression", "line": 3, "column": 8}
    }


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "nope.ode"))
    assert code == 2 and "nope.ode" in err


def test_analysis_failure_exit_code(capsys, tmp_path):
    path = tmp_path / "x.ode"
    path.write_text("x'' = x^2\ny'' = y\n")
    code, _, err = run(capsys, "analyze", str(path))
    assert code == 1 and "exponent" in err


def test_series_named_right(capsys):
    code, out, _ = run(capsys, "series", "@builtin", "--balance", "T1.1", "--max-order", "2", "--named", *FAST)
    assert code == 0
    assert "resonance 1: r1_0 = a0, r1_1 = b0, r1_2 = c0" in out
    assert "[x] tau^1: -a0^2 - 2*a0*b0 - 2*a0*c0 - b0^2 - 2*b0*c0 - c0^2 - b1 - c1" in out
    assert "order 2: consistent" in out


def test_series_leading_term_only(capsys):
    code, out, _ = run(capsys, "series", "@builtin", "--balance", "1", "--max-order", "0", "--json", *FAST)
    doc = json.loads(out)
    assert code == 0 and len(doc["orders"]) == 1
    assert doc["orders"][0]["coeffs"] == {"x": "1/3", "y": "1/3", "z": "1/3"}
    assert doc["injected"] == {} and doc["compatibility"] == []


def test_series_left(capsys):
    code, out, _ = run(
        capsys, "series", "@builtin", "--balance", "T3.1", "--direction", "left", "--max-order", "3", "--json", *FAST
    )
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "Descending"
    assert doc["injected"] == {"-1": ["rm1_0", "rm1_1"]}
    assert [o["order"] for o in doc["orders"]] == [0, -1, -2, -3]


def test_forcing_a_direction_warns(capsys):
    with pytest.warns(UserWarning, match="MixedAnnulus"):
        code, out, _ = run(capsys, "series", "@builtin", "--balance", "T3.1", "--max-order", "1", "--json", *FAST)
    assert json.loads(out)["notes"] and code == 0


def test_series_input_errors(capsys):
    code, _, err = run(capsys, "series", "@builtin", "--balance", "T9.9", *FAST)
    assert code == 2 and "T9.9" in err
    code, _, _ = run(capsys, "series", "@builtin", "--balance", "T1.1", "--direction", "left", *FAST)
    assert code == 2
    code, _, _ = run(capsys, "series", "@builtin", "--balance", "0", *FAST)
    assert code == 1  # zero-coefficient balance


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "1,3,4")
    assert code == 0 and "3/3 checks passed" in out
    assert out.count("[PASS]") == 3


def test_verify_reports_failures(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "6", "--json")
    doc = json.loads(out)
    assert code == 1 and doc[0]["number"] == 6 and doc[0]["passed"] is False
    assert "tau^-3" in doc[0]["detail"]


def test_mutated_fixture_names_the_row():
    rows = list(TABLE_I)
    k = next(i for i, r in enumerate(rows) if r.label == "T5.2")
    bad = rows[k].coeffs
    rows[k] = dataclasses.replace(rows[k], coeffs=(bad[0], bad[1] + FieldElem(1), bad[2]))
    ok, detail = check_table(rows)
    assert not ok and "T5.2" in detail
    assert "T5.1" not in detail


def test_integrate_writes_csv(capsys, tmp_path):
    out = tmp_path / "traj.csv"
    code, _, _ = run(
        capsys, "integrate", "@builtin", "--init", "0.3,0.2,0.1,0,0,0", "--end", "0.5", "-o", str(out)
    )
    assert code == 0
    header, *rows = out.read_text().splitlines()
    assert header.startswith("t_re,t_im,x_re,x_im,dx_re,dx_im")
    assert float(rows[-1].split(",")[0]) == pytest.approx(0.5)


def test_integrate_rejects_bad_init(capsys):
    code, _, err = run(capsys, "integrate", "@builtin", "--init", "1,2")
    assert code == 2 and "6 values" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "painleve", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("painleve ")
