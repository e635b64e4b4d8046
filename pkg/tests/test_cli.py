"""Command-line behavior: exit codes, output channels, --assume parsing."""

from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from penny.cli import _parse_assumes, main
from penny.errors import PennyError
from penny.estimator import monthly_cost
from penny.export import canon, graph_doc, render_report

from conftest import BASELINE_ASSUMPTIONS, CATALOG_DIR, FIXTURE

ACME = str(CATALOG_DIR / "acme-v1.json")
ZEPHYR = str(CATALOG_DIR / "zephyr-v1.json")
PROGRAM = str(FIXTURE)

ASSUME_ARGS = [f"--assume={key}={value}" for key, value in BASELINE_ASSUMPTIONS.items()]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- analyze -------------------------------------------------------------


def test_analyze_emits_canonical_graph(capsys, fixture_graph):
    code, out, err = run(capsys, "analyze", PROGRAM)
    assert code == 0
    assert err == ""
    assert out == canon(graph_doc(fixture_graph, 1))
    assert len(json.loads(out)["nodes"]) == 13


def test_analyze_dot_format(capsys):
    code, out, _ = run(capsys, "analyze", PROGRAM, "--format", "dot")
    assert code == 0
    assert out.startswith("digraph cost {")


def test_analyze_missing_file(capsys):
    code, out, err = run(capsys, "analyze", "/no/such/file.w")
    assert code == 1
    assert out == ""
    assert err != ""


def test_analyze_syntax_error_is_code_one(tmp_path, capsys):
    bad = tmp_path / "bad.w"
    bad.write_text("let x = ;\n", encoding="utf-8")
    code, _, err = run(capsys, "analyze", str(bad), "--json")
    assert code == 1
    doc = json.loads(err.strip())
    assert doc["error"] == "ParseError"
    assert "span" in doc


# -- cost ----------------------------------------------------------------


def test_cost_json_is_the_render_report_bytes(capsys, fixture_model, fixture_assumptions):
    code, out, err = run(capsys, "cost", PROGRAM, "--catalog", ACME, "--json", *ASSUME_ARGS)
    assert code == 0
    assert err == ""
    assert out == render_report(monthly_cost(fixture_model, fixture_assumptions, 1))
    assert json.loads(out)["total_micro_usd"] == 1_118_115_135


def test_cost_table_output(capsys):
    code, out, _ = run(capsys, "cost", PROGRAM, "--catalog", ACME, *ASSUME_ARGS)
    assert code == 0
    assert out.rstrip().endswith("$1118.115135")
    assert "$115.000000" in out


def test_cost_unresolved_exits_two(capsys):
    code, out, err = run(capsys, "cost", PROGRAM, "--catalog", ACME, "--json")
    assert code == 2
    assert out == ""
    doc = json.loads(err.strip())
    assert doc["error"] == "UnresolvedAssumption"
    assert doc["keys"] == ["search.requestsPerMonth", "upload.requestsPerMonth"]


def test_cost_unresolved_plain_diagnostic_names_keys(capsys):
    code, _, err = run(capsys, "cost", PROGRAM, "--catalog", ACME)
    assert code == 2
    assert err.startswith("penny: ")
    assert "upload.requestsPerMonth" in err


def test_cost_bad_month(capsys):
    code, _, err = run(capsys, "cost", PROGRAM, "--catalog", ACME, "--month", "0", *ASSUME_ARGS)
    assert code == 1
    assert "month" in err


def test_cost_unknown_assume_warns_but_runs(capsys):
    code, out, err = run(
        capsys, "cost", PROGRAM, "--catalog", ACME, "--assume=ghost.rate=5", *ASSUME_ARGS
    )
    assert code == 0
    assert "ghost.rate" in err
    assert out.rstrip().endswith("$1118.115135")


def test_cost_unknown_assume_strict_fails(capsys):
    code, out, err = run(
        capsys, "cost", PROGRAM, "--catalog", ACME, "--strict", "--json",
        "--assume=ghost.rate=5", *ASSUME_ARGS,
    )
    assert code == 1
    assert out == ""
    assert json.loads(err.strip())["keys"] == ["ghost.rate"]


def test_cost_malformed_assume(capsys):
    code, _, err = run(capsys, "cost", PROGRAM, "--catalog", ACME, "--assume=novalue")
    assert code == 1
    assert "KEY=VALUE" in err


def test_usage_errors_are_code_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cost", PROGRAM])  # --catalog is required
    assert exc.value.code == 1


# -- --assume value grammar ----------------------------------------------


def test_assume_value_parsing():
    parsed = _parse_assumes(
        ["a=12", "b=0.5", "c=3/7", "d=true", "e=false", "f=m5.large"]
    )
    assert parsed == {
        "a": 12,
        "b": Fraction(1, 2),
        "c": Fraction(3, 7),
        "d": True,
        "e": False,
        "f": "m5.large",
    }
    for bad in ("novalue", "=5"):
        with pytest.raises(PennyError):
            _parse_assumes([bad])


# -- compare -------------------------------------------------------------


def test_compare_json(capsys):
    code, out, _ = run(
        capsys, "compare", PROGRAM, "--catalog", ACME, "--catalog", ZEPHYR, "--json", *ASSUME_ARGS
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["baseline"] == "acme-v1"
    totals = {c["vendor"]: c["total_micro_usd"] for c in doc["comparisons"]}
    assert totals == {"acme-v1": 1_118_115_135, "zephyr-v1": 1_118_948_470}


def test_compare_table(capsys):
    code, out, _ = run(
        capsys, "compare", PROGRAM, "--catalog", ACME, "--catalog", ZEPHYR, *ASSUME_ARGS
    )
    assert code == 0
    assert "+$0.833335" in out


# -- simulate ------------------------------------------------------------


def test_simulate_agrees_with_analytic(capsys):
    code, out, _ = run(
        capsys, "simulate", PROGRAM, "--catalog", ACME, "--json", "--seed", "7", *ASSUME_ARGS
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["engine"].startswith("sim:")
    assert doc["report"]["total_micro_usd"] == 1_118_115_135
    assert doc["total_delta_micro_usd"] == 0
    assert doc["count_deltas"] == {}


def test_simulate_table_reports_delta(capsys):
    code, out, _ = run(capsys, "simulate", PROGRAM, "--catalog", ACME, *ASSUME_ARGS)
    assert code == 0
    assert "delta $0.000000" in out


# -- installed entry point -----------------------------------------------


def test_console_script_round_trip():
    proc = subprocess.run(
        ["penny", "cost", PROGRAM, "--catalog", ACME, "--json", *ASSUME_ARGS],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["total_micro_usd"] == 1_118_115_135


def test_module_invocation_matches_script():
    argv = ["cost", PROGRAM, "--catalog", ACME, "--json", *ASSUME_ARGS]
    script = subprocess.run(["penny", *argv], capture_output=True, text=True)
    module = subprocess.run(
        [sys.executable, "-m", "penny.cli", *argv], capture_output=True, text=True
    )
    assert module.returncode == script.returncode == 0
    assert module.stdout == script.stdout
