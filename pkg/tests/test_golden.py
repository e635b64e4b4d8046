"""The committed report bytes for the worked example must never drift.

The numbers are derived by hand in transcription-acme-month1.md; the
JSON next to it is the exact canonical output. Any code change that
shifts a single byte here needs the ledger redone first.
"""

from __future__ import annotations

import json

from penny.estimator import monthly_cost
from penny.export import render_report

from conftest import GOLDEN_DIR

GOLDEN = GOLDEN_DIR / "transcription-acme-month1.json"


def test_month_one_report_matches_committed_bytes(fixture_model, fixture_assumptions):
    report = monthly_cost(fixture_model, fixture_assumptions, 1, 1)
    assert render_report(report).encode("utf-8") == GOLDEN.read_bytes()


def test_golden_totals_agree_with_the_ledger():
    doc = json.loads(GOLDEN.read_bytes())
    factor_sum = sum(
        factor["micro_usd"] for node in doc["nodes"] for factor in node["factors"]
    )
    assert factor_sum == doc["total_micro_usd"] == 1_118_115_135
    assert doc["total_display"] == "$1118.115135"


def test_simulation_reproduces_the_golden_bytes(fixture_model, fixture_assumptions):
    from penny.simulate import simulate_month

    report = simulate_month(fixture_model, fixture_assumptions, 1, seed=3)
    doc = json.loads(render_report(report))
    golden = json.loads(GOLDEN.read_bytes())
    # The engine tag differs by construction; every billed number must not.
    assert doc["engine"].startswith("sim:")
    doc["engine"] = golden["engine"]
    assert doc == golden
