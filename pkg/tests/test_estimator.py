"""Analytic monthly estimates against a hand-derived oracle.

Every expected number below was worked out from the catalog rates and
the baseline assumptions by hand before the assertions were written:
500k total endpoint requests split 100k/100k/300k, 2.592M schedule
ticks, a diamond clipping external calls to the 100k pushed items,
5000 GB-months of video at $0.023, and 0.02 GB of table records.
"""

from fractions import Fraction as F

import pytest

from penny.assumptions import assemble
from penny.errors import NotAnEntryPoint, UnresolvedAssumption
from penny.estimator import (
    SECONDS_PER_MONTH,
    compare_catalogs,
    invocation_cost,
    monthly_cost,
    monthly_counts,
    report_from_counts,
    stock_at,
)
from penny.pricing import bind

from conftest import baseline_overrides

ORACLE_COUNTS = {
    "upload": F(100000),
    "upload.fn": F(100000),
    "videoStorage.put": F(100000),
    "queue.push": F(100000),
    "schedule.tick": F(2592000),
    "queue.pop": F(2592000),
    "httpPost": F(100000),
    "callback": F(100000),
    "callback.fn": F(100000),
    "transcripts.insert": F(100000),
    "search": F(300000),
    "search.fn": F(300000),
    "transcripts.list": F(300000),
}

# micro-USD per factor, month 1, acme-v1.
ORACLE_FACTORS = {
    "upload.requests": 100_000,
    "callback.requests": 100_000,
    "search.requests": 300_000,
    "upload.fn.gb_seconds": 166_667,       # 10000 GB-s at 16.6667
    "callback.fn.gb_seconds": 166_667,
    "search.fn.gb_seconds": 500_001,       # 30000 GB-s
    "videoStorage.put.requests": 500_000,  # 100k at $5/1M
    "videoStorage.put.storage": 115_000_000,  # 5000 GB-months at $0.023
    "queue.push.requests": 40_000,
    "queue.pop.requests": 1_036_800,       # 2.592M at $0.40/1M
    "httpPost.calls": 1_000_000_000,       # 100k at 10000 micro each
    "transcripts.insert.requests": 125_000,
    "transcripts.insert.storage": 5_000,   # 0.02 GB-months at $0.25
    "transcripts.list.requests": 75_000,
}

ORACLE_TOTAL = 1_118_115_135


def test_oracle_table_is_self_consistent():
    assert sum(ORACLE_FACTORS.values()) == ORACLE_TOTAL


def test_fixture_counts_exact(fixture_graph, fixture_assumptions):
    assert monthly_counts(fixture_graph, fixture_assumptions) == ORACLE_COUNTS


def test_fixture_month_one_report(fixture_model, fixture_assumptions):
    report = monthly_cost(fixture_model, fixture_assumptions, month=1)
    assert report.engine == "analytic"
    assert report.vendor == "acme-v1"
    assert report.month == 1
    by_factor = {c.factor_id: c.micro_usd for c in report.components}
    assert by_factor == ORACLE_FACTORS
    assert report.total_micro_usd == ORACLE_TOTAL
    assert report.unresolved == ()


def test_report_quantities(fixture_model, fixture_assumptions):
    report = monthly_cost(fixture_model, fixture_assumptions, month=1)
    qty = {c.factor_id: c.quantity for c in report.components}
    assert qty["upload.fn.gb_seconds"] == F(10000)
    assert qty["videoStorage.put.storage"] == F(5000)
    assert qty["transcripts.insert.storage"] == F(1, 50)
    assert qty["httpPost.calls"] == F(100000)


def test_second_month_doubles_only_storage(fixture_model, fixture_assumptions):
    first = monthly_cost(fixture_model, fixture_assumptions, month=1)
    second = monthly_cost(fixture_model, fixture_assumptions, month=2)
    a = {c.factor_id: c for c in first.components}
    b = {c.factor_id: c for c in second.components}
    for fid, cost in a.items():
        if cost.kind.value == "accumulating":
            assert b[fid].quantity == 2 * cost.quantity
            assert b[fid].micro_usd == 2 * cost.micro_usd
        else:
            assert b[fid].micro_usd == cost.micro_usd
    assert second.total_micro_usd == ORACLE_TOTAL + 115_000_000 + 5_000


def test_counts_scale_with_entry_traffic(fixture_graph):
    tripled = baseline_overrides()
    tripled["upload.requestsPerMonth"] = 300000
    tripled["search.requestsPerMonth"] = 900000
    counts = monthly_counts(fixture_graph, assemble(fixture_graph, tripled))
    base = ORACLE_COUNTS
    for node, count in counts.items():
        if node in ("schedule.tick", "queue.pop"):
            assert count == base[node]
        else:
            assert count == 3 * base[node]


def test_diamond_clips_to_the_starved_side(fixture_graph):
    heavy = baseline_overrides()
    heavy["upload.requestsPerMonth"] = 10_000_000
    counts = monthly_counts(fixture_graph, assemble(fixture_graph, heavy))
    assert counts["queue.push"] == F(10_000_000)
    assert counts["queue.pop"] == F(2_592_000)
    # More items pushed than the consumer can poll: outflow is tick-bound.
    assert counts["httpPost"] == F(2_592_000)
    assert counts["callback"] == F(2_592_000)


def test_tick_rate_drives_tick_count(fixture_graph):
    slower = baseline_overrides()
    slower["schedule.tick.rateSeconds"] = 60
    counts = monthly_counts(fixture_graph, assemble(fixture_graph, slower))
    assert counts["schedule.tick"] == F(SECONDS_PER_MONTH, 60)
    assert counts["httpPost"] == F(43200)  # starved side flipped


def test_nonpositive_tick_rate_is_an_error(fixture_graph):
    bad = baseline_overrides()
    bad["schedule.tick.rateSeconds"] = 0
    with pytest.raises(UnresolvedAssumption):
        monthly_counts(fixture_graph, assemble(fixture_graph, bad))


def test_stock_grows_linearly(fixture_model, fixture_assumptions):
    one = stock_at(fixture_model, fixture_assumptions, 1)
    five = stock_at(fixture_model, fixture_assumptions, 5)
    assert one["videoStorage.put.storage"] == F(5000)
    assert one["transcripts.insert.storage"] == F(1, 50)
    for fid, gb in one.items():
        assert five[fid] == 5 * gb
    with pytest.raises(ValueError):
        stock_at(fixture_model, fixture_assumptions, 0)


def test_unresolved_counts_stage_lists_entry_keys(fixture_graph):
    empty = assemble(fixture_graph)
    with pytest.raises(UnresolvedAssumption) as exc:
        monthly_counts(fixture_graph, empty)
    keys = exc.value.details["keys"]
    assert sorted(keys) == ["search.requestsPerMonth", "upload.requestsPerMonth"]


def test_unresolved_pricing_stage_lists_factor_keys(fixture_model, fixture_graph):
    rates_only = assemble(
        fixture_graph,
        {"upload.requestsPerMonth": 100000, "search.requestsPerMonth": 300000},
    )
    with pytest.raises(UnresolvedAssumption) as exc:
        monthly_cost(fixture_model, rates_only, 1)
    keys = set(exc.value.details["keys"])
    assert keys == {
        "upload.fn.memoryGb", "upload.fn.durationS",
        "callback.fn.memoryGb", "callback.fn.durationS",
        "search.fn.memoryGb", "search.fn.durationS",
    }


def test_month_must_be_positive(fixture_model, fixture_assumptions):
    with pytest.raises(ValueError):
        monthly_cost(fixture_model, fixture_assumptions, 0)


# -- per-invocation marginal cost ------------------------------------------

# One /upload request touches, with weight 1 each: the endpoint, its fn,
# the put (plus 0.05 GB stored for a month), the push, the external call
# (dominant side of the diamond), the callback endpoint and fn, and the
# insert (plus 200 bytes stored). The pop is tick-driven and excluded.
UPLOAD_MARGINAL = (
    F(1)                                # upload request at $1/1M
    + F(1, 10) * F(16666700, 1000000)   # 0.1 GB-s of compute
    + F(5)                              # put request
    + F(1, 20) * F(23000)               # 0.05 GB stored, one month
    + F(2, 5)                           # push
    + F(10000)                          # external call at its quoted price
    + F(1)                              # callback request
    + F(1, 10) * F(16666700, 1000000)   # callback fn
    + F(125, 100)                       # insert
    + F(200, 10**9) * F(250000)         # record storage, one month
)


def test_upload_invocation_cost(fixture_model, fixture_assumptions):
    got = invocation_cost(fixture_model, fixture_assumptions, "upload")
    assert got == UPLOAD_MARGINAL
    assert got == F(1116203334, 100000)


def test_search_invocation_cost(fixture_model, fixture_assumptions):
    got = invocation_cost(fixture_model, fixture_assumptions, "search")
    assert got == F(1) + F(1, 10) * F(16666700, 1000000) + F(25, 100)


def test_invocation_cost_rejects_non_entries(fixture_model, fixture_assumptions):
    with pytest.raises(NotAnEntryPoint):
        invocation_cost(fixture_model, fixture_assumptions, "callback")
    with pytest.raises(NotAnEntryPoint):
        invocation_cost(fixture_model, fixture_assumptions, "nope")


# -- vendor comparison -------------------------------------------------------


def test_compare_catalogs_deltas(fixture_graph, fixture_assumptions, acme, zephyr):
    rows = compare_catalogs(fixture_graph, fixture_assumptions, [acme, zephyr], month=1)
    assert [r.vendor for r in rows] == ["acme-v1", "zephyr-v1"]
    assert rows[0].total_micro_usd == ORACLE_TOTAL
    assert all(d == 0 for d in rows[0].node_deltas.values())

    # zephyr doubles the per-GB-second rate and changes nothing else.
    zep = rows[1]
    assert zep.total_micro_usd == ORACLE_TOTAL + 833_335
    nonzero = {n: d for n, d in zep.node_deltas.items() if d != 0}
    assert nonzero == {
        "upload.fn": 166_667,
        "callback.fn": 166_667,
        "search.fn": 500_001,
    }


def test_reports_share_one_pricing_path(fixture_model, fixture_assumptions):
    counts = monthly_counts(fixture_model, fixture_assumptions)
    direct = report_from_counts(
        fixture_model, fixture_assumptions, 1, counts, "analytic"
    )
    assert direct == monthly_cost(fixture_model, fixture_assumptions, 1)
