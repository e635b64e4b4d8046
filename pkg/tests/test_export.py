"""Canonical JSON, DOT output, and the human tables."""

import json
from fractions import Fraction as F

from penny.estimator import compare_catalogs, monthly_cost
from penny.export import (
    canon,
    compare_table,
    graph_doc,
    rational_str,
    render_dot,
    render_graph,
    render_report,
    report_doc,
    report_table,
)


def test_rational_rendering():
    assert rational_str(F(5)) == "5"
    assert rational_str(F(0)) == "0"
    assert rational_str(F(1, 3)) == "1/3"
    assert rational_str(F(-7, 2)) == "-7/2"


def test_canon_is_sorted_compact_and_newline_terminated():
    text = canon({"b": 1, "a": [1, 2], "café": "naïve"})
    assert text == '{"a":[1,2],"b":1,"café":"naïve"}\n'
    assert json.loads(text) == {"b": 1, "a": [1, 2], "café": "naïve"}


def test_canon_is_deterministic():
    doc = {"z": 1, "m": {"q": [3, 2, 1], "p": None}, "a": True}
    assert canon(doc) == canon(json.loads(canon(doc)))


def test_report_doc_shape(fixture_model, fixture_assumptions):
    report = monthly_cost(fixture_model, fixture_assumptions, 1)
    doc = report_doc(report)
    assert doc["currency"] == "USD_micro"
    assert doc["engine"] == "analytic"
    assert doc["vendor"] == "acme-v1"
    assert doc["total_micro_usd"] == 1_118_115_135
    assert doc["total_display"] == "$1118.115135"
    assert doc["unresolved"] == []
    upload = next(n for n in doc["nodes"] if n["id"] == "upload")
    assert upload["count"] == "100000"
    factor = upload["factors"][0]
    assert set(factor) == {"id", "kind", "origin", "unit", "quantity", "micro_usd", "display"}
    json.dumps(doc)


def test_render_report_bytes_are_reproducible(fixture_model, fixture_assumptions):
    a = render_report(monthly_cost(fixture_model, fixture_assumptions, 1))
    b = render_report(monthly_cost(fixture_model, fixture_assumptions, 1))
    assert a == b
    assert a.endswith("\n")
    assert " " not in a.split('"total_display"')[0].split("}")[-1]


def test_graph_doc_shape(fixture_graph):
    doc = graph_doc(fixture_graph)
    assert {n["id"] for n in doc["nodes"]} == {n.id for n in fixture_graph.nodes}
    assert len(doc["edges"]) == len(fixture_graph.edges)
    assert doc["diamonds"] == [
        {
            "node": "httpPost",
            "dominant": list(fixture_graph.diamonds[0].dominant),
            "secondary": list(fixture_graph.diamonds[0].secondary),
        }
    ]
    assert sorted(doc["entry_points"]) == ["schedule.tick", "search", "upload"]
    required = {r["id"]: r for r in doc["required_inputs"]}
    assert not required["upload.requestsPerMonth"]["resolved"]
    assert required["callback.requestsPerMonth"]["value_source"] == "inferred"
    json.dumps(doc)
    assert render_graph(fixture_graph) == canon(doc)


def test_graph_doc_spans_point_into_source(fixture_graph, fixture_text):
    doc = graph_doc(fixture_graph)
    data = fixture_text.encode()
    upload = next(n for n in doc["nodes"] if n["id"] == "upload")
    start, end = upload["span"]["start"], upload["span"]["end"]
    assert data[start:end].decode().startswith("api.post")


def test_dot_output(fixture_graph):
    dot = render_dot(fixture_graph)
    assert dot.startswith("digraph cost {")
    assert dot.rstrip().endswith("}")
    assert dot.count("{") == dot.count("}")
    # One junction for the single diamond, wired through to its node.
    assert '"httpPost__diamond" [shape=diamond' in dot
    assert '"httpPost__diamond" -> "httpPost"' in dot
    assert '"queue.push" -> "httpPost__diamond" [color="gray40"]' in dot
    assert '"queue.pop" -> "httpPost__diamond" [style=dotted arrowhead=empty]' in dot
    # Deferred edges are dashed; plain sync edges carry no style.
    assert '"upload" -> "upload.fn" [style=dashed]' in dot
    assert '"upload.fn" -> "videoStorage.put"];' not in dot  # sanity on quoting
    assert '"upload.fn" -> "videoStorage.put"' in dot


def test_dot_marks_factor_kinds(fixture_graph):
    dot = render_dot(fixture_graph)
    put_line = next(line for line in dot.splitlines() if line.strip().startswith('"videoStorage.put" ['))
    assert "●" in put_line and "■" in put_line
    tick_line = next(line for line in dot.splitlines() if line.strip().startswith('"schedule.tick" ['))
    assert "●" not in tick_line and "■" not in tick_line


def test_report_table_spot_values(fixture_model, fixture_assumptions):
    table = report_table(monthly_cost(fixture_model, fixture_assumptions, 1))
    assert "$115.000000" in table       # video storage for the month
    assert "$1.036800" in table         # the 1s poll
    assert "$0.500000" in table         # put requests
    assert table.rstrip().splitlines()[-1].endswith("$1118.115135")


def test_compare_table_marks_deltas(fixture_graph, fixture_assumptions, acme, zephyr):
    rows = compare_catalogs(fixture_graph, fixture_assumptions, [acme, zephyr], 1)
    table = compare_table(rows)
    assert "acme-v1" in table and "zephyr-v1" in table
    assert "+$0.833335" in table
    assert "$1118.115135" in table and "$1118.948470" in table
