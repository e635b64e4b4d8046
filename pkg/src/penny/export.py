"""Serialization: canonical JSON documents, DOT graphs, and the plain
tables the CLI prints.

Canonical form is the contract: sorted keys, no whitespace, UTF-8
untouched, one trailing newline. The CLI and the HTTP service both
render through here, which is what makes their outputs byte-identical
for identical inputs.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .estimator import CostReport
from .graph import CatalogueRow, CostGraph, factor_catalogue
from .money import display_usd

__all__ = [
    "canon",
    "rational_str",
    "report_doc",
    "render_report",
    "graph_doc",
    "render_graph",
    "render_dot",
    "report_table",
    "compare_table",
]


def rational_str(value: Fraction) -> str:
    """Exact decimal-free rendering: integers bare, otherwise p/q."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def canon(doc: object) -> str:
    """The one true JSON serialization of a document."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def report_doc(report: CostReport) -> dict:
    nodes: dict[str, dict] = {}
    order: list[str] = []
    for c in report.components:
        if c.node_id not in nodes:
            nodes[c.node_id] = {
                "id": c.node_id,
                "count": rational_str(report.counts.get(c.node_id, Fraction(0))),
                "factors": [],
            }
            order.append(c.node_id)
        nodes[c.node_id]["factors"].append(
            {
                "id": c.factor_id,
                "kind": c.kind.value,
                "origin": c.origin,
                "unit": c.unit,
                "quantity": rational_str(c.quantity),
                "micro_usd": c.micro_usd,
                "display": display_usd(c.micro_usd),
            }
        )
    return {
        "currency": "USD_micro",
        "engine": report.engine,
        "month": report.month,
        "vendor": report.vendor,
        "source_version": report.source_version,
        "nodes": [nodes[nid] for nid in order],
        "total_micro_usd": report.total_micro_usd,
        "total_display": display_usd(report.total_micro_usd),
        "unresolved": list(report.unresolved),
    }


def render_report(report: CostReport) -> str:
    return canon(report_doc(report))


def graph_doc(
    graph: CostGraph,
    source_version: int = 1,
    catalogue: Sequence[CatalogueRow] | None = None,
) -> dict:
    if catalogue is None:
        catalogue = factor_catalogue(graph)
    with_inflow = {e.dst for e in graph.edges}
    return {
        "source_version": source_version,
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "class": n.node_class.value,
                "method": n.method,
                "span": n.span.to_doc(),
                "factors": [
                    {
                        "id": f.id,
                        "kind": f.kind.value,
                        "origin": f.origin.value,
                        "unit": f.unit,
                        "quantity_spec": f.quantity_spec,
                        "value_source": f.value_source,
                        "requires": list(f.requires),
                    }
                    for f in n.factors
                ],
            }
            for n in graph.nodes
        ],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "kind": e.kind.value,
                "weight": rational_str(e.weight),
            }
            for e in graph.edges
        ],
        "diamonds": [
            {
                "node": d.node_id,
                "dominant": list(d.dominant),
                "secondary": list(d.secondary),
            }
            for d in graph.diamonds
        ],
        "entry_points": [n.id for n in graph.nodes if n.id not in with_inflow],
        "required_inputs": [row.to_doc() for row in catalogue],
    }


def render_graph(
    graph: CostGraph,
    source_version: int = 1,
    catalogue: Sequence[CatalogueRow] | None = None,
) -> str:
    return canon(graph_doc(graph, source_version, catalogue))


_EDGE_STYLE = {
    "sync": "",
    "deferred": ' style=dashed',
    "implicit_dominant": ' color="gray40"',
    "implicit_secondary": ' style=dotted arrowhead=empty',
}


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def render_dot(graph: CostGraph) -> str:
    """Graphviz rendering: invocation factors as circles, accumulating
    factors as squares in the node label, deferred flow dashed, each
    queue junction drawn as a diamond."""
    lines = ["digraph cost {", "  rankdir=LR;", '  node [shape=box fontname="Helvetica"];']
    for n in graph.nodes:
        glyphs = "".join(
            "■" if f.kind.value == "accumulating" else "●" for f in n.factors
        )
        second = _dot_escape(n.label) + (f"  {glyphs}" if glyphs else "")
        lines.append(f'  "{_dot_escape(n.id)}" [label="{_dot_escape(n.id)}\\n{second}"];')
    diamond_edges: dict[int, str] = {}
    for d in graph.diamonds:
        junction = f"{d.node_id}__diamond"
        lines.append(f'  "{_dot_escape(junction)}" [shape=diamond label="" width=0.25];')
        for idx in d.dominant + d.secondary:
            diamond_edges[idx] = junction
    for i, e in enumerate(graph.edges):
        style = _EDGE_STYLE.get(e.kind.value, "")
        weight = "" if e.weight == 1 else f' label="{rational_str(e.weight)}"'
        if i in diamond_edges:
            junction = diamond_edges[i]
            lines.append(
                f'  "{_dot_escape(e.src)}" -> "{_dot_escape(junction)}" [{style.strip()}{weight}];'
            )
        else:
            attrs = (style.strip() + weight).strip()
            suffix = f" [{attrs}]" if attrs else ""
            lines.append(f'  "{_dot_escape(e.src)}" -> "{_dot_escape(e.dst)}"{suffix};')
    for d in graph.diamonds:
        junction = f"{d.node_id}__diamond"
        lines.append(f'  "{_dot_escape(junction)}" -> "{_dot_escape(d.node_id)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def report_table(report: CostReport) -> str:
    """Fixed-width table for terminals."""
    rows: list[tuple[str, str, str, str]] = []
    for c in report.components:
        rows.append((c.node_id, c.factor_id, rational_str(c.quantity), display_usd(c.micro_usd)))
    widths = [
        max((len(r[i]) for r in rows), default=8) for i in range(3)
    ]
    widths = [max(w, len(h)) for w, h in zip(widths, ("node", "factor", "quantity"))]
    lines = [
        f"{'node':<{widths[0]}}  {'factor':<{widths[1]}}  {'quantity':>{widths[2]}}  cost"
    ]
    for node_id, factor_id, qty, cost in rows:
        lines.append(
            f"{node_id:<{widths[0]}}  {factor_id:<{widths[1]}}  {qty:>{widths[2]}}  {cost}"
        )
    lines.append("")
    lines.append(
        f"month {report.month}  vendor {report.vendor}  total {display_usd(report.total_micro_usd)}"
    )
    return "\n".join(lines) + "\n"


def compare_table(comparisons: Iterable) -> str:
    lines = [f"{'vendor':<16}  {'total':>16}  {'delta':>16}"]
    baseline: int | None = None
    for comp in comparisons:
        if baseline is None:
            baseline = comp.total_micro_usd
        delta = comp.total_micro_usd - baseline
        delta_text = display_usd(delta)
        if delta > 0:
            delta_text = "+" + delta_text
        lines.append(
            f"{comp.vendor:<16}  {display_usd(comp.total_micro_usd):>16}  {delta_text:>16}"
        )
    return "\n".join(lines) + "\n"
