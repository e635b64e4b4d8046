"""Cost-model graph: nodes, the factor taxonomy, and typed flow edges.

Nodes are the application parts that incur cost. Each carries factors
classified along two axes: kind (invocation / fixed / accumulating)
and origin (external / internal). Edges carry the control-flow type:
synchronous calls, deferred jumps (triggers, endpoint dispatch), and
the two halves of an implicit diamond where a producer's items meet a
polling consumer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .source import Span

__all__ = [
    "NodeClass",
    "FactorKind",
    "Origin",
    "EdgeKind",
    "CostFactor",
    "CostNode",
    "FlowEdge",
    "Diamond",
    "SourceValue",
    "CostGraph",
    "Finding",
    "validate",
    "factor_catalogue",
    "CatalogueRow",
]


class NodeClass(Enum):
    ENDPOINT = "Endpoint"
    FUNCTION = "Function"
    BUCKET_OP = "BucketOp"
    QUEUE_OP = "QueueOp"
    TABLE_OP = "TableOp"
    SCHEDULE_TICK = "ScheduleTick"
    EXTERNAL_HTTP_CALL = "ExternalHttpCall"


class FactorKind(Enum):
    INVOCATION = "invocation"
    FIXED = "fixed"
    ACCUMULATING = "accumulating"


class Origin(Enum):
    EXTERNAL = "external"
    INTERNAL = "internal"


class EdgeKind(Enum):
    SYNC = "sync"
    DEFERRED = "deferred"
    IMPLICIT_DOMINANT = "implicit_dominant"
    IMPLICIT_SECONDARY = "implicit_secondary"


@dataclass(frozen=True)
class CostFactor:
    id: str
    kind: FactorKind
    origin: Origin
    unit: str
    quantity_spec: str
    value_source: str
    # Assumption keys that must resolve before this factor can be
    # quantified (and, for user-priced factors, priced).
    requires: tuple[str, ...] = ()
    user_price_key: str | None = None


@dataclass(frozen=True)
class CostNode:
    id: str
    label: str
    node_class: NodeClass
    span: Span
    factors: tuple[CostFactor, ...] = ()
    method: str | None = None

    def rule_classes(self) -> tuple[str, ...]:
        """Catalog lookup keys, most specific first."""
        base = self.node_class.value
        if self.method:
            return (f"{base}:{self.method}", base)
        return (base,)


@dataclass(frozen=True)
class FlowEdge:
    src: str
    dst: str
    kind: EdgeKind
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class Diamond:
    """An implicit junction; edge indexes point into CostGraph.edges."""

    node_id: str
    dominant: tuple[int, ...]
    secondary: tuple[int, ...]


@dataclass(frozen=True)
class SourceValue:
    """An assumption value recovered from the source text itself."""

    key: str
    value: object
    provenance: str  # "annotation" | "source"


@dataclass(frozen=True)
class CostGraph:
    nodes: tuple[CostNode, ...]
    edges: tuple[FlowEdge, ...]
    diamonds: tuple[Diamond, ...]
    source_values: tuple[SourceValue, ...] = ()
    _by_id: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._by_id.update({n.id: n for n in self.nodes})

    def node(self, node_id: str) -> CostNode:
        return self._by_id[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def in_edges(self, node_id: str) -> list[FlowEdge]:
        return [e for e in self.edges if e.dst == node_id]

    def out_edges(self, node_id: str) -> list[FlowEdge]:
        return [e for e in self.edges if e.src == node_id]

    def diamond_for(self, node_id: str) -> Diamond | None:
        for d in self.diamonds:
            if d.node_id == node_id:
                return d
        return None


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    subject: str


_MANDATORY = {
    NodeClass.ENDPOINT: {("invocation", "request")},
    NodeClass.FUNCTION: {("invocation", "gb_second")},
    NodeClass.QUEUE_OP: {("invocation", "request")},
    NodeClass.SCHEDULE_TICK: set(),
    NodeClass.EXTERNAL_HTTP_CALL: {("invocation", "call")},
}


def _mandatory_for(node: CostNode) -> set[tuple[str, str]]:
    if node.node_class is NodeClass.BUCKET_OP:
        if node.method == "put":
            return {("invocation", "request"), ("accumulating", "gb_month")}
        return {("invocation", "request")}
    if node.node_class is NodeClass.TABLE_OP:
        if node.method == "insert":
            return {("invocation", "request"), ("accumulating", "gb_month")}
        return {("invocation", "request")}
    return _MANDATORY.get(node.node_class, set())


def validate(graph: CostGraph) -> list[Finding]:
    """Structural checks; a clean graph is accepted by the estimator."""
    findings: list[Finding] = []
    seen_ids: set[str] = set()
    for node in graph.nodes:
        if node.id in seen_ids:
            findings.append(Finding("DuplicateNodeId", f"node id {node.id!r} appears twice", node.id))
        seen_ids.add(node.id)
        have = {(f.kind.value, f.unit) for f in node.factors}
        for kind, unit in _mandatory_for(node) - have:
            findings.append(
                Finding(
                    "MissingFactor",
                    f"{node.node_class.value} node {node.id!r} lacks its {kind}({unit}) factor",
                    node.id,
                )
            )
    implicit_edges: set[int] = set()
    for i, edge in enumerate(graph.edges):
        for end in (edge.src, edge.dst):
            if end not in seen_ids:
                findings.append(Finding("DanglingEdge", f"edge references unknown node {end!r}", end))
        if edge.weight < 0:
            findings.append(
                Finding("NegativeWeight", f"edge {edge.src}->{edge.dst} has weight {edge.weight}", edge.src)
            )
        if edge.kind in (EdgeKind.IMPLICIT_DOMINANT, EdgeKind.IMPLICIT_SECONDARY):
            implicit_edges.add(i)
    claimed: set[int] = set()
    for diamond in graph.diamonds:
        if not graph.has_node(diamond.node_id):
            findings.append(
                Finding("MalformedDiamond", f"diamond on unknown node {diamond.node_id!r}", diamond.node_id)
            )
            continue
        for idx in (*diamond.dominant, *diamond.secondary):
            if idx in claimed:
                findings.append(
                    Finding("MalformedDiamond", f"edge #{idx} claimed by two diamonds", diamond.node_id)
                )
            claimed.add(idx)
            if idx >= len(graph.edges) or graph.edges[idx].dst != diamond.node_id:
                findings.append(
                    Finding("MalformedDiamond", f"edge #{idx} does not enter {diamond.node_id!r}", diamond.node_id)
                )
        for idx in diamond.dominant:
            if idx < len(graph.edges) and graph.edges[idx].kind is not EdgeKind.IMPLICIT_DOMINANT:
                findings.append(
                    Finding("MalformedDiamond", f"edge #{idx} is not implicit_dominant", diamond.node_id)
                )
        for idx in diamond.secondary:
            if idx < len(graph.edges) and graph.edges[idx].kind is not EdgeKind.IMPLICIT_SECONDARY:
                findings.append(
                    Finding("MalformedDiamond", f"edge #{idx} is not implicit_secondary", diamond.node_id)
                )
        # A diamond node takes all of its inflow through the diamond.
        diamond_idx = set(diamond.dominant) | set(diamond.secondary)
        for i, edge in enumerate(graph.edges):
            if edge.dst == diamond.node_id and i not in diamond_idx:
                findings.append(
                    Finding(
                        "MalformedDiamond",
                        f"{diamond.node_id!r} has a non-diamond in-edge from {edge.src!r}",
                        diamond.node_id,
                    )
                )
    for idx in implicit_edges - claimed:
        edge = graph.edges[idx]
        findings.append(
            Finding("MalformedDiamond", f"implicit edge {edge.src}->{edge.dst} belongs to no diamond", edge.dst)
        )
    return findings


@dataclass(frozen=True)
class CatalogueRow:
    """One required (or source-supplied) input, keyed by assumption id."""

    key: str
    kind: FactorKind
    origin: Origin
    value_source: str
    resolved: bool
    node_id: str
    value: object = None

    def to_doc(self) -> dict:
        return {
            "id": self.key,
            "kind": self.kind.value,
            "origin": self.origin.value,
            "value_source": self.value_source,
            "resolved": self.resolved,
            "node": self.node_id,
            "value": str(self.value) if isinstance(self.value, Fraction) else self.value,
        }


def factor_catalogue(
    graph: CostGraph, overrides: Mapping[str, object] | None = None
) -> list[CatalogueRow]:
    """Every input the model needs, with its resolution status.

    Traffic rates for entry endpoints appear here alongside per-factor
    parameters; rows for linked endpoints are marked inferred. Override
    values shadow source annotations.
    """
    overrides = dict(overrides or {})
    source: dict[str, SourceValue] = {sv.key: sv for sv in graph.source_values}
    has_inflow = {e.dst for e in graph.edges}
    rows: dict[str, CatalogueRow] = {}

    def resolve(key: str) -> tuple[bool, str, object]:
        if key in overrides:
            return True, "override", overrides[key]
        if key in source:
            return True, source[key].provenance, source[key].value
        return False, "unset", None

    def add(key: str, kind: FactorKind, origin: Origin, node_id: str, inferred: bool = False) -> None:
        if key in rows:
            return
        if inferred:
            ok, how, value = resolve(key)
            rows[key] = CatalogueRow(
                key, kind, origin, how if ok else "inferred", True, node_id, value
            )
            return
        ok, how, value = resolve(key)
        rows[key] = CatalogueRow(key, kind, origin, how, ok, node_id, value)

    for node in graph.nodes:
        if node.node_class is NodeClass.ENDPOINT:
            add(
                f"{node.id}.requestsPerMonth",
                FactorKind.INVOCATION,
                Origin.EXTERNAL,
                node.id,
                inferred=node.id in has_inflow,
            )
        if node.node_class is NodeClass.SCHEDULE_TICK:
            add(f"{node.id}.rateSeconds", FactorKind.INVOCATION, Origin.INTERNAL, node.id)
        for factor in node.factors:
            for key in factor.requires:
                add(key, factor.kind, Origin.EXTERNAL, node.id)
    return list(rows.values())


def required_keys(rows: Iterable[CatalogueRow]) -> list[str]:
    return [row.key for row in rows if not row.resolved]
