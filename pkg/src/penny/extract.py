"""From syntax tree to cost graph, in three passes.

Pass one finds resource constructors. Pass two resolves method calls
against lexical `let` bindings, flow-insensitively: strong references
are what make this analysis cheap. Pass three assembles the graph,
chaining billable calls synchronously inside each handler, wiring
trigger rules (bucket notifications, schedule ticks, endpoint
dispatch) as deferred edges, and folding every queue push/pop pair
into an implicit diamond with a dominant producer side and a
secondary consumer side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .annotations import Annotation, read_annotations
from .errors import (
    CycleDetected,
    DanglingTrigger,
    NoEntryPoints,
    PreflightOperation,
    UnknownRoute,
    UnresolvedReceiver,
    UnsupportedMethod,
    UnsupportedResource,
)
from .graph import (
    CostFactor,
    CostGraph,
    CostNode,
    Diamond,
    EdgeKind,
    FactorKind,
    FlowEdge,
    NodeClass,
    Origin,
    SourceValue,
)
from .parser import parse
from .source import SourceFile, Span
from .syntax import NodeKind, SyntaxNode, SyntaxTree

__all__ = [
    "ResourceType",
    "ResourceDecl",
    "ResourceCall",
    "TriggerRule",
    "DEFAULT_TRIGGER_RULES",
    "BUILTIN_RECEIVERS",
    "find_resources",
    "resolve_usages",
    "build_graph",
    "entry_points",
    "analyze",
    "analyze_source",
]


class ResourceType(Enum):
    API = "Api"
    BUCKET = "Bucket"
    QUEUE = "Queue"
    TABLE = "Table"
    SCHEDULE = "Schedule"


_CONSTRUCTIBLE = {rt.value: rt for rt in ResourceType}

_METHODS: dict[ResourceType, frozenset[str]] = {
    ResourceType.API: frozenset({"post", "get"}),
    ResourceType.BUCKET: frozenset({"put", "get", "onCreate"}),
    ResourceType.QUEUE: frozenset({"push", "pop"}),
    ResourceType.TABLE: frozenset({"insert", "list"}),
    ResourceType.SCHEDULE: frozenset({"onTick"}),
}

# Methods that register a handler rather than perform billable work.
_REGISTRATIONS = frozenset({"post", "get", "onCreate", "onTick"})

# Names usable as receivers without a declaration: std-library namespaces.
BUILTIN_RECEIVERS = frozenset({"str", "std", "json", "num", "log", "duration", "util"})

# Annotation keys consumed by graph construction rather than forwarded
# as assumption values.
_STRUCTURAL_KEYS = frozenset({"multiplicity", "probability", "share", "callsEndpoint"})


@dataclass(frozen=True)
class ResourceDecl:
    id: str
    resource_type: ResourceType
    binding_name: str | None
    decl_span: Span
    props: Mapping[str, object] = field(default_factory=dict)
    annotations: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ResourceCall:
    """A resolved use of a resource, or a bare httpPost."""

    resource_id: str
    method: str
    call_span: Span
    enclosing_closure: str | None = None
    args_summary: Mapping[str, object] = field(default_factory=dict)
    annotations: Mapping[str, object] = field(default_factory=dict)
    handler: SyntaxNode | None = field(default=None, repr=False, compare=False)
    node: SyntaxNode | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class TriggerRule:
    source_pattern: tuple[ResourceType, str]
    target_pattern: tuple[ResourceType, str]
    edge_kind: str  # "deferred" | "implicit"


DEFAULT_TRIGGER_RULES: tuple[TriggerRule, ...] = (
    TriggerRule((ResourceType.BUCKET, "put"), (ResourceType.BUCKET, "onCreate"), "deferred"),
    TriggerRule((ResourceType.QUEUE, "push"), (ResourceType.QUEUE, "pop"), "implicit"),
)


def _annotation_map(tree: SyntaxTree) -> dict[tuple[int, int], Mapping[str, object]]:
    return {
        (a.target_span.start_byte, a.target_span.end_byte): a.entries
        for a in read_annotations(tree)
    }


def _unwrap(node: SyntaxNode) -> SyntaxNode:
    while node.kind is NodeKind.ANNOTATION_WRAPPER:
        node = node.children[0]
    return node


def find_resources(tree: SyntaxTree) -> list[ResourceDecl]:
    """One declaration per supported `new cloud.X(...)`, in source order."""
    annotations = _annotation_map(tree)
    decls: list[ResourceDecl] = []
    taken: dict[str, int] = {}
    anon_counts: dict[str, int] = {}
    for node in tree.walk():
        if node.kind is not NodeKind.CONSTRUCTOR:
            continue
        name = node.name or ""
        short = name.removeprefix("cloud.")
        if not name.startswith("cloud.") or short not in _CONSTRUCTIBLE:
            raise UnsupportedResource(f"unsupported resource constructor {name!r}", span=node.span)
        rtype = _CONSTRUCTIBLE[short]

        binding = None
        parent = tree.parent_of(node)
        if parent is not None and parent.kind is NodeKind.ANNOTATION_WRAPPER and parent.children[0] is node:
            parent = tree.parent_of(parent)
        if parent is not None and parent.kind is NodeKind.LET:
            binding = parent.name

        props: dict[str, object] = {}
        for arg in node.children:
            if arg.kind is NodeKind.NAMED_ARG and arg.children[0].kind in (
                NodeKind.NUMBER,
                NodeKind.STRING,
                NodeKind.DURATION,
                NodeKind.BOOL,
            ):
                props[arg.name] = arg.children[0].value

        if binding is not None:
            base = binding
        else:
            anon_counts[short] = anon_counts.get(short, 0) + 1
            base = f"{short.lower()}_{anon_counts[short]}"
        taken[base] = taken.get(base, 0) + 1
        decl_id = base if taken[base] == 1 else f"{base}#{taken[base]}"

        decls.append(
            ResourceDecl(
                id=decl_id,
                resource_type=rtype,
                binding_name=binding,
                decl_span=node.span,
                props=props,
                annotations=annotations.get((node.span.start_byte, node.span.end_byte), {}),
            )
        )
    return decls


class _Binding:
    __slots__ = ("resource_id",)

    def __init__(self, resource_id: str | None) -> None:
        self.resource_id = resource_id  # None for plain values and params


class _Scope:
    def __init__(self, parent: "_Scope | None") -> None:
        self.parent = parent
        self.names: dict[str, list[_Binding]] = {}

    def bind(self, name: str, binding: _Binding) -> None:
        self.names.setdefault(name, []).append(binding)

    def lookup(self, name: str) -> tuple[_Binding | None, bool]:
        """(innermost current binding, whether any binding of the name
        anywhere in scope history was a resource)."""
        current: _Binding | None = None
        ever_resource = False
        scope: _Scope | None = self
        while scope is not None:
            chain = scope.names.get(name)
            if chain:
                if current is None:
                    current = chain[-1]
                ever_resource = ever_resource or any(b.resource_id for b in chain)
            scope = scope.parent
        return current, ever_resource


def resolve_usages(tree: SyntaxTree, resources: Sequence[ResourceDecl]) -> list[ResourceCall]:
    """Every call on a resource binding, plus bare httpPost calls, in
    evaluation order.

    Calling through a rebound name is refused outright rather than
    silently dropped: if a name ever held a resource in scope history,
    a later call through it raises UnresolvedReceiver even when the
    current binding is a plain value. Not knowing which resource gets
    billed is an analysis failure, not a zero-cost path.
    """
    annotations = _annotation_map(tree)
    by_decl_span = {(d.decl_span.start_byte, d.decl_span.end_byte): d for d in resources}
    by_id = {d.id: d for d in resources}
    calls: list[ResourceCall] = []

    def call_annotations(node: SyntaxNode) -> Mapping[str, object]:
        parent = tree.parent_of(node)
        if parent is not None and parent.kind is NodeKind.ANNOTATION_WRAPPER and parent.children[0] is node:
            return annotations.get((node.span.start_byte, node.span.end_byte), {})
        return {}

    def handler_of(call: SyntaxNode) -> SyntaxNode | None:
        for arg in call.children[1:]:
            unwrapped = _unwrap(arg)
            if unwrapped.kind is NodeKind.CLOSURE:
                return unwrapped
        return None

    def route_of(call: SyntaxNode, method: str) -> dict:
        positional = [a for a in call.children[1:] if a.kind is not NodeKind.NAMED_ARG]
        if not positional or _unwrap(positional[0]).kind is not NodeKind.STRING:
            raise UnsupportedMethod(
                f"api.{method} requires a string-literal route as its first argument",
                span=call.span,
            )
        return {"route": _unwrap(positional[0]).value}

    def record_method_call(node: SyntaxNode, scope: _Scope, closure_id: str | None) -> None:
        receiver = node.children[0]
        if receiver.kind is not NodeKind.NAME:
            return
        binding, ever_resource = scope.lookup(receiver.name)
        if binding is None:
            if receiver.name in BUILTIN_RECEIVERS:
                return
            raise UnresolvedReceiver(f"name {receiver.name!r} has no binding", span=receiver.span)
        if binding.resource_id is None:
            if ever_resource:
                raise UnresolvedReceiver(
                    f"{receiver.name!r} no longer refers to a resource here", span=receiver.span
                )
            return
        decl = by_id[binding.resource_id]
        if node.name not in _METHODS[decl.resource_type]:
            raise UnsupportedMethod(
                f"{decl.resource_type.value} has no modelled method {node.name!r}", span=node.span
            )
        summary: Mapping[str, object] = {}
        if decl.resource_type is ResourceType.API:
            summary = route_of(node, node.name)
        calls.append(
            ResourceCall(
                resource_id=decl.id,
                method=node.name,
                call_span=node.span,
                enclosing_closure=closure_id,
                args_summary=summary,
                annotations=call_annotations(node),
                handler=handler_of(node) if node.name in _REGISTRATIONS else None,
                node=node,
            )
        )

    def walk(node: SyntaxNode, scope: _Scope, closure_id: str | None) -> None:
        if node.kind is NodeKind.LET:
            init = node.children[0]
            walk(init, scope, closure_id)
            target = _unwrap(init)
            decl = by_decl_span.get((target.span.start_byte, target.span.end_byte))
            scope.bind(node.name, _Binding(decl.id if decl else None))
            return
        if node.kind is NodeKind.CLOSURE:
            inner = _Scope(scope)
            for child in node.children[:-1]:
                inner.bind(child.name, _Binding(None))
            walk(node.children[-1], inner, f"closure:{node.span.start_byte}")
            return
        if node.kind is NodeKind.IF_LET:
            walk(node.children[0], scope, closure_id)
            arm = _Scope(scope)
            arm.bind(node.name, _Binding(None))
            walk(node.children[1], arm, closure_id)
            return
        if node.kind is NodeKind.BLOCK:
            inner = _Scope(scope)
            for child in node.children:
                walk(child, inner, closure_id)
            return
        if node.kind is NodeKind.METHOD_CALL:
            for child in node.children:
                walk(child, scope, closure_id)
            record_method_call(node, scope, closure_id)
            return
        if node.kind is NodeKind.BARE_CALL:
            for child in node.children:
                walk(child, scope, closure_id)
            if node.name == "httpPost":
                positional = [a for a in node.children if a.kind is not NodeKind.NAMED_ARG]
                url = None
                if positional and _unwrap(positional[0]).kind is NodeKind.STRING:
                    url = _unwrap(positional[0]).value
                calls.append(
                    ResourceCall(
                        resource_id="httpPost",
                        method="httpPost",
                        call_span=node.span,
                        enclosing_closure=closure_id,
                        args_summary={"url": url} if url is not None else {},
                        annotations=call_annotations(node),
                        node=node,
                    )
                )
            return
        for child in node.children:
            walk(child, scope, closure_id)

    walk(tree.root, _Scope(None), None)
    return calls


def _weight(entries: Mapping[str, object], key: str, default: int = 1) -> Fraction:
    value = entries.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
        raise UnsupportedMethod(f"annotation {key!r} must be a number, got {value!r}")
    return Fraction(value)


class _GraphBuilder:
    def __init__(
        self,
        resources: Sequence[ResourceDecl],
        annotations: Mapping[tuple[int, int], Mapping[str, object]],
    ) -> None:
        self.resources = {d.id: d for d in resources}
        self.annotations = annotations
        self.nodes: list[CostNode] = []
        self.edges: list[FlowEdge] = []
        self.taken: dict[str, int] = {}
        self.source_values: list[SourceValue] = []
        self.endpoints_by_route: dict[str, str] = {}
        self.pushes: dict[str, list[str]] = {}  # queue decl id -> push node ids
        self.node_to_decl: dict[str, str] = {}
        self.pending_diamonds: list[dict] = []
        self.pending_triggers: list[dict] = []
        self.pending_links: list[dict] = []

    def alloc(self, base: str) -> str:
        self.taken[base] = self.taken.get(base, 0) + 1
        return base if self.taken[base] == 1 else f"{base}#{self.taken[base]}"

    def add_node(self, node: CostNode) -> CostNode:
        self.nodes.append(node)
        return node

    def add_edge(self, src: str, dst: str, kind: EdgeKind, weight: Fraction) -> int:
        self.edges.append(FlowEdge(src, dst, kind, weight))
        return len(self.edges) - 1

    def remember(self, key: str, value: object, provenance: str = "annotation") -> None:
        self.source_values.append(SourceValue(key, value, provenance))

    def forward_annotations(self, scope_id: str, entries: Mapping[str, object]) -> None:
        for key, value in entries.items():
            if key not in _STRUCTURAL_KEYS:
                self.remember(f"{scope_id}.{key}", value)

    # -- node factories --------------------------------------------------

    def endpoint_node(self, call: ResourceCall) -> CostNode:
        route = str(call.args_summary["route"])
        stem = "".join(c if c.isalnum() else "_" for c in route.strip("/")) or "root"
        node_id = self.alloc(stem)
        factors = [
            CostFactor(
                id=f"{node_id}.requests",
                kind=FactorKind.INVOCATION,
                origin=Origin.INTERNAL,
                unit="request",
                quantity_spec="1 request per traversal",
                value_source="constant:1",
            )
        ]
        if "egressBytes" in call.annotations:
            # Bandwidth is opt-in: only endpoints annotated with a
            # response size carry it.
            key = f"{node_id}.egressBytes"
            factors.append(
                CostFactor(
                    id=f"{node_id}.egress",
                    kind=FactorKind.INVOCATION,
                    origin=Origin.EXTERNAL,
                    unit="egress_gb",
                    quantity_spec="egressBytes / 10^9 GB per request",
                    value_source=f"assumption:{key}",
                    requires=(key,),
                )
            )
        node = self.add_node(
            CostNode(
                id=node_id,
                label=route,
                node_class=NodeClass.ENDPOINT,
                span=call.call_span,
                factors=tuple(factors),
            )
        )
        self.endpoints_by_route.setdefault(route, node_id)
        self.forward_annotations(node_id, call.annotations)
        return node

    def function_node(self, endpoint_id: str, handler: SyntaxNode) -> CostNode:
        node_id = self.alloc(f"{endpoint_id}.fn")
        node = self.add_node(
            CostNode(
                id=node_id,
                label="fn",
                node_class=NodeClass.FUNCTION,
                span=handler.span,
                factors=(
                    CostFactor(
                        id=f"{node_id}.gb_seconds",
                        kind=FactorKind.INVOCATION,
                        origin=Origin.EXTERNAL,
                        unit="gb_second",
                        quantity_spec="memoryGb x durationS GB-seconds per invocation",
                        value_source=f"assumption:{node_id}.memoryGb,{node_id}.durationS",
                        requires=(f"{node_id}.memoryGb", f"{node_id}.durationS"),
                    ),
                ),
            )
        )
        wrapper_entries = self.annotations.get((handler.span.start_byte, handler.span.end_byte), {})
        self.forward_annotations(node_id, wrapper_entries)
        return node

    def tick_node(self, call: ResourceCall) -> CostNode:
        decl = self.resources[call.resource_id]
        node_id = self.alloc(f"{decl.id}.tick")
        node = self.add_node(
            CostNode(
                id=node_id,
                label="ScheduleTick",
                node_class=NodeClass.SCHEDULE_TICK,
                span=call.call_span,
                factors=(),
            )
        )
        rate = decl.props.get("rate")
        if rate is not None:
            self.remember(f"{node_id}.rateSeconds", rate, provenance="source")
        self.forward_annotations(node_id, call.annotations)
        return node

    def op_node(self, call: ResourceCall) -> CostNode:
        decl = self.resources[call.resource_id]
        class_map = {
            ResourceType.BUCKET: NodeClass.BUCKET_OP,
            ResourceType.QUEUE: NodeClass.QUEUE_OP,
            ResourceType.TABLE: NodeClass.TABLE_OP,
        }
        node_class = class_map[decl.resource_type]
        node_id = self.alloc(f"{decl.id}.{call.method}")
        factors = [
            CostFactor(
                id=f"{node_id}.requests",
                kind=FactorKind.INVOCATION,
                origin=Origin.INTERNAL,
                unit="request",
                quantity_spec="1 request per traversal",
                value_source="constant:1",
            )
        ]
        if decl.resource_type is ResourceType.BUCKET and call.method == "put":
            key = f"{node_id}.payloadBytes"
            factors.append(
                CostFactor(
                    id=f"{node_id}.storage",
                    kind=FactorKind.ACCUMULATING,
                    origin=Origin.EXTERNAL,
                    unit="gb_month",
                    quantity_spec="payloadBytes / 10^9 GB added per put",
                    value_source=f"assumption:{key}",
                    requires=(key,),
                )
            )
        if decl.resource_type is ResourceType.TABLE and call.method == "insert":
            key = f"{decl.id}.averageRecordSize"
            factors.append(
                CostFactor(
                    id=f"{node_id}.storage",
                    kind=FactorKind.ACCUMULATING,
                    origin=Origin.EXTERNAL,
                    unit="gb_month",
                    quantity_spec="averageRecordSize / 10^9 GB added per insert",
                    value_source=f"assumption:{key}",
                    requires=(key,),
                )
            )
        node = self.add_node(
            CostNode(
                id=node_id,
                label=f"{decl.resource_type.value}.{call.method}",
                node_class=node_class,
                span=call.call_span,
                factors=tuple(factors),
                method=call.method,
            )
        )
        self.node_to_decl[node_id] = decl.id
        self.forward_annotations(node_id, call.annotations)
        if decl.resource_type is ResourceType.QUEUE and call.method == "push":
            self.pushes.setdefault(decl.id, []).append(node_id)
        return node

    def http_node(self, call: ResourceCall) -> CostNode:
        node_id = self.alloc("httpPost")
        key = f"{node_id}.unitPriceMicroUsd"
        node = self.add_node(
            CostNode(
                id=node_id,
                label="ExternalHttpCall",
                node_class=NodeClass.EXTERNAL_HTTP_CALL,
                span=call.call_span,
                factors=(
                    CostFactor(
                        id=f"{node_id}.calls",
                        kind=FactorKind.INVOCATION,
                        origin=Origin.EXTERNAL,
                        unit="call",
                        quantity_spec="1 call per traversal",
                        value_source=f"assumption:{key}",
                        requires=(key,),
                        user_price_key=key,
                    ),
                ),
            )
        )
        self.forward_annotations(node_id, call.annotations)
        if "callsEndpoint" in call.annotations:
            self.pending_links.append(
                {"node": node_id, "route": call.annotations["callsEndpoint"], "span": call.call_span}
            )
        return node


def build_graph(
    resources: Sequence[ResourceDecl],
    calls: Sequence[ResourceCall],
    rules: Sequence[TriggerRule] | None = None,
    annotations: Sequence[Annotation] | None = None,
    extra_links: Sequence[tuple[str, str]] = (),
) -> CostGraph:
    """Assemble the cost graph.

    `extra_links` carries (http node id, route) pairs so callers can
    link a black-box call to an endpoint without editing the source.
    """
    rules = DEFAULT_TRIGGER_RULES if rules is None else tuple(rules)
    ann_map: Mapping[tuple[int, int], Mapping[str, object]] = (
        {(a.target_span.start_byte, a.target_span.end_byte): a.entries for a in annotations}
        if annotations
        else {}
    )
    builder = _GraphBuilder(resources, ann_map)
    for decl in resources:
        builder.forward_annotations(decl.id, decl.annotations)

    for call in calls:
        if call.method != "httpPost" and call.resource_id not in builder.resources:
            raise DanglingTrigger(
                f"call {call.method!r} references undeclared resource {call.resource_id!r}",
                span=call.call_span,
            )
        if call.method not in _REGISTRATIONS and call.enclosing_closure is None:
            raise PreflightOperation(
                f"{call.method!r} outside an inflight closure cannot be metered monthly",
                span=call.call_span,
            )

    calls_by_node = {id(c.node): c for c in calls if c.node is not None}
    registrations = [c for c in calls if c.method in _REGISTRATIONS]

    def billable_in(expr: SyntaxNode) -> list[ResourceCall]:
        """Billable calls inside one expression, evaluation order, not
        descending into nested closures."""
        found: list[ResourceCall] = []

        def visit(node: SyntaxNode) -> None:
            if node.kind is NodeKind.CLOSURE:
                return
            for child in node.children:
                visit(child)
            call = calls_by_node.get(id(node))
            if call is not None and call.method not in _REGISTRATIONS:
                found.append(call)

        visit(expr)
        return found

    def emit(call: ResourceCall) -> CostNode:
        if call.method == "httpPost":
            return builder.http_node(call)
        return builder.op_node(call)

    class _Chain:
        """Tail of a synchronous chain. With collect_head set, the
        first node becomes the chain head instead of getting an edge;
        the caller wires the head up afterwards (trigger edges, diamond
        edges)."""

        def __init__(
            self,
            tail: str | None,
            collect_head: bool = False,
            scale: Fraction = Fraction(1),
        ) -> None:
            self.tail = tail
            self.collect_head = collect_head
            self.head: str | None = None
            self.head_weight = Fraction(1)
            self.scale = scale

        def attach(self, node: CostNode, call: ResourceCall) -> None:
            mult = _weight(call.annotations, "multiplicity")
            if self.collect_head and self.head is None:
                self.head = node.id
                self.head_weight = mult * self.scale
            elif self.tail is not None:
                builder.add_edge(self.tail, node.id, EdgeKind.SYNC, mult * self.scale)
                self.scale = Fraction(1)
            self.tail = node.id

    def chain_block(block: SyntaxNode, chain: _Chain) -> None:
        for stmt in block.children:
            if stmt.kind is NodeKind.IF_LET:
                chain_if_let(stmt, chain)
                continue
            for call in billable_in(stmt):
                chain.attach(emit(call), call)

    def chain_if_let(stmt: SyntaxNode, chain: _Chain) -> None:
        scrutinee, arm = stmt.children[0], stmt.children[1]
        gate_node: CostNode | None = None
        gate_call: ResourceCall | None = None
        for call in billable_in(scrutinee):
            node = emit(call)
            chain.attach(node, call)
            gate_node, gate_call = node, call

        if (
            gate_node is not None
            and gate_node.node_class is NodeClass.QUEUE_OP
            and gate_node.method == "pop"
        ):
            # Queue-gated arm: the arm head becomes a diamond fed by
            # pushes (dominant side) and by the pop itself (secondary).
            entries: Mapping[str, object] = gate_call.annotations if gate_call else {}
            arm_chain = _Chain(None, collect_head=True)
            chain_block(arm, arm_chain)
            if arm_chain.head is not None:
                share = entries.get("share")
                builder.pending_diamonds.append(
                    {
                        "queue": builder.node_to_decl[gate_node.id],
                        "pop": gate_node.id,
                        "node": arm_chain.head,
                        "mult": arm_chain.head_weight,
                        "probability": _weight(entries, "probability"),
                        "share": Fraction(share) if share is not None else None,  # type: ignore[arg-type]
                    }
                )
            return

        # Plain conditional: the arm chains off the current tail with
        # its first edge scaled by the annotated probability, and later
        # statements chain from the pre-arm tail again since the arm
        # may not run at all.
        entries = gate_call.annotations if gate_call else _scrutinee_entries(scrutinee)
        prob = _weight(entries, "probability")
        inherit_head = chain.collect_head and chain.head is None and chain.tail is None
        arm_chain = _Chain(chain.tail, collect_head=inherit_head, scale=prob)
        chain_block(arm, arm_chain)
        if inherit_head and arm_chain.head is not None:
            chain.head = arm_chain.head
            chain.head_weight = arm_chain.head_weight

    def _scrutinee_entries(scrutinee: SyntaxNode) -> Mapping[str, object]:
        call = calls_by_node.get(id(_unwrap(scrutinee)))
        return call.annotations if call is not None else {}

    # Handlers in registration order, so node order tracks source text.
    for reg in registrations:
        decl = builder.resources[reg.resource_id]
        if decl.resource_type is ResourceType.API:
            ep = builder.endpoint_node(reg)
            if reg.handler is None:
                continue
            fn = builder.function_node(ep.id, reg.handler)
            builder.add_edge(ep.id, fn.id, EdgeKind.DEFERRED, Fraction(1))
            chain_block(reg.handler.children[-1], _Chain(fn.id))
            continue
        if decl.resource_type is ResourceType.SCHEDULE:
            tick = builder.tick_node(reg)
            if reg.handler is None:
                continue
            chain = _Chain(None, collect_head=True)
            chain_block(reg.handler.children[-1], chain)
            if chain.head is not None:
                builder.add_edge(tick.id, chain.head, EdgeKind.DEFERRED, chain.head_weight)
            continue
        if decl.resource_type is ResourceType.BUCKET:
            if reg.handler is None:
                continue
            chain = _Chain(None, collect_head=True)
            chain_block(reg.handler.children[-1], chain)
            if chain.head is not None:
                builder.pending_triggers.append(
                    {"bucket": decl.id, "first": chain.head, "weight": chain.head_weight}
                )
            continue

    # Bucket notifications: one deferred edge from every put on the bucket.
    bucket_rule = next(
        (
            r
            for r in rules
            if r.source_pattern == (ResourceType.BUCKET, "put")
            and r.target_pattern == (ResourceType.BUCKET, "onCreate")
        ),
        None,
    )
    if bucket_rule is not None:
        kind = (
            EdgeKind.DEFERRED if bucket_rule.edge_kind == "deferred" else EdgeKind.IMPLICIT_DOMINANT
        )
        for trig in builder.pending_triggers:
            for node in builder.nodes:
                if (
                    node.node_class is NodeClass.BUCKET_OP
                    and node.method == "put"
                    and builder.node_to_decl.get(node.id) == trig["bucket"]
                ):
                    builder.add_edge(node.id, trig["first"], kind, trig["weight"])

    # Queue diamonds: dominant inflow from each push split across the
    # queue's consumers, secondary inflow from the gating pop.
    diamonds: list[Diamond] = []
    queue_rule_on = any(
        r.source_pattern == (ResourceType.QUEUE, "push") and r.edge_kind == "implicit"
        for r in rules
    )
    per_queue: dict[str, list[dict]] = {}
    for d in builder.pending_diamonds:
        per_queue.setdefault(d["queue"], []).append(d)
    if queue_rule_on:
        for queue_id, queue_diamonds in per_queue.items():
            default_share = Fraction(1, len(queue_diamonds))
            for d in queue_diamonds:
                share = d["share"] if d["share"] is not None else default_share
                dominant = tuple(
                    builder.add_edge(push, d["node"], EdgeKind.IMPLICIT_DOMINANT, share * d["mult"])
                    for push in builder.pushes.get(queue_id, [])
                )
                secondary = (
                    builder.add_edge(
                        d["pop"], d["node"], EdgeKind.IMPLICIT_SECONDARY, d["probability"] * d["mult"]
                    ),
                )
                diamonds.append(Diamond(d["node"], dominant, secondary))

    # Cross-service callbacks, from annotations and from explicit links.
    for link in builder.pending_links + [
        {"node": n, "route": r, "span": None} for n, r in extra_links
    ]:
        route = str(link["route"])
        target = builder.endpoints_by_route.get(route)
        if target is None:
            raise UnknownRoute(f"no endpoint registered for route {route!r}", span=link["span"])
        if not any(n.id == link["node"] for n in builder.nodes):
            raise UnknownRoute(f"no call node {link['node']!r} to link from", span=None)
        builder.add_edge(link["node"], target, EdgeKind.DEFERRED, Fraction(1))

    _reject_cycles(builder.nodes, builder.edges)
    return CostGraph(
        nodes=tuple(builder.nodes),
        edges=tuple(builder.edges),
        diamonds=tuple(diamonds),
        source_values=tuple(builder.source_values),
    )


def _reject_cycles(nodes: Sequence[CostNode], edges: Sequence[FlowEdge]) -> None:
    """Flow must be acyclic; a callback into an upstream endpoint would
    give monthly counts no finite answer at weight 1, and the estimator
    has no notion of a converging loop at any weight."""
    indegree = {n.id: 0 for n in nodes}
    for e in edges:
        indegree[e.dst] += 1
    ready = [nid for nid, deg in indegree.items() if deg == 0]
    seen = 0
    while ready:
        nid = ready.pop()
        seen += 1
        for e in edges:
            if e.src == nid:
                indegree[e.dst] -= 1
                if indegree[e.dst] == 0:
                    ready.append(e.dst)
    if seen != len(indegree):
        stuck = sorted(nid for nid, deg in indegree.items() if deg > 0)
        raise CycleDetected(f"cost flow contains a cycle through: {', '.join(stuck)}")


def entry_points(graph: CostGraph) -> list[CostNode]:
    """Nodes with no incoming edges."""
    with_inflow = {e.dst for e in graph.edges}
    entries = [n for n in graph.nodes if n.id not in with_inflow]
    if graph.nodes and not entries:
        raise NoEntryPoints("every node has an incoming edge; the graph is fully cyclic")
    return entries


def analyze(tree: SyntaxTree, extra_links: Sequence[tuple[str, str]] = ()) -> CostGraph:
    """find -> resolve -> build, as one step."""
    resources = find_resources(tree)
    calls = resolve_usages(tree, resources)
    return build_graph(
        resources, calls, annotations=read_annotations(tree), extra_links=extra_links
    )


def analyze_source(
    source: SourceFile | str, extra_links: Sequence[tuple[str, str]] = ()
) -> tuple[SyntaxTree, CostGraph]:
    tree = parse(source)
    return tree, analyze(tree, extra_links)
