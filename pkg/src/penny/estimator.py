"""The analytic cost model: counts, stocks, and monthly reports.

Counts propagate through the graph once per estimate. A month is
exactly 30 days (2,592,000 seconds); calendar drift is out of scope.
All arithmetic is rational until each factor's single rounding at the
end, so reports are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .assumptions import AssumptionSet
from .errors import CycleDetected, NotAnEntryPoint, UnresolvedAssumption
from .graph import CostGraph, CostNode, EdgeKind, FactorKind, NodeClass
from .money import round_half_even
from .pricing import BoundModel, Catalog, bind, evaluate_rule, marginal_rate

__all__ = [
    "SECONDS_PER_MONTH",
    "FactorCost",
    "CostReport",
    "monthly_counts",
    "invocation_cost",
    "stock_at",
    "monthly_cost",
    "report_from_counts",
    "compare_catalogs",
    "CatalogComparison",
]

SECONDS_PER_MONTH = 30 * 24 * 60 * 60  # 2,592,000

# Per-traversal quantity of a factor, derived from its required
# assumption values in declaration order. Bytes convert to decimal GB.
_GIGA = Fraction(10**9)
_QUANTITY_BY_UNIT: dict[str, Callable[[Sequence[Fraction]], Fraction]] = {
    "request": lambda values: Fraction(1),
    "call": lambda values: Fraction(1),
    "gb_second": lambda values: values[0] * values[1],
    "gb_month": lambda values: values[0] / _GIGA,
    "egress_gb": lambda values: values[0] / _GIGA,
    "month": lambda values: Fraction(1),
}


@dataclass(frozen=True)
class FactorCost:
    node_id: str
    factor_id: str
    kind: FactorKind
    origin: str
    unit: str
    quantity: Fraction
    micro_usd: int


@dataclass(frozen=True)
class CostReport:
    month: int
    vendor: str
    source_version: int
    engine: str  # "analytic" or "sim:<kernel name>"
    counts: Mapping[str, Fraction]
    components: tuple[FactorCost, ...]
    total_micro_usd: int
    unresolved: tuple[str, ...] = ()

    def node_subtotals(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.components:
            out[c.node_id] = out.get(c.node_id, 0) + c.micro_usd
        return out


def _graph_of(model: BoundModel | CostGraph) -> CostGraph:
    return model.graph if isinstance(model, BoundModel) else model


def _topo_order(graph: CostGraph) -> list[CostNode]:
    indegree = {n.id: 0 for n in graph.nodes}
    for e in graph.edges:
        indegree[e.dst] += 1
    ready = [n for n in graph.nodes if indegree[n.id] == 0]
    order: list[CostNode] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for e in graph.out_edges(node.id):
            indegree[e.dst] -= 1
            if indegree[e.dst] == 0:
                ready.append(graph.node(e.dst))
    if len(order) != len(graph.nodes):
        stuck = sorted(n for n, d in indegree.items() if d > 0)
        raise CycleDetected(
            "cost flow contains a cycle through: " + ", ".join(stuck), nodes=stuck
        )
    return order


def monthly_counts(
    model: BoundModel | CostGraph, assumptions: AssumptionSet
) -> dict[str, Fraction]:
    """Traversal counts per node for one steady-state month.

    Entry endpoints take their assumed monthly request rate, schedule
    ticks fire seconds-per-month over their period, and counts flow
    along sync and deferred edges. At a diamond the outflow is
    min(dominant inflow, secondary inflow): a queue cannot hand out
    more items than were pushed, nor more than its consumer polled.
    """
    graph = _graph_of(model)
    order = _topo_order(graph)

    required: list[str] = []
    has_inflow = {e.dst for e in graph.edges}
    for node in graph.nodes:
        if node.id in has_inflow:
            continue
        if node.node_class is NodeClass.ENDPOINT:
            required.append(f"{node.id}.requestsPerMonth")
        elif node.node_class is NodeClass.SCHEDULE_TICK:
            required.append(f"{node.id}.rateSeconds")
    resolved = assumptions.require(required)

    counts: dict[str, Fraction] = {}
    inflow: dict[str, Fraction] = {n.id: Fraction(0) for n in graph.nodes}
    dominant_in: dict[str, Fraction] = {}
    secondary_in: dict[str, Fraction] = {}

    for node in order:
        diamond = graph.diamond_for(node.id)
        if diamond is not None:
            count = min(
                dominant_in.get(node.id, Fraction(0)),
                secondary_in.get(node.id, Fraction(0)),
            ) + inflow[node.id]
        else:
            count = inflow[node.id]
        if node.node_class is NodeClass.ENDPOINT:
            if node.id in has_inflow:
                extra = assumptions.fraction(f"{node.id}.requestsPerMonth")
                count += extra if extra is not None else Fraction(0)
            else:
                count += resolved[f"{node.id}.requestsPerMonth"]
        elif node.node_class is NodeClass.SCHEDULE_TICK:
            key = f"{node.id}.rateSeconds"
            rate = resolved.get(key)
            if rate is None:
                rate = assumptions.fraction(key)
            if rate is not None:
                if rate <= 0:
                    raise UnresolvedAssumption(
                        f"assumption {key!r} must be a positive duration", keys=[key]
                    )
                count += Fraction(SECONDS_PER_MONTH) / rate
        counts[node.id] = count
        for e in graph.out_edges(node.id):
            flow = count * e.weight
            if e.kind is EdgeKind.IMPLICIT_DOMINANT:
                dominant_in[e.dst] = dominant_in.get(e.dst, Fraction(0)) + flow
            elif e.kind is EdgeKind.IMPLICIT_SECONDARY:
                secondary_in[e.dst] = secondary_in.get(e.dst, Fraction(0)) + flow
            else:
                inflow[e.dst] += flow
    return counts


def _factor_quantity(
    factor, assumptions: AssumptionSet, missing: list[str]
) -> Fraction | None:
    """Per-traversal quantity, or None while recording missing keys."""
    values: list[Fraction] = []
    short = False
    for key in factor.requires:
        if factor.user_price_key == key:
            continue  # a price, not a quantity
        value = assumptions.fraction(key)
        if value is None:
            missing.append(key)
            short = True
        else:
            values.append(value)
    if short:
        return None
    return _QUANTITY_BY_UNIT[factor.unit](values)


def _user_price(factor, assumptions: AssumptionSet, missing: list[str]) -> Fraction | None:
    value = assumptions.fraction(factor.user_price_key)
    if value is None:
        missing.append(factor.user_price_key)
    return value


def invocation_cost(
    model: BoundModel, assumptions: AssumptionSet, entry: str
) -> Fraction:
    """Marginal micro-USD for one more request at an entry point.

    Follows sync, deferred, and dominant edges with multiplied weights;
    the dominant side of a diamond passes through on the assumption the
    item is eventually processed. Accumulating factors contribute one
    month of storage for the data the request leaves behind. Tiered
    rules price at the marginal rate for the current assumed monthly
    volume, or the first tier when traffic is not yet resolved.
    """
    graph = model.graph
    if any(e.dst == entry for e in graph.edges) or not graph.has_node(entry):
        raise NotAnEntryPoint(f"{entry!r} is not an entry point of this graph")

    try:
        volumes = monthly_counts(model, assumptions)
    except UnresolvedAssumption:
        volumes = {}

    order = _topo_order(graph)
    mult: dict[str, Fraction] = {n.id: Fraction(0) for n in graph.nodes}
    mult[entry] = Fraction(1)
    for node in order:
        if mult[node.id] == 0:
            continue
        for e in graph.out_edges(node.id):
            if e.kind is EdgeKind.IMPLICIT_SECONDARY:
                continue
            mult[e.dst] += mult[node.id] * e.weight

    missing: list[str] = []
    total = Fraction(0)
    for node in order:
        if mult[node.id] == 0:
            continue
        for bound in model.factors_of(node.id):
            factor = bound.factor
            if factor.kind is FactorKind.FIXED:
                continue  # a single request cannot move a flat fee
            if factor.user_price_key is not None:
                price = _user_price(factor, assumptions, missing)
                if price is None:
                    continue
                total += mult[node.id] * price
                continue
            qty = _factor_quantity(factor, assumptions, missing)
            if qty is None:
                continue
            # For accumulating factors this is one month of storage for
            # the data the request leaves behind (rates are per GB-month).
            volume = volumes.get(node.id, Fraction(0)) * qty
            total += mult[node.id] * qty * marginal_rate(bound.rule, volume)
    if missing:
        raise UnresolvedAssumption(
            "unresolved assumptions: " + ", ".join(sorted(set(missing))),
            keys=sorted(set(missing)),
        )
    return total


def stock_at(
    model: BoundModel | CostGraph, assumptions: AssumptionSet, month: int
) -> dict[str, Fraction]:
    """Accumulated stock (GB) per accumulating factor at end of month.

    Inflows are constant under fixed assumptions, so the stock after m
    months is m times one month's inflow; nothing is ever deleted.
    """
    if month < 1:
        raise ValueError("month index starts at 1")
    graph = _graph_of(model)
    counts = monthly_counts(model, assumptions)
    missing: list[str] = []
    stocks: dict[str, Fraction] = {}
    for node in graph.nodes:
        for factor in node.factors:
            if factor.kind is not FactorKind.ACCUMULATING:
                continue
            count = counts.get(node.id, Fraction(0))
            if count == 0:
                stocks[factor.id] = Fraction(0)
                continue
            qty = _factor_quantity(factor, assumptions, missing)
            if qty is None:
                continue
            stocks[factor.id] = count * qty * month
    if missing:
        raise UnresolvedAssumption(
            "unresolved assumptions: " + ", ".join(sorted(set(missing))),
            keys=sorted(set(missing)),
        )
    return stocks


def report_from_counts(
    model: BoundModel,
    assumptions: AssumptionSet,
    month: int,
    counts: Mapping[str, Fraction],
    engine: str,
    source_version: int = 1,
) -> CostReport:
    """Price a set of traversal counts, one rounding per factor.

    Invocation factors price count x per-traversal quantity;
    accumulating factors price the end-of-month stock; fixed factors
    charge their monthly rate no matter what. Both the analytic
    estimate and the simulation report through here, so any
    difference between them is a difference in counts alone.
    """
    if month < 1:
        raise ValueError("month index starts at 1")
    graph = model.graph
    missing: list[str] = []
    components: list[FactorCost] = []
    for node in graph.nodes:
        count = counts.get(node.id, Fraction(0))
        for bound in model.factors_of(node.id):
            factor = bound.factor
            if factor.kind is FactorKind.FIXED:
                assert bound.rule is not None
                micro = evaluate_rule(bound.rule, Fraction(1))
                components.append(
                    FactorCost(node.id, factor.id, factor.kind, factor.origin.value,
                               factor.unit, Fraction(1), micro)
                )
                continue
            if count == 0:
                quantity = Fraction(0)
            else:
                qty = _factor_quantity(factor, assumptions, missing)
                if qty is None:
                    continue
                quantity = count * qty
                if factor.kind is FactorKind.ACCUMULATING:
                    quantity *= month
            if factor.user_price_key is not None:
                if quantity == 0:
                    micro = 0
                else:
                    price = _user_price(factor, assumptions, missing)
                    if price is None:
                        continue
                    micro = round_half_even(quantity * price)
            else:
                assert bound.rule is not None
                micro = evaluate_rule(bound.rule, quantity)
            components.append(
                FactorCost(node.id, factor.id, factor.kind, factor.origin.value,
                           factor.unit, quantity, micro)
            )
    if missing:
        raise UnresolvedAssumption(
            "unresolved assumptions: " + ", ".join(sorted(set(missing))),
            keys=sorted(set(missing)),
        )
    return CostReport(
        month=month,
        vendor=model.catalog.id,
        source_version=source_version,
        engine=engine,
        counts=dict(counts),
        components=tuple(components),
        total_micro_usd=sum(c.micro_usd for c in components),
    )


def monthly_cost(
    model: BoundModel,
    assumptions: AssumptionSet,
    month: int,
    source_version: int = 1,
) -> CostReport:
    """The analytic bill for one month."""
    counts = monthly_counts(model, assumptions)
    return report_from_counts(model, assumptions, month, counts, "analytic", source_version)


@dataclass(frozen=True)
class CatalogComparison:
    vendor: str
    total_micro_usd: int
    node_deltas: Mapping[str, int]  # vs the first catalog
    report: CostReport


def compare_catalogs(
    graph: CostGraph,
    assumptions: AssumptionSet,
    catalogs: Sequence[Catalog],
    month: int,
    source_version: int = 1,
) -> list[CatalogComparison]:
    """Identical counts and stocks, one report per vendor, node-level
    deltas against the first catalog in the list."""
    if not catalogs:
        return []
    reports = [
        monthly_cost(bind(graph, catalog), assumptions, month, source_version)
        for catalog in catalogs
    ]
    baseline = reports[0].node_subtotals()
    out: list[CatalogComparison] = []
    for report in reports:
        subtotals = report.node_subtotals()
        deltas = {
            node.id: subtotals.get(node.id, 0) - baseline.get(node.id, 0)
            for node in graph.nodes
        }
        out.append(
            CatalogComparison(
                vendor=report.vendor,
                total_micro_usd=report.total_micro_usd,
                node_deltas=deltas,
                report=report,
            )
        )
    return out
