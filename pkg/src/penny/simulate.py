"""Discrete-event simulation of one month, as an oracle for the
analytic estimator.

The graph compiles to a small program: event streams and per-stream
cascades of meter/push/drain steps. Event k of a stream fires at
offset + period*k. Endpoint arrivals use offset 0, filling the month
from its first instant; schedule ticks use offset = period, firing at
the end of each interval. Phased the other way around, an arrival
burst landing on the closing instant would meet only the final tick
and leave the rest of the burst in flight, undercounting a consumer
that the analytic model says keeps up.
Queues are real FIFO backlogs drained tick by tick, so the diamond
`min()` the analytic model asserts is reproduced here by mechanism
rather than by formula. Everything runs in scaled integers; the scale
is chosen so that every division in the hot loop is exact.

The seed only permutes the processing order of simultaneous events.
Totals are seed-invariant because same-timestamp work commutes:
arrivals deposit before ticks drain (priority), and drains take
min(backlog, capacity) whichever order ties resolve in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from ._kernel import KERNEL, run_merge, simcore_py
from .assumptions import AssumptionSet
from .errors import SimulationUnsupported
from .estimator import SECONDS_PER_MONTH, CostReport, monthly_counts, report_from_counts
from .graph import CostGraph, EdgeKind, NodeClass
from .pricing import BoundModel

__all__ = ["SimProgram", "compile_program", "simulate_month"]

_I64_SAFE = 1 << 62

_METER, _PUSH, _DRAIN = 0, 1, 2


@dataclass(frozen=True)
class SimProgram:
    node_ids: tuple[str, ...]
    n_diamonds: int
    period: tuple[int, ...]
    offset: tuple[int, ...]
    count: tuple[int, ...]
    priority: tuple[int, ...]
    cascade_idx: tuple[int, ...]
    base: int  # scaled amount carried by one event
    casc_start: tuple[int, ...]
    casc_len: tuple[int, ...]
    op: tuple[int, ...]
    arg: tuple[int, ...]
    num: tuple[int, ...]
    den: tuple[int, ...]
    sub: tuple[int, ...]
    fits_64bit: bool

    def run(self, seed: int) -> dict[str, Fraction]:
        kernel = run_merge if self.fits_64bit else simcore_py.run_merge
        meters = kernel(
            len(self.node_ids),
            self.n_diamonds,
            list(self.period),
            list(self.offset),
            list(self.count),
            list(self.priority),
            list(self.cascade_idx),
            self.base,
            list(self.casc_start),
            list(self.casc_len),
            list(self.op),
            list(self.arg),
            list(self.num),
            list(self.den),
            list(self.sub),
            seed,
        )
        base = Fraction(self.base)
        return {nid: Fraction(meters[i]) / base for i, nid in enumerate(self.node_ids)}

    @property
    def kernel_name(self) -> str:
        return KERNEL if self.fits_64bit else "python"


def _as_event_count(value: Fraction, what: str) -> int:
    if value.denominator != 1:
        raise SimulationUnsupported(
            f"{what} is {value}, but simulation needs a whole number of events"
        )
    if value < 0:
        raise SimulationUnsupported(f"{what} is negative")
    return int(value)


def compile_program(model: BoundModel, assumptions: AssumptionSet) -> SimProgram:
    """Flatten the bound graph into streams and cascades.

    Raises SimulationUnsupported for shapes the simulator does not
    model: fractional event counts, and queue consumers that push into
    further queues (chained diamonds simulate poorly in fixed-size
    arithmetic; the analytic path still covers them).
    """
    graph = model.graph
    node_index = {n.id: i for i, n in enumerate(graph.nodes)}
    diamond_index = {d.node_id: i for i, d in enumerate(graph.diamonds)}

    # Checks acyclicity and traffic resolution up front; also bounds
    # the meters for the 64-bit safety check below.
    analytic = monthly_counts(model, assumptions)

    # Entry streams: zero in-degree endpoints and schedule ticks.
    has_inflow = {e.dst for e in graph.edges}
    entries: list[tuple[str, int, int]] = []  # node id, events, priority
    for node in graph.nodes:
        if node.id in has_inflow:
            continue
        if node.node_class is NodeClass.ENDPOINT:
            rate = assumptions.require([f"{node.id}.requestsPerMonth"])[
                f"{node.id}.requestsPerMonth"
            ]
            entries.append((node.id, _as_event_count(rate, f"{node.id} monthly requests"), 0))
        elif node.node_class is NodeClass.SCHEDULE_TICK:
            rate = assumptions.require([f"{node.id}.rateSeconds"])[f"{node.id}.rateSeconds"]
            ticks = Fraction(SECONDS_PER_MONTH) / rate
            entries.append((node.id, _as_event_count(ticks, f"{node.id} monthly ticks"), 1))
        # other sourceless nodes generate no events

    def walk_cascade(
        start: str, in_consumer: bool
    ) -> list[tuple[int, int, Fraction, int]]:
        """(op, arg, weight, sub) steps from `start`, weights relative
        to the cascade base."""
        steps: list[tuple[int, int, Fraction, int]] = []

        def rec(node_id: str, w: Fraction) -> None:
            steps.append((_METER, node_index[node_id], w, 0))
            for e in graph.out_edges(node_id):
                if e.kind is EdgeKind.IMPLICIT_DOMINANT:
                    if in_consumer:
                        raise SimulationUnsupported(
                            "queue consumer pushes into another queue; "
                            "chained diamonds are analytic-only"
                        )
                    target = diamond_index[e.dst]
                    steps.append((_PUSH, target, w * e.weight, 0))
                elif e.kind is EdgeKind.IMPLICIT_SECONDARY:
                    if in_consumer:
                        raise SimulationUnsupported(
                            "queue consumer pops another queue; "
                            "chained diamonds are analytic-only"
                        )
                    target = diamond_index[e.dst]
                    consumer = consumer_cascade(e.dst)
                    steps.append((_DRAIN, target, w * e.weight, consumer))
                else:
                    rec(e.dst, w * e.weight)

        rec(start, Fraction(1))
        return steps

    cascades: list[list[tuple[int, int, Fraction, int]]] = []
    consumer_cache: dict[str, int] = {}

    def consumer_cascade(diamond_node: str) -> int:
        if diamond_node in consumer_cache:
            return consumer_cache[diamond_node]
        cascades.append(walk_cascade(diamond_node, in_consumer=True))
        consumer_cache[diamond_node] = len(cascades) - 1
        return consumer_cache[diamond_node]

    streams: list[tuple[int, int, int, int]] = []  # period, count, priority, cascade
    month_s = Fraction(SECONDS_PER_MONTH)
    raw_periods: list[Fraction] = []
    for node_id, events, prio in entries:
        cascades.append(walk_cascade(node_id, in_consumer=False))
        ci = len(cascades) - 1
        if events == 0:
            streams.append((0, 0, prio, ci))
            raw_periods.append(Fraction(1))
        else:
            raw_periods.append(month_s / events)
            streams.append((-1, events, prio, ci))  # period filled after scaling

    # One common time scale making every stream period integral.
    time_scale = 1
    for p in raw_periods:
        time_scale = math.lcm(time_scale, p.denominator)
    scaled_streams = []
    for i, (_, events, prio, ci) in enumerate(streams):
        p = int(raw_periods[i] * time_scale) if events else 1
        scaled_streams.append((p, p if prio else 0, events, prio, ci))

    # Amount scale: L1 covers top-level steps, L2 covers consumer
    # cascades; base = L1*L2 keeps every deposit and capacity an exact
    # multiple of L2, so drained amounts stay divisible inside the
    # consumer cascade. See the invariant note in the kernel docstring.
    consumer_ids = set(consumer_cache.values())
    l1 = l2 = 1
    for ci, casc in enumerate(cascades):
        for _, _, w, _ in casc:
            if ci in consumer_ids:
                l2 = math.lcm(l2, w.denominator)
            else:
                l1 = math.lcm(l1, w.denominator)
    base = l1 * l2

    casc_start: list[int] = []
    casc_len: list[int] = []
    op: list[int] = []
    arg: list[int] = []
    num: list[int] = []
    den: list[int] = []
    sub: list[int] = []
    for casc in cascades:
        casc_start.append(len(op))
        casc_len.append(len(casc))
        for code, a, w, s in casc:
            op.append(code)
            arg.append(a)
            num.append(w.numerator)
            den.append(w.denominator)
            sub.append(s)

    # 64-bit safety: every product the kernels form must stay clear of
    # overflow, with the analytic counts bounding the meters. Offsets
    # never exceed the period, so period*(events+1) bounds the last
    # timestamp.
    fits = True
    for period, _, events, _, _ in scaled_streams:
        if period * max(events + 1, 1) >= _I64_SAFE:
            fits = False
    max_num = max((abs(n) for n in num), default=1)
    if base * max_num >= _I64_SAFE:
        fits = False
    for c in analytic.values():
        if (int(c) + 2) * base * max_num >= _I64_SAFE:
            fits = False

    return SimProgram(
        node_ids=tuple(n.id for n in graph.nodes),
        n_diamonds=len(graph.diamonds),
        period=tuple(s[0] for s in scaled_streams),
        offset=tuple(s[1] for s in scaled_streams),
        count=tuple(s[2] for s in scaled_streams),
        priority=tuple(s[3] for s in scaled_streams),
        cascade_idx=tuple(s[4] for s in scaled_streams),
        base=base,
        casc_start=tuple(casc_start),
        casc_len=tuple(casc_len),
        op=tuple(op),
        arg=tuple(arg),
        num=tuple(num),
        den=tuple(den),
        sub=tuple(sub),
        fits_64bit=fits,
    )


def simulate_month(
    model: BoundModel,
    assumptions: AssumptionSet,
    month: int,
    seed: int = 0,
    source_version: int = 1,
) -> CostReport:
    """One simulated steady-state month, priced like the analytic
    report. The month index scales accumulated stocks only; traffic is
    identical month over month under constant assumptions."""
    program = compile_program(model, assumptions)
    counts = program.run(seed)
    return report_from_counts(
        model,
        assumptions,
        month,
        counts,
        engine=f"sim:{program.kernel_name}",
        source_version=source_version,
    )
