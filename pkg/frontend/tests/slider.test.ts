// Month slider behavior on the recorded fixture session: one request
// per change, and what lands in state is byte-for-byte the service's
// answer, in which only the storage components grew.

import { describe, expect, it } from "vitest";

import { renderSource, renderTotals } from "../src/render";
import type { CostReportDoc } from "../src/types";
import { factorsById, loadedHarness } from "./harness";
import { fixture } from "./mock";

const month1 = fixture<CostReportDoc>("cost-month1.json");
const month2 = fixture<CostReportDoc>("cost-month2.json");

describe("month slider", () => {
  it("moving 1 -> 2 issues exactly one request, a GET /cost", async () => {
    const h = await loadedHarness();
    h.mock.on("GET", `/sessions/${h.sid}/cost?month=2`, month2);
    const before = h.mock.log.length;

    await h.vm.setMonth(2);

    const issued = h.mock.log.slice(before);
    expect(issued).toHaveLength(1);
    expect(issued[0].method).toBe("GET");
    expect(issued[0].path).toBe(`/sessions/${h.sid}/cost?month=2`);
  });

  it("the displayed report is the direct GET /cost answer", async () => {
    const h = await loadedHarness();
    h.mock.on("GET", `/sessions/${h.sid}/cost?month=2`, month2);
    await h.vm.setMonth(2);
    expect(h.vm.state.report).toEqual(month2);
    expect(renderTotals(h.vm.state)).toContain(month2.total_display);
  });

  it("exactly the storage components double; everything else is unchanged", async () => {
    const h = await loadedHarness();
    h.mock.on("GET", `/sessions/${h.sid}/cost?month=2`, month2);
    expect(h.vm.state.report).toEqual(month1);

    await h.vm.setMonth(2);
    const shown = h.vm.state.report as CostReportDoc;

    const before = factorsById(month1);
    const after = factorsById(shown);
    expect([...after.keys()].sort()).toEqual([...before.keys()].sort());

    const doubledIds: string[] = [];
    for (const [id, b] of before) {
      const a = after.get(id)!;
      if (b.kind === "accumulating") {
        expect(a.micro_usd, id).toBe(2 * b.micro_usd);
        expect(a.quantity, id).not.toBe(b.quantity);
        doubledIds.push(id);
      } else {
        expect(a, id).toEqual(b);
      }
    }
    doubledIds.sort();
    expect(doubledIds).toEqual(["transcripts.insert.storage", "videoStorage.put.storage"]);
  });

  it("month 2 storage badges show the doubled amounts", async () => {
    const h = await loadedHarness();
    h.mock.on("GET", `/sessions/${h.sid}/cost?month=2`, month2);
    await h.vm.setMonth(2);
    const html = renderSource(h.vm.state);
    const after = factorsById(month2);
    for (const node of month2.nodes) {
      for (const f of node.factors) {
        if (f.kind !== "accumulating") continue;
        expect(after.get(f.id)?.micro_usd).toBe(f.micro_usd);
        expect(html).toContain(f.display);
      }
    }
  });

  it("repeating the current month or going below 1 costs nothing", async () => {
    const h = await loadedHarness();
    const before = h.mock.log.length;
    await h.vm.setMonth(1);
    await h.vm.setMonth(0);
    await h.vm.setMonth(-4);
    expect(h.mock.log).toHaveLength(before);
    expect(h.vm.state.month).toBe(1);
  });

  it("a change collapses the open vendor comparison", async () => {
    const h = await loadedHarness();
    h.mock
      .on("GET", `/sessions/${h.sid}/compare?month=1`, fixture("compare.json"))
      .on("GET", `/sessions/${h.sid}/cost?month=2`, month2);
    await h.vm.toggleCompare();
    expect(h.vm.state.comparing).toBe(true);
    await h.vm.setMonth(2);
    expect(h.vm.state.comparing).toBe(false);
    expect(h.vm.state.compare).toBeNull();
  });
});
