// Editing a factor with persist on: the service splices the value into
// the program text as the annotation wrapper, and a fresh session on
// the written file prices the same. Every body the mock serves here was
// recorded from the real service in exactly this order.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { renderSource } from "../src/render";
import type { CostReportDoc, PatchResponse, SessionDoc, SourceDoc } from "../src/types";
import { ViewModel } from "../src/viewmodel";
import { BASE } from "./harness";
import { FetchMock, fixture } from "./mock";

const session = fixture<SessionDoc>("session.json");
const sid = session.session;
const patch = fixture<PatchResponse>("patch-persist.json");
const afterReport = fixture<CostReportDoc>("cost-after-persist.json");
const freshReport = fixture<CostReportDoc>("cost-fresh.json");

function persistHarness(): { vm: ViewModel; mock: FetchMock } {
  const mock = new FetchMock()
    .on("POST", "/sessions", session, 201)
    .on("GET", "/catalogs", fixture("catalogs.json"))
    .on("GET", `/sessions/${sid}/source`, fixture("source-before.json"))
    .on("GET", `/sessions/${sid}/source`, fixture("source-after.json"))
    .on("GET", `/sessions/${sid}/cost?month=1`, fixture("cost-month1.json"))
    .on("GET", `/sessions/${sid}/cost?month=1`, afterReport)
    .on("PATCH", `/sessions/${sid}/assumptions`, patch)
    .on("GET", `/sessions/${sid}/graph?format=json`, fixture("graph-after.json"));
  mock.install();
  return { vm: new ViewModel(new ApiClient(BASE)), mock };
}

describe("persisted factor edit", () => {
  it("rejects a negative rate inline without touching the network", async () => {
    const { vm, mock } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);
    const before = mock.log.length;

    await vm.editFactor("videoStorage.put.payloadBytes", "-12", true);

    expect(mock.log).toHaveLength(before);
    expect(vm.state.fieldErrors["videoStorage.put.payloadBytes"]).toMatch(/non-negative/);
    expect(vm.state.report).toEqual(fixture("cost-month1.json"));
  });

  it("rejects junk the same way", async () => {
    const { vm, mock } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);
    const before = mock.log.length;
    for (const bad of ["", "  ", "sixty", "1e7", "0x3f"]) {
      await vm.editFactor("videoStorage.put.payloadBytes", bad, false);
    }
    expect(mock.log).toHaveLength(before);
  });

  it("writes through, and the source view shows the wrapper idiom", async () => {
    const { vm, mock } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);

    await vm.editFactor("videoStorage.put.payloadBytes", "60000000", true);

    const patchReq = mock.requests("PATCH")[0];
    expect(patchReq.body).toEqual({ "videoStorage.put.payloadBytes": 60000000, persist: true });

    const source = vm.state.source as SourceDoc;
    expect(source.text).toContain("payloadBytes: 60000000");
    const note = source.annotations.find((a) => a.entries["payloadBytes"] === 60000000);
    expect(note).toBeDefined();
    expect(note!.wrapper.end).toBeGreaterThan(note!.wrapper.start);
    // The wrapped expression reads [expr, { ... }][0] in the text.
    const wrapped = source.text.slice(note!.wrapper.start, note!.wrapper.end);
    expect(wrapped.startsWith("[")).toBe(true);
    expect(wrapped.endsWith("][0]")).toBe(true);
    expect(wrapped).toContain("payloadBytes: 60000000");

    const html = renderSource(vm.state);
    expect(html).toContain("payloadBytes: 60000000");
  });

  it("totals afterwards match a fresh session on the written file", async () => {
    const { vm } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);
    await vm.editFactor("videoStorage.put.payloadBytes", "60000000", true);

    const shown = vm.state.report as CostReportDoc;
    expect(shown).toEqual(afterReport);

    const strip = ({ source_version: _, ...rest }: CostReportDoc) => rest;
    expect(strip(shown)).toEqual(strip(freshReport));
    expect(shown.total_micro_usd).toBe(freshReport.total_micro_usd);

    // The patch response itself quoted the same total for the vendor.
    expect(patch.totals["acme-v1"]?.total_micro_usd).toBe(afterReport.total_micro_usd);
  });

  it("adopts the bumped source version instead of flagging itself stale", async () => {
    const { vm } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);
    const loadedVersion = vm.state.sourceVersion;

    await vm.editFactor("videoStorage.put.payloadBytes", "60000000", true);

    expect(vm.state.sourceVersion).toBe(patch.source_version);
    expect(vm.state.sourceVersion).toBeGreaterThan(loadedVersion);
    expect(vm.state.staleVersion).toBeNull();

    const row = vm.state.factors.find((f) => f.id === "videoStorage.put.payloadBytes");
    expect(row?.value).toBe(60000000);
    expect(row?.value_source).toBe("annotation");
  });

  it("the updated storage price lands on the badge", async () => {
    const { vm } = persistHarness();
    await vm.load(fixture<SourceDoc>("source-before.json").text);
    await vm.editFactor("videoStorage.put.payloadBytes", "60000000", true);

    const storage = afterReport.nodes
      .find((n) => n.id === "videoStorage.put")!
      .factors.find((f) => f.id === "videoStorage.put.storage")!;
    expect(renderSource(vm.state)).toContain(storage.display);
  });
});
