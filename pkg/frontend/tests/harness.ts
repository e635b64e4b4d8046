// Common wiring: a view model pointed at a FetchMock that serves the
// recorded happy-path session.

import { ApiClient } from "../src/api";
import { ViewModel } from "../src/viewmodel";
import type { CostReportDoc, SessionDoc, SourceDoc } from "../src/types";
import { FetchMock, fixture } from "./mock";

export const BASE = "http://svc";

export interface Harness {
  vm: ViewModel;
  mock: FetchMock;
  sid: string;
  sourceText: string;
}

/** Mock primed with the resolved fixture session: POST /sessions plus
 * the three reads load() performs. Nothing else is routed; add more
 * with mock.on as the test needs them. */
export function resolvedHarness(): Harness {
  const session = fixture<SessionDoc>("session.json");
  const source = fixture<SourceDoc>("source-before.json");
  const sid = session.session;
  const mock = new FetchMock()
    .on("POST", "/sessions", session, 201)
    .on("GET", "/catalogs", fixture("catalogs.json"))
    .on("GET", `/sessions/${sid}/source`, source)
    .on("GET", `/sessions/${sid}/cost?month=1`, fixture("cost-month1.json"));
  mock.install();
  const vm = new ViewModel(new ApiClient(BASE));
  return { vm, mock, sid, sourceText: source.text };
}

export async function loadedHarness(): Promise<Harness> {
  const h = resolvedHarness();
  await h.vm.load(h.sourceText);
  return h;
}

/** Factor components flattened to id -> micro_usd and friends. */
export function factorsById(report: CostReportDoc) {
  const out = new Map<string, { kind: string; micro_usd: number; quantity: string }>();
  for (const node of report.nodes) {
    for (const f of node.factors) {
      out.set(f.id, { kind: f.kind, micro_usd: f.micro_usd, quantity: f.quantity });
    }
  }
  return out;
}
