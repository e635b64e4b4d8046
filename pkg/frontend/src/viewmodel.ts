// Session state and the operations the widgets call. The rule that
// shapes everything here: no arithmetic on money or quantities, ever.
// The view model stores service responses and selects which one a
// widget should show; if a number is on screen, some response carried
// it.

import { ApiClient, ServiceError } from "./api";
import type {
  CatalogInfo,
  CatalogueRow,
  CompareDoc,
  CostReportDoc,
  GraphDoc,
  Scalar,
  SessionDoc,
  SourceDoc,
} from "./types";

export interface ViewState {
  phase: "empty" | "loading" | "ready";
  session: string | null;
  /** Version of the source this view was rendered from. */
  sourceVersion: number;
  /** A newer version seen in a response; non-null means reload needed. */
  staleVersion: number | null;
  month: number;
  vendor: string | null;
  catalogs: CatalogInfo[];
  source: SourceDoc | null;
  graph: GraphDoc | null;
  factors: CatalogueRow[];
  unresolved: string[];
  report: CostReportDoc | null;
  comparing: boolean;
  compare: CompareDoc | null;
  fieldErrors: Record<string, string>;
  banner: string | null;
}

export type Listener = (state: ViewState) => void;

const MIN_MONTH = 1;
export const MAX_MONTH = 24;

function initialState(): ViewState {
  return {
    phase: "empty",
    session: null,
    sourceVersion: 0,
    staleVersion: null,
    month: 1,
    vendor: null,
    catalogs: [],
    source: null,
    graph: null,
    factors: [],
    unresolved: [],
    report: null,
    comparing: false,
    compare: null,
    fieldErrors: {},
    banner: null,
  };
}

/** Accepts plain non-negative decimal numbers; everything a factor
 * editor may submit. Returns null when the text is not one. */
export function parseFactorValue(raw: string): number | null {
  const text = raw.trim();
  if (!/^\d+(\.\d+)?$/.test(text)) return null;
  const value = Number(text);
  if (!Number.isFinite(value)) return null;
  return value;
}

export class ViewModel {
  readonly state: ViewState = initialState();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** Flags the reload banner when a response reports a source version
   * newer than the one this view was built from. */
  private noteVersion(version: number): void {
    if (version > this.state.sourceVersion) {
      this.state.staleVersion = version;
    }
  }

  private applySession(doc: SessionDoc): void {
    this.state.session = doc.session;
    this.state.sourceVersion = doc.source_version;
    this.state.staleVersion = null;
    this.state.graph = doc.graph;
    this.state.factors = doc.factors;
    this.state.unresolved = doc.unresolved;
  }

  /** Fetch the cost report if every factor is resolved; otherwise the
   * total stays blocked with the unresolved keys on display. */
  private async refreshCost(): Promise<void> {
    const { session, unresolved } = this.state;
    if (session === null) return;
    if (unresolved.length > 0) {
      this.state.report = null;
      return;
    }
    try {
      const report = await this.api.getCost(session, this.state.month, this.state.vendor);
      this.noteVersion(report.source_version);
      this.state.report = report;
    } catch (err) {
      if (err instanceof ServiceError && err.code === "UnresolvedAssumption") {
        this.state.report = null;
        this.state.unresolved = err.keys;
      } else {
        this.fail(err);
      }
    }
  }

  private fail(err: unknown): void {
    if (err instanceof ServiceError) {
      this.state.banner = `${err.code}: ${err.message}`;
    } else {
      this.state.banner = String(err);
    }
  }

  async load(sourceText: string, assumptions?: Record<string, Scalar>): Promise<void> {
    Object.assign(this.state, initialState());
    this.state.phase = "loading";
    this.notify();
    try {
      const session = await this.api.createSession(sourceText, { assumptions });
      this.applySession(session);
      const [catalogs, source] = await Promise.all([
        this.api.listCatalogs(),
        this.api.getSource(session.session),
      ]);
      this.state.catalogs = catalogs.catalogs;
      this.state.source = source;
      await this.refreshCost();
      this.state.phase = "ready";
    } catch (err) {
      this.state.phase = "empty";
      this.fail(err);
    }
    this.notify();
  }

  /** Month picker. Clamped to [1, 24]; a change issues exactly one
   * cost request and nothing else. */
  async setMonth(month: number): Promise<void> {
    let next = Math.floor(month);
    if (!Number.isFinite(next) || next < MIN_MONTH) next = MIN_MONTH;
    if (next > MAX_MONTH) next = MAX_MONTH;
    if (next === this.state.month || this.state.session === null) return;
    this.state.month = next;
    // The open comparison was for the previous month; drop it rather
    // than refetching behind the toggle's back.
    this.state.comparing = false;
    this.state.compare = null;
    await this.refreshCost();
    this.notify();
  }

  async setVendor(vendor: string | null): Promise<void> {
    if (vendor === this.state.vendor || this.state.session === null) return;
    this.state.vendor = vendor;
    await this.refreshCost();
    this.notify();
  }

  /** Validate locally, then write through the service and re-read
   * whatever the write may have changed. Invalid input never leaves
   * the browser. */
  async editFactor(key: string, raw: string, persist: boolean): Promise<void> {
    if (this.state.session === null) return;
    const value = parseFactorValue(raw);
    if (value === null) {
      this.state.fieldErrors[key] = "must be a non-negative number";
      this.notify();
      return;
    }
    delete this.state.fieldErrors[key];
    try {
      const patched = await this.api.patchAssumptions(this.state.session, { [key]: value }, persist);
      this.state.sourceVersion = patched.source_version;
      this.state.staleVersion = null;
      this.state.factors = patched.factors;
      this.state.unresolved = patched.unresolved;
      // Re-read the committed state: a persisted write moved spans and
      // rewrote the text, and any write can change the price.
      const [source, graph] = await Promise.all([
        this.api.getSource(this.state.session),
        this.api.getGraph(this.state.session),
      ]);
      this.state.source = source;
      this.state.graph = graph;
      await this.refreshCost();
    } catch (err) {
      this.fail(err);
    }
    this.notify();
  }

  async linkBlackBox(call: string, route: string): Promise<void> {
    if (this.state.session === null) return;
    try {
      const session = await this.api.linkBlackBox(this.state.session, call, route);
      this.applySession(session);
      const source = await this.api.getSource(session.session);
      this.state.source = source;
      await this.refreshCost();
    } catch (err) {
      this.fail(err);
    }
    this.notify();
  }

  async toggleCompare(): Promise<void> {
    if (this.state.session === null) return;
    if (this.state.comparing) {
      this.state.comparing = false;
      this.state.compare = null;
      this.notify();
      return;
    }
    try {
      const compare = await this.api.getCompare(this.state.session, this.state.month);
      this.noteVersion(compare.source_version);
      this.state.compare = compare;
      this.state.comparing = true;
    } catch (err) {
      this.fail(err);
    }
    this.notify();
  }

  dismissBanner(): void {
    this.state.banner = null;
    this.notify();
  }
}
