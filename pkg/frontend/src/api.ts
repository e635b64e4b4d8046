// Typed client for the cost service. One fetch per method, no
// retries, no caching; the view model decides when to call.

import type {
  CatalogInfo,
  CompareDoc,
  CostReportDoc,
  GraphDoc,
  PatchResponse,
  Scalar,
  ServiceErrorDoc,
  SessionDoc,
  SourceDoc,
} from "./types";

export class ServiceError extends Error {
  readonly status: number;
  readonly doc: ServiceErrorDoc;

  constructor(status: number, doc: ServiceErrorDoc) {
    super(doc.message ?? doc.error ?? `service error ${status}`);
    this.name = "ServiceError";
    this.status = status;
    this.doc = doc;
  }

  get code(): string {
    return this.doc.error ?? "Unknown";
  }

  get keys(): string[] {
    return this.doc.keys ?? [];
  }
}

export interface CreateSessionOptions {
  assumptions?: Record<string, Scalar>;
  catalogs?: string[];
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { accept: "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["content-type"] = "application/json";
    }
    const response = await fetch(this.baseUrl + path, init);
    const text = await response.text();
    let doc: unknown = null;
    if (text.length > 0) {
      doc = JSON.parse(text);
    }
    if (!response.ok) {
      throw new ServiceError(response.status, (doc ?? {}) as ServiceErrorDoc);
    }
    return doc as T;
  }

  createSession(source: string, options: CreateSessionOptions = {}): Promise<SessionDoc> {
    const body: Record<string, unknown> = { source };
    if (options.assumptions) body.assumptions = options.assumptions;
    if (options.catalogs) body.catalogs = options.catalogs;
    return this.request<SessionDoc>("POST", "/sessions", body);
  }

  listCatalogs(): Promise<{ catalogs: CatalogInfo[] }> {
    return this.request("GET", "/catalogs");
  }

  getCost(session: string, month: number, vendor?: string | null): Promise<CostReportDoc> {
    let query = `month=${month}`;
    if (vendor) query += `&vendor=${encodeURIComponent(vendor)}`;
    return this.request("GET", `/sessions/${session}/cost?${query}`);
  }

  getCompare(session: string, month: number): Promise<CompareDoc> {
    return this.request("GET", `/sessions/${session}/compare?month=${month}`);
  }

  getSource(session: string): Promise<SourceDoc> {
    return this.request("GET", `/sessions/${session}/source`);
  }

  getGraph(session: string): Promise<GraphDoc> {
    return this.request("GET", `/sessions/${session}/graph?format=json`);
  }

  patchAssumptions(
    session: string,
    values: Record<string, Scalar>,
    persist: boolean,
  ): Promise<PatchResponse> {
    return this.request("PATCH", `/sessions/${session}/assumptions`, { ...values, persist });
  }

  linkBlackBox(session: string, call: string, route: string): Promise<SessionDoc> {
    return this.request("POST", `/sessions/${session}/black-box-link`, { call, route });
  }
}
