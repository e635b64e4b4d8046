// fetch stand-in for the test suite. Every response body it serves
// comes from frontend/tests/fixtures/, which tools/record_ui_fixtures.py
// at the repository root recorded from the real service; the mock only
// matches method + path and replays bytes. Unexpected requests throw,
// which is what makes "issues exactly one request" assertions honest.

import { readFileSync } from "node:fs";

export function fixtureText(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8");
}

export function fixture<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

interface Canned {
  status: number;
  body: string;
}

export class FetchMock {
  private routes = new Map<string, Canned[]>();
  readonly log: RecordedRequest[] = [];

  /** Queue a response for `METHOD /path?query`. Repeated calls on the
   * same key queue in order; the final response replays forever. */
  on(method: string, path: string, doc: unknown, status = 200): this {
    const key = `${method} ${path}`;
    const queue = this.routes.get(key) ?? [];
    queue.push({ status, body: typeof doc === "string" ? doc : JSON.stringify(doc) });
    this.routes.set(key, queue);
    return this;
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    const path = url.pathname + url.search;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.log.push({ method, path, body });
    const queue = this.routes.get(`${method} ${path}`);
    if (queue === undefined || queue.length === 0) {
      throw new Error(`unexpected request: ${method} ${path}`);
    }
    const canned = queue.length > 1 ? (queue.shift() as Canned) : queue[0];
    return new Response(canned.body, {
      status: canned.status,
      headers: { "content-type": "application/json" },
    });
  };

  requests(method?: string, pathPrefix?: string): RecordedRequest[] {
    return this.log.filter(
      (r) =>
        (method === undefined || r.method === method) &&
        (pathPrefix === undefined || r.path.startsWith(pathPrefix)),
    );
  }

  install(): void {
    globalThis.fetch = this.fetch as typeof fetch;
  }
}
