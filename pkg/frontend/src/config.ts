// The one configuration knob: where the cost service lives. Set
// window.PENNY_BASE_URL before loading the bundle to point elsewhere.

export interface UiConfig {
  baseUrl: string;
}

declare global {
  interface Window {
    PENNY_BASE_URL?: string;
  }
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8000";

export function resolveConfig(): UiConfig {
  const override = typeof window !== "undefined" ? window.PENNY_BASE_URL : undefined;
  const base = override ?? DEFAULT_BASE_URL;
  return { baseUrl: base.replace(/\/+$/, "") };
}
