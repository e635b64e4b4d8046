// HTML for each widget, built from ViewState alone. Every function is
// a pure string producer so tests can assert on markup without a DOM.
//
// The one non-obvious job here is placing cost badges. Node spans are
// byte offsets into the UTF-8 source; JavaScript strings index UTF-16
// code units. badgeInsertions converts one to the other before any
// slicing happens, otherwise a multibyte character anywhere in the
// program would shear every badge after it.

import type { GraphNode, ReportNode } from "./types";
import type { ViewState } from "./viewmodel";
import { MAX_MONTH } from "./viewmodel";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Map from UTF-8 byte offset to UTF-16 code unit offset, defined on
 * every code point boundary of the text. */
export function byteToUnitMap(text: string): Map<number, number> {
  const map = new Map<number, number>();
  let byte = 0;
  let unit = 0;
  map.set(0, 0);
  for (const ch of text) {
    const cp = ch.codePointAt(0) as number;
    byte += cp <= 0x7f ? 1 : cp <= 0x7ff ? 2 : cp <= 0xffff ? 3 : 4;
    unit += ch.length;
    map.set(byte, unit);
  }
  return map;
}

interface Insertion {
  unit: number;
  html: string;
}

function badgeHtml(node: GraphNode, entry: ReportNode | undefined, missing: string[]): string {
  const id = escapeHtml(node.id);
  if (missing.length > 0) {
    const title = `waiting on ${missing.join(", ")}`;
    return `<span class="badge badge-unresolved" data-node="${id}" title="${escapeHtml(title)}">needs input</span>`;
  }
  if (entry === undefined) {
    return `<span class="badge badge-pending" data-node="${id}">&hellip;</span>`;
  }
  // String-join the per-factor amounts the service already formatted.
  const amounts = entry.factors.map((f) => f.display).join(" + ");
  const title = entry.factors
    .map((f) => `${f.id}: ${f.quantity} ${f.unit}`)
    .join("\n");
  return `<span class="badge badge-cost" data-node="${id}" title="${escapeHtml(title)}">${escapeHtml(
    `${entry.count}x ${amounts}`,
  )}</span>`;
}

/** One badge per graph node, anchored at the end of the node's span.
 * Returns insertions sorted by position, ready to splice. */
export function badgeInsertions(state: ViewState): Insertion[] {
  const { source, graph } = state;
  if (source === null || graph === null) return [];
  const toUnit = byteToUnitMap(source.text);
  const byNode = new Map<string, ReportNode>();
  if (state.report !== null) {
    for (const entry of state.report.nodes) byNode.set(entry.id, entry);
  }
  const missingByNode = new Map<string, string[]>();
  for (const row of state.factors) {
    if (row.resolved) continue;
    const keys = missingByNode.get(row.node) ?? [];
    keys.push(row.id);
    missingByNode.set(row.node, keys);
  }
  const inserts: Insertion[] = [];
  for (const node of graph.nodes) {
    const unit = toUnit.get(node.span.end);
    if (unit === undefined) {
      throw new Error(`node ${node.id} span ends inside a code point (byte ${node.span.end})`);
    }
    inserts.push({
      unit,
      html: badgeHtml(node, byNode.get(node.id), missingByNode.get(node.id) ?? []),
    });
  }
  inserts.sort((a, b) => a.unit - b.unit);
  return inserts;
}

/** The read-only code pane with one cost badge per node. */
export function renderSource(state: ViewState): string {
  if (state.source === null || state.graph === null) {
    return `<pre class="source" data-role="source"></pre>`;
  }
  const text = state.source.text;
  let out = "";
  let cursor = 0;
  for (const ins of badgeInsertions(state)) {
    out += escapeHtml(text.slice(cursor, ins.unit)) + ins.html;
    cursor = ins.unit;
  }
  out += escapeHtml(text.slice(cursor));
  return `<pre class="source" data-role="source">${out}</pre>`;
}

export function renderBanners(state: ViewState): string {
  let out = "";
  if (state.staleVersion !== null) {
    out +=
      `<div class="banner banner-stale" data-role="stale-banner">` +
      `the program changed (version ${state.staleVersion}, viewing ${state.sourceVersion}); ` +
      `reload to pick up the new source</div>`;
  }
  if (state.banner !== null) {
    out += `<div class="banner banner-error" data-role="error-banner">${escapeHtml(state.banner)} <button data-role="dismiss">dismiss</button></div>`;
  }
  return out;
}

/** Month picker, vendor choice, the total, and the comparison panel. */
export function renderTotals(state: ViewState): string {
  const slider =
    `<label class="month">month ` +
    `<input type="range" data-role="month" min="1" max="${MAX_MONTH}" step="1" value="${state.month}">` +
    ` <output data-role="month-value">${state.month}</output></label>`;

  const options = state.catalogs
    .map((c) => {
      const sel = c.id === state.vendor ? " selected" : "";
      return `<option value="${escapeHtml(c.id)}"${sel}>${escapeHtml(c.vendor_id)} ${escapeHtml(c.version)}</option>`;
    })
    .join("");
  const vendor = `<label class="vendor">vendor <select data-role="vendor"><option value="">default</option>${options}</select></label>`;

  let total: string;
  if (state.report !== null) {
    const r = state.report;
    total =
      `<div class="total" data-role="total">${escapeHtml(r.total_display)}` +
      `<span class="total-meta">${escapeHtml(r.vendor)}, month ${r.month}, ${escapeHtml(r.engine)}</span></div>`;
  } else if (state.unresolved.length > 0) {
    const keys = state.unresolved.map(escapeHtml).join(", ");
    total = `<div class="total total-blocked" data-role="total">no total yet; set ${keys}</div>`;
  } else {
    total = `<div class="total" data-role="total">&hellip;</div>`;
  }

  const toggle = `<button data-role="compare-toggle">${state.comparing ? "hide vendors" : "compare vendors"}</button>`;

  let panel = "";
  if (state.comparing && state.compare !== null) {
    const rows = state.compare.comparisons
      .map((c) => {
        const deltas = Object.entries(c.node_deltas)
          .filter(([, v]) => v !== 0)
          .map(([k, v]) => `${escapeHtml(k)} ${v > 0 ? "+" : ""}${v}`)
          .join(", ");
        const baseline = c.vendor === state.compare?.baseline ? " (baseline)" : "";
        return (
          `<tr><td>${escapeHtml(c.vendor)}${baseline}</td>` +
          `<td>${escapeHtml(c.total_display)}</td>` +
          `<td class="deltas">${deltas || "no per-node change"}</td></tr>`
        );
      })
      .join("");
    panel =
      `<table class="compare" data-role="compare-panel">` +
      `<thead><tr><th>vendor</th><th>total</th><th>node deltas (micro-USD)</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>`;
  }

  return `<section class="totals">${slider}${vendor}${total}${toggle}${panel}</section>`;
}

/** Factor catalogue: resolved rows show their value and where it came
 * from; unresolved rows get the editor treatment and a visible flag. */
export function renderFactors(state: ViewState): string {
  const rows = state.factors
    .map((row) => {
      const key = escapeHtml(row.id);
      const cls = row.resolved ? "factor" : "factor factor-unresolved";
      const err = state.fieldErrors[row.id];
      const editable = row.origin === "external";
      let valueCell: string;
      if (editable) {
        const current = row.value === null ? "" : String(row.value);
        valueCell =
          `<input data-role="factor-input" data-key="${key}" value="${escapeHtml(current)}" ` +
          `placeholder="${row.resolved ? "" : "required"}">` +
          `<label><input type="checkbox" data-role="factor-persist" data-key="${key}"> write to source</label>` +
          `<button data-role="factor-apply" data-key="${key}">apply</button>` +
          (err ? `<span class="field-error" data-role="field-error" data-key="${key}">${escapeHtml(err)}</span>` : "");
      } else {
        valueCell = `<code>${escapeHtml(String(row.value ?? ""))}</code>`;
      }
      return (
        `<tr class="${cls}" data-key="${key}">` +
        `<td>${key}</td><td>${escapeHtml(row.node)}</td><td>${escapeHtml(row.kind)}</td>` +
        `<td>${valueCell}</td><td>${escapeHtml(row.value_source)}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="factors" data-role="factors">` +
    `<thead><tr><th>factor</th><th>node</th><th>kind</th><th>value</th><th>from</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

/** Route form for wiring an external HTTP call back into the graph. */
export function renderLinkForm(state: ViewState): string {
  if (state.graph === null) return "";
  const calls = state.graph.nodes.filter((n) => n.class === "ExternalHttpCall");
  if (calls.length === 0) return "";
  const options = calls
    .map((n) => `<option value="${escapeHtml(n.id)}">${escapeHtml(n.id)}</option>`)
    .join("");
  return (
    `<form class="link" data-role="link-form">` +
    `<span>treat</span> <select data-role="link-call">${options}</select>` +
    `<span>as a call to route</span> <input data-role="link-route" placeholder="/hook">` +
    `<button data-role="link-apply" type="button">link</button></form>`
  );
}

export function renderApp(state: ViewState): string {
  if (state.phase === "empty") {
    return (
      renderBanners(state) +
      `<section class="intake" data-role="intake">` +
      `<textarea data-role="program" rows="16" placeholder="bring cloud;"></textarea>` +
      `<button data-role="analyze">estimate cost</button></section>`
    );
  }
  if (state.phase === "loading") {
    return renderBanners(state) + `<div class="loading">analyzing&hellip;</div>`;
  }
  return (
    renderBanners(state) +
    renderTotals(state) +
    `<div class="columns"><div class="col">` +
    renderSource(state) +
    `</div><div class="col">` +
    renderFactors(state) +
    renderLinkForm(state) +
    `</div></div>`
  );
}
