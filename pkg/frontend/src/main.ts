// Browser entry point: owns the DOM, delegates every event to the view
// model, repaints from scratch on each state change. Nothing in here is
// imported by tests; behavior lives in viewmodel.ts and render.ts.

import { ApiClient } from "./api";
import { resolveConfig } from "./config";
import { renderApp } from "./render";
import { ViewModel } from "./viewmodel";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app container");

const api = new ApiClient(resolveConfig().baseUrl);
const vm = new ViewModel(api);

vm.subscribe(() => {
  root.innerHTML = renderApp(vm.state);
});

function roleOf(target: EventTarget | null): { role: string; el: HTMLElement } | null {
  if (!(target instanceof HTMLElement)) return null;
  const el = target.closest<HTMLElement>("[data-role]");
  if (el === null) return null;
  return { role: el.dataset.role ?? "", el };
}

root.addEventListener("click", (event) => {
  const hit = roleOf(event.target);
  if (hit === null) return;
  const { role, el } = hit;
  if (role === "analyze") {
    const box = root.querySelector<HTMLTextAreaElement>("[data-role=program]");
    if (box !== null && box.value.trim() !== "") void vm.load(box.value);
  } else if (role === "compare-toggle") {
    void vm.toggleCompare();
  } else if (role === "dismiss") {
    vm.dismissBanner();
  } else if (role === "factor-apply") {
    const key = el.dataset.key ?? "";
    const input = root.querySelector<HTMLInputElement>(`[data-role=factor-input][data-key="${key}"]`);
    const persist = root.querySelector<HTMLInputElement>(`[data-role=factor-persist][data-key="${key}"]`);
    if (input !== null) void vm.editFactor(key, input.value, persist?.checked ?? false);
  } else if (role === "link-apply") {
    const call = root.querySelector<HTMLSelectElement>("[data-role=link-call]");
    const route = root.querySelector<HTMLInputElement>("[data-role=link-route]");
    if (call !== null && route !== null && route.value.trim() !== "") {
      void vm.linkBlackBox(call.value, route.value.trim());
    }
  }
});

root.addEventListener("change", (event) => {
  const hit = roleOf(event.target);
  if (hit === null) return;
  const { role, el } = hit;
  if (role === "month" && el instanceof HTMLInputElement) {
    void vm.setMonth(Number(el.value));
  } else if (role === "vendor" && el instanceof HTMLSelectElement) {
    void vm.setVendor(el.value === "" ? null : el.value);
  }
});

// Live month readout while dragging; the request itself waits for the
// change event so a drag costs one fetch, not one per pixel.
root.addEventListener("input", (event) => {
  const hit = roleOf(event.target);
  if (hit === null || hit.role !== "month") return;
  const out = root.querySelector<HTMLOutputElement>("[data-role=month-value]");
  if (out !== null && hit.el instanceof HTMLInputElement) out.textContent = hit.el.value;
});
