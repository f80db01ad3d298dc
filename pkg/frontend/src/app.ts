/** DOM wiring: catalog picker, budget and pin forms, solve flow, the
 * scatter view with click-to-pick swaps, the what-if panel, and the cost
 * chart. All logic lives in the imported modules; this file only moves
 * data between them and the page. */

import { PlannerApi, type InstanceSummary } from "./api.js";
import { chartSvg } from "./chart.js";
import { buildLayers, layersToSvg, TYPE_COLORS, type Viewport } from "./render.js";
import {
  applySolution,
  budgetErrors,
  canSubmit,
  commitPins,
  initialState,
  pickSwap,
  pinErrors,
  selectInstance,
  swapReady,
  togglePin,
  type ViewState,
} from "./state.js";
import { evaluateSwap, type WhatIfView } from "./whatif.js";

const VIEWPORT: Viewport = { width: 720, height: 520, pad: 28 };
const CHART = { width: 720, height: 160, pad: 24 };

const api = new PlannerApi("");
let state: ViewState = initialState();
let catalog: InstanceSummary[] = [];
let whatif: WhatIfView | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderBudgets() {
  const host = el<HTMLDivElement>("budgets");
  host.innerHTML = "";
  if (!state.instance) return;
  Object.keys(state.instance.instance.budgets).forEach((k, ti) => {
    const row = document.createElement("div");
    row.className = "budget-row";
    const swatch = `<span class="swatch" style="background:${
      TYPE_COLORS[ti % TYPE_COLORS.length]
    }"></span>`;
    row.innerHTML = `<label>${swatch}${k}</label>`;
    const input = document.createElement("input");
    input.type = "number";
    input.min = "1";
    input.value = String(state.budgets[k] ?? 1);
    input.addEventListener("input", () => {
      state = {
        ...state,
        budgets: { ...state.budgets, [k]: Number(input.value) },
      };
      renderControls();
    });
    row.appendChild(input);
    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = !state.hiddenTypes.has(k);
    toggle.title = "show this type";
    toggle.addEventListener("change", () => {
      const hidden = new Set(state.hiddenTypes);
      if (toggle.checked) hidden.delete(k);
      else hidden.add(k);
      state = { ...state, hiddenTypes: hidden };
      renderMap();
    });
    row.appendChild(toggle);
    host.appendChild(row);
  });
}

function renderControls() {
  const errors = [...budgetErrors(state), ...pinErrors(state)];
  el<HTMLDivElement>("form-errors").textContent = errors.join("; ");
  el<HTMLButtonElement>("solve").disabled = !canSubmit(state);
  el<HTMLDivElement>("pins").textContent = Object.entries(state.pinned)
    .filter(([, nodes]) => nodes.length)
    .map(([k, nodes]) => `${k}: ${nodes.join(", ")}`)
    .join("  |  ") || "none (shift-click a region to pin for the first type)";
}

function renderMap() {
  if (!state.instance) return;
  const layers = buildLayers(state.instance.instance, state.solution, {
    viewport: VIEWPORT,
    hiddenTypes: state.hiddenTypes,
    pinned: state.pinned,
  });
  el<HTMLDivElement>("map").innerHTML = layersToSvg(layers, VIEWPORT);
  const svg = el<HTMLDivElement>("map").querySelector("svg");
  if (!svg) return;
  svg.addEventListener("click", (ev) => {
    const target = ev.target as SVGElement;
    const nodeAttr = target.getAttribute("data-node");
    const facAttr = target.getAttribute("data-facility");
    if (facAttr) {
      const [ftype, node] = facAttr.split(":");
      onNodeClick(ftype!, Number(node), ev.shiftKey);
    } else if (nodeAttr) {
      const ftype = activeType();
      onNodeClick(ftype, Number(nodeAttr), ev.shiftKey);
    }
  });
}

function activeType(): string {
  const sel = el<HTMLSelectElement>("swap-type");
  return sel.value;
}

function renderSwapTypes() {
  const sel = el<HTMLSelectElement>("swap-type");
  sel.innerHTML = "";
  if (!state.instance) return;
  for (const k of Object.keys(state.instance.instance.budgets)) {
    const opt = document.createElement("option");
    opt.value = k;
    opt.textContent = k;
    sel.appendChild(opt);
  }
}

function onNodeClick(ftype: string, node: number, shift: boolean) {
  if (shift) {
    state = togglePin(state, ftype, node);
    renderControls();
    renderMap();
    return;
  }
  state = pickSwap(state, ftype, node);
  el<HTMLDivElement>("swap-pick").textContent = state.selectedSwap
    ? `type ${state.selectedSwap.type}: move ${state.selectedSwap.remove >= 0 ? state.selectedSwap.remove : "?"} -> ${state.selectedSwap.insert >= 0 ? state.selectedSwap.insert : "?"}`
    : "click a facility, then a vacant region";
  if (swapReady(state) && state.solutionId) {
    void refreshWhatIf();
  }
}

async function refreshWhatIf() {
  if (!state.solutionId || !state.selectedSwap) return;
  whatif = await evaluateSwap(api, state.solutionId, state.selectedSwap);
  renderWhatIfPanel();
}

function renderWhatIfPanel() {
  const host = el<HTMLDivElement>("whatif");
  if (!whatif) {
    host.innerHTML = "<em>pick a swap to evaluate it</em>";
    return;
  }
  const cls = whatif.improving ? "improving" : "worsening";
  host.innerHTML = `
    <table class="${cls}">
      <tr><td>gain</td><td data-field="gain">${whatif.gain}</td></tr>
      <tr><td>loss</td><td data-field="loss">${whatif.loss}</td></tr>
      <tr><td>extra</td><td data-field="extra">${whatif.extra}</td></tr>
      <tr><td>&Delta; access cost</td><td data-field="delta">${whatif.delta}</td></tr>
      <tr><td>new total</td><td data-field="new_total">${whatif.newTotal}</td></tr>
    </table>
    ${whatif.error ? `<div class="badge error">${whatif.error}</div>` : ""}
  `;
  el<HTMLButtonElement>("commit").disabled = !whatif.commitEnabled;
}

async function solve(pins?: Record<string, number[]>) {
  const entry = state.instance;
  if (!entry) return;
  state = { ...state, jobInFlight: true };
  renderControls();
  try {
    const steps = Number(el<HTMLInputElement>("steps").value) || undefined;
    const jobId = await api.submitSolve({
      instance: entry.id,
      budgets: state.budgets,
      method: el<HTMLSelectElement>("method").value,
      steps,
      pinned: pins ?? state.pinned,
      seed: 0,
    });
    const envelope = await api.awaitSolution(jobId);
    state = applySolution(state, envelope.job_id, envelope.solution);
    el<HTMLDivElement>("ac").textContent =
      `access cost: ${envelope.solution.access_cost.toFixed(6)}`;
    whatif = null;
    renderWhatIfPanel();
    renderMap();
    el<HTMLDivElement>("chart").innerHTML = chartSvg(state.acHistory, CHART);
  } catch (err) {
    el<HTMLDivElement>("form-errors").textContent = String(err);
    state = { ...state, jobInFlight: false };
  }
  renderControls();
}

async function commitSelectedSwap() {
  if (!state.solution || !state.selectedSwap || !swapReady(state)) return;
  // freezing the whole adjusted placement makes the re-solve exact: no
  // pinned facility can move
  await solve(commitPins(state.solution, state.selectedSwap));
}

async function boot() {
  catalog = await api.listInstances();
  const picker = el<HTMLSelectElement>("instance");
  picker.innerHTML = "";
  for (const entry of catalog) {
    const opt = document.createElement("option");
    opt.value = entry.id;
    opt.textContent = `${entry.id} (n=${entry.n}, ${entry.metric})`;
    picker.appendChild(opt);
  }
  const pick = (id: string) => {
    const entry = catalog.find((e) => e.id === id);
    if (!entry) return;
    state = selectInstance(initialState(), entry);
    whatif = null;
    renderBudgets();
    renderSwapTypes();
    renderControls();
    renderMap();
    renderWhatIfPanel();
    el<HTMLDivElement>("chart").innerHTML = "";
    el<HTMLDivElement>("ac").textContent = "";
  };
  picker.addEventListener("change", () => pick(picker.value));
  el<HTMLButtonElement>("solve").addEventListener("click", () => void solve());
  el<HTMLButtonElement>("commit").addEventListener("click", () => void commitSelectedSwap());
  if (catalog.length) pick(catalog[0]!.id);
}

document.addEventListener("DOMContentLoaded", () => void boot());
