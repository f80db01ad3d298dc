/** Client view model: selections, budget inputs, pins, the active
 * solution, and the cost history series. Validation mirrors the service
 * rules so bad submissions are caught before the network. */

import type { InstanceSummary, SolutionPayload } from "./api.js";

export interface SwapPick {
  type: string;
  insert: number;
  remove: number;
}

export interface ViewState {
  instance: InstanceSummary | null;
  budgets: Record<string, number>;
  pinned: Record<string, number[]>;
  hiddenTypes: Set<string>;
  solutionId: string | null;
  solution: SolutionPayload | null;
  selectedSwap: SwapPick | null;
  acHistory: number[];
  jobInFlight: boolean;
}

export function initialState(): ViewState {
  return {
    instance: null,
    budgets: {},
    pinned: {},
    hiddenTypes: new Set(),
    solutionId: null,
    solution: null,
    selectedSwap: null,
    acHistory: [],
    jobInFlight: false,
  };
}

export function selectInstance(state: ViewState, instance: InstanceSummary): ViewState {
  return {
    ...initialState(),
    instance,
    budgets: { ...instance.budgets },
  };
}

/** Budget form errors; an empty list means the form may submit. */
export function budgetErrors(state: ViewState): string[] {
  const errors: string[] = [];
  if (!state.instance) return ["no instance selected"];
  let total = 0;
  for (const [k, p] of Object.entries(state.budgets)) {
    if (!Number.isInteger(p) || p < 1) {
      errors.push(`budget for ${k} must be a positive integer`);
    } else {
      total += p;
    }
  }
  if (total > state.instance.n) {
    errors.push(
      `total budget ${total} exceeds ${state.instance.n} regions; ` +
        "types are mutually exclusive per region",
    );
  }
  return errors;
}

export function pinErrors(state: ViewState): string[] {
  const errors: string[] = [];
  const seen = new Map<number, string>();
  for (const [k, nodes] of Object.entries(state.pinned)) {
    const budget = state.budgets[k] ?? 0;
    if (nodes.length > budget) {
      errors.push(`${nodes.length} pins exceed budget ${budget} for ${k}`);
    }
    for (const v of nodes) {
      const owner = seen.get(v);
      if (owner !== undefined && owner !== k) {
        errors.push(`region ${v} pinned for both ${owner} and ${k}`);
      }
      seen.set(v, k);
    }
  }
  return errors;
}

export function canSubmit(state: ViewState): boolean {
  return (
    !state.jobInFlight &&
    budgetErrors(state).length === 0 &&
    pinErrors(state).length === 0
  );
}

export function togglePin(state: ViewState, type: string, node: number): ViewState {
  const current = state.pinned[type] ?? [];
  const next = current.includes(node)
    ? current.filter((v) => v !== node)
    : [...current, node].sort((a, b) => a - b);
  return { ...state, pinned: { ...state.pinned, [type]: next } };
}

export function applySolution(
  state: ViewState,
  solutionId: string,
  solution: SolutionPayload,
): ViewState {
  return {
    ...state,
    solutionId,
    solution,
    selectedSwap: null,
    acHistory: costHistory(solution),
    jobInFlight: false,
  };
}

/** Cumulative access-cost change after each logged step. Derived purely
 * from the service's step deltas; no anchoring assumptions. */
export function costHistory(solution: SolutionPayload): number[] {
  const series = [0];
  let running = 0;
  for (const s of solution.steps) {
    running += s.delta;
    series.push(running);
  }
  return series;
}

/** Swap pick from two clicks: first an occupied marker, then a vacant
 * point of the same view; order-insensitive for convenience. */
export function pickSwap(
  state: ViewState,
  type: string,
  node: number,
): ViewState {
  if (!state.solution) return state;
  const placement = state.solution.type_placements[type] ?? [];
  const occupiedAnywhere = new Set(
    Object.values(state.solution.type_placements).flat(),
  );
  const partial = state.selectedSwap;
  if (placement.includes(node)) {
    // clicked one of this type's facilities: it becomes the remove side
    const insert = partial && partial.type === type ? partial.insert : -1;
    return {
      ...state,
      selectedSwap: { type, insert, remove: node },
    };
  }
  if (occupiedAnywhere.has(node)) return state; // other type's facility
  if (partial && partial.type === type && partial.remove >= 0) {
    return { ...state, selectedSwap: { ...partial, insert: node } };
  }
  return { ...state, selectedSwap: { type, insert: node, remove: -1 } };
}

export function swapReady(state: ViewState): boolean {
  const s = state.selectedSwap;
  return !!s && s.insert >= 0 && s.remove >= 0;
}

/** Pins for a committed manual swap: the whole current placement is
 * frozen, with the swap applied to its type. The re-solve therefore
 * cannot move anything else. */
export function commitPins(
  solution: SolutionPayload,
  pick: SwapPick,
): Record<string, number[]> {
  const pins: Record<string, number[]> = {};
  for (const [k, nodes] of Object.entries(solution.type_placements)) {
    const kept =
      k === pick.type
        ? [...nodes.filter((v) => v !== pick.remove), pick.insert]
        : [...nodes];
    pins[k] = kept.sort((a, b) => a - b);
  }
  return pins;
}
