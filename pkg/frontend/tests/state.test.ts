import { describe, expect, it } from "vitest";

import type { InstanceSummary, SolutionPayload } from "../src/api.js";
import {
  applySolution,
  budgetErrors,
  canSubmit,
  commitPins,
  costHistory,
  initialState,
  pickSwap,
  pinErrors,
  selectInstance,
  swapReady,
  togglePin,
} from "../src/state.js";
import { LINE_DOC } from "./fixtures.js";

const SUMMARY: InstanceSummary = {
  id: "line",
  n: 4,
  metric: "euclidean",
  budgets: { a: 2 },
  instance: LINE_DOC,
};

const TWO_TYPE: InstanceSummary = {
  id: "duo",
  n: 4,
  metric: "euclidean",
  budgets: { a: 1, b: 1 },
  instance: {
    ...LINE_DOC,
    demands: { a: [1, 2, 3, 4], b: [1, 2, 3, 4] },
    budgets: { a: 1, b: 1 },
  },
};

function solved(placements: Record<string, number[]>, ac = 6): SolutionPayload {
  return {
    type_placements: placements,
    access_cost: ac,
    steps: [],
    wall_time_ms: 0,
  };
}

describe("budget validation", () => {
  it("accepts the instance defaults", () => {
    const state = selectInstance(initialState(), SUMMARY);
    expect(budgetErrors(state)).toEqual([]);
    expect(canSubmit(state)).toBe(true);
  });

  it("blocks submission when budgets exceed the region count", () => {
    const state = {
      ...selectInstance(initialState(), TWO_TYPE),
      budgets: { a: 3, b: 2 },
    };
    expect(budgetErrors(state).some((e) => e.includes("exceeds 4"))).toBe(true);
    expect(canSubmit(state)).toBe(false);
  });

  it("rejects non-positive and fractional budgets", () => {
    const state = {
      ...selectInstance(initialState(), SUMMARY),
      budgets: { a: 0.5 },
    };
    expect(budgetErrors(state).length).toBe(1);
  });
});

describe("pins", () => {
  it("toggle adds and removes, keeping the list sorted", () => {
    let state = selectInstance(initialState(), SUMMARY);
    state = togglePin(state, "a", 3);
    state = togglePin(state, "a", 1);
    expect(state.pinned["a"]).toEqual([1, 3]);
    state = togglePin(state, "a", 3);
    expect(state.pinned["a"]).toEqual([1]);
  });

  it("rejects cross-type overlap", () => {
    let state = selectInstance(initialState(), TWO_TYPE);
    state = togglePin(state, "a", 2);
    state = togglePin(state, "b", 2);
    expect(pinErrors(state).some((e) => e.includes("pinned for both"))).toBe(true);
    expect(canSubmit(state)).toBe(false);
  });

  it("rejects pins beyond the budget", () => {
    let state = selectInstance(initialState(), SUMMARY);
    state = togglePin(state, "a", 0);
    state = togglePin(state, "a", 1);
    state = togglePin(state, "a", 2);
    expect(pinErrors(state).some((e) => e.includes("exceed budget"))).toBe(true);
  });
});

describe("swap picking", () => {
  it("facility then vacant region forms a pick", () => {
    let state = selectInstance(initialState(), SUMMARY);
    state = applySolution(state, "job-1", solved({ a: [0, 2] }));
    state = pickSwap(state, "a", 0); // remove side
    expect(swapReady(state)).toBe(false);
    state = pickSwap(state, "a", 3); // insert side
    expect(state.selectedSwap).toEqual({ type: "a", insert: 3, remove: 0 });
    expect(swapReady(state)).toBe(true);
  });

  it("ignores clicks on another type's facility", () => {
    let state = selectInstance(initialState(), TWO_TYPE);
    state = applySolution(state, "job-1", solved({ a: [2], b: [3] }));
    state = pickSwap(state, "a", 2);
    const before = state.selectedSwap;
    state = pickSwap(state, "a", 3); // occupied by b: not a valid insert
    expect(state.selectedSwap).toEqual(before);
  });
});

describe("commit pins", () => {
  it("applies the swap to its type and freezes every other placement", () => {
    const pins = commitPins(solved({ a: [0, 2], b: [1] }), {
      type: "a",
      insert: 3,
      remove: 0,
    });
    expect(pins).toEqual({ a: [2, 3], b: [1] });
  });

  it("never drops the pinned facilities of other types", () => {
    const pins = commitPins(solved({ a: [5], b: [7, 9] }), {
      type: "b",
      insert: 2,
      remove: 9,
    });
    expect(pins["a"]).toEqual([5]);
    expect(pins["b"]).toEqual([2, 7]);
  });
});

describe("cost history", () => {
  it("starts at zero and accumulates the wire deltas exactly", () => {
    const payload = solved({ a: [2, 3] }, 4);
    payload.steps = [
      { insert: 3, remove: 0, delta: -2 },
      { insert: 1, remove: 3, delta: 0.5 },
    ];
    expect(costHistory(payload)).toEqual([0, -2, -1.5]);
  });

  it("empty log yields the flat origin series", () => {
    expect(costHistory(solved({ a: [1] }))).toEqual([0]);
  });
});
