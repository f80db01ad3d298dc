/** Bundled line fixture (4 collinear regions, demands 1,2,3,4) and the
 * service's exact swap decompositions for every placement of two
 * facilities, captured verbatim from the solver engine. */

import type { InstanceDoc, WhatIfResponse } from "../src/api.js";

export const LINE_DOC: InstanceDoc = {
  metric: "euclidean",
  nodes: [
    { id: 0, x: 0, y: 0 },
    { id: 1, x: 1, y: 0 },
    { id: 2, x: 2, y: 0 },
    { id: 3, x: 3, y: 0 },
  ],
  demands: { a: [1, 2, 3, 4] },
  budgets: { a: 2 },
};

export interface ScriptedSwap {
  placement: number[];
  insert: number;
  remove: number;
  response: WhatIfResponse;
}

const R = (
  placement: number[],
  insert: number,
  remove: number,
  gain: number,
  loss: number,
  extra: number,
  delta: number,
  new_total_ac: number,
): ScriptedSwap => ({
  placement,
  insert,
  remove,
  response: { gain, loss, extra, delta, new_total_ac },
});

export const SCRIPTED_SWAPS: ScriptedSwap[] = [
  R([0, 1], 2, 0, 7.0, 1.0, 0.0, -6.0, 5.0),
  R([0, 1], 3, 0, 8.0, 1.0, 0.0, -7.0, 4.0),
  R([0, 1], 2, 1, 7.0, 9.0, 7.0, -5.0, 6.0),
  R([0, 1], 3, 1, 8.0, 9.0, 7.0, -6.0, 5.0),
  R([0, 2], 1, 0, 2.0, 2.0, 1.0, -1.0, 5.0),
  R([0, 2], 3, 0, 4.0, 2.0, 0.0, -2.0, 4.0),
  R([0, 2], 1, 2, 2.0, 14.0, 7.0, 5.0, 11.0),
  R([0, 2], 3, 2, 4.0, 14.0, 11.0, -1.0, 5.0),
  R([0, 3], 1, 0, 2.0, 5.0, 4.0, -1.0, 4.0),
  R([0, 3], 2, 0, 3.0, 5.0, 3.0, -1.0, 4.0),
  R([0, 3], 1, 3, 2.0, 15.0, 7.0, 6.0, 11.0),
  R([0, 3], 2, 3, 3.0, 15.0, 11.0, 1.0, 6.0),
  R([1, 2], 0, 1, 1.0, 3.0, 1.0, 1.0, 6.0),
  R([1, 2], 3, 1, 4.0, 3.0, 0.0, -1.0, 4.0),
  R([1, 2], 0, 2, 1.0, 7.0, 0.0, 6.0, 11.0),
  R([1, 2], 3, 2, 4.0, 7.0, 4.0, -1.0, 4.0),
  R([1, 3], 0, 1, 1.0, 6.0, 4.0, 1.0, 5.0),
  R([1, 3], 2, 1, 3.0, 6.0, 3.0, 0.0, 4.0),
  R([1, 3], 0, 3, 1.0, 8.0, 0.0, 7.0, 11.0),
  R([1, 3], 2, 3, 3.0, 8.0, 4.0, 1.0, 5.0),
  R([2, 3], 0, 2, 2.0, 6.0, 3.0, 1.0, 5.0),
  R([2, 3], 1, 2, 3.0, 6.0, 3.0, 0.0, 4.0),
  R([2, 3], 0, 3, 2.0, 4.0, 0.0, 2.0, 6.0),
  R([2, 3], 1, 3, 3.0, 4.0, 0.0, 1.0, 5.0),
];
