/** What-if panel model: fetches the exact swap decomposition from the
 * service and renders the numbers verbatim at six decimals. The client
 * performs no cost arithmetic of its own. */

import { PlannerApi, ServiceError, type WhatIfResponse } from "./api.js";
import type { SwapPick } from "./state.js";

export interface WhatIfView {
  gain: string;
  loss: string;
  extra: string;
  delta: string;
  newTotal: string;
  improving: boolean;
  commitEnabled: boolean;
  error: string | null;
}

export function formatAmount(value: number): string {
  return value.toFixed(6);
}

export function renderWhatIf(response: WhatIfResponse): WhatIfView {
  return {
    gain: formatAmount(response.gain),
    loss: formatAmount(response.loss),
    extra: formatAmount(response.extra),
    delta: formatAmount(response.delta),
    newTotal: formatAmount(response.new_total_ac),
    improving: response.delta < 0,
    commitEnabled: true,
    error: null,
  };
}

export function renderWhatIfError(err: unknown): WhatIfView {
  const message =
    err instanceof ServiceError
      ? `${err.body.message}`
      : err instanceof Error
        ? err.message
        : String(err);
  return {
    gain: "-",
    loss: "-",
    extra: "-",
    delta: "-",
    newTotal: "-",
    improving: false,
    commitEnabled: false,
    error: message,
  };
}

export async function evaluateSwap(
  api: PlannerApi,
  solutionId: string,
  pick: SwapPick,
): Promise<WhatIfView> {
  try {
    const res = await api.whatIf(solutionId, pick.type, pick.insert, pick.remove);
    return renderWhatIf(res);
  } catch (err) {
    return renderWhatIfError(err);
  }
}
