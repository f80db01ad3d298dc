/** Typed client for the planning service. Every number shown in the UI
 * originates from these responses; the client never does cost math. */

export interface InstanceSummary {
  id: string;
  n: number;
  metric: "euclidean" | "haversine";
  budgets: Record<string, number>;
  instance: InstanceDoc;
}

export interface InstanceDoc {
  metric: "euclidean" | "haversine";
  nodes: { id: number; x: number; y: number }[];
  demands: Record<string, number[]>;
  budgets: Record<string, number>;
}

export interface SolveRequest {
  instance?: string;
  inline?: InstanceDoc;
  budgets?: Record<string, number>;
  method?: string;
  steps?: number;
  pinned?: Record<string, number[]>;
  seed?: number;
}

export interface StepRecord {
  insert: number;
  remove: number;
  delta: number;
  type?: string;
}

export interface SolutionPayload {
  type_placements: Record<string, number[]>;
  access_cost: number;
  per_type_access_cost?: Record<string, number>;
  steps: StepRecord[];
  wall_time_ms: number;
}

export interface SolutionEnvelope {
  job_id: string;
  status: string;
  solution: SolutionPayload;
}

export interface WhatIfResponse {
  gain: number;
  loss: number;
  extra: number;
  delta: number;
  new_total_ac: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  field?: string;
}

export class ServiceError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class NotReadyError extends ServiceError {}

async function parseError(res: Response): Promise<never> {
  let body: ApiErrorBody = { code: "unknown", message: `HTTP ${res.status}` };
  try {
    body = (await res.json()) as ApiErrorBody;
  } catch {
    /* non-JSON error payload: keep the fallback */
  }
  if (res.status === 425) throw new NotReadyError(res.status, body);
  throw new ServiceError(res.status, body);
}

export class PlannerApi {
  constructor(
    private baseUrl: string = "",
    private fetcher: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetcher(`${this.baseUrl}${path}`);
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetcher(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await parseError(res);
    return (await res.json()) as T;
  }

  listInstances(): Promise<InstanceSummary[]> {
    return this.get<InstanceSummary[]>("/instances");
  }

  async submitSolve(req: SolveRequest): Promise<string> {
    const out = await this.post<{ job_id: string }>("/solve", req);
    return out.job_id;
  }

  fetchSolution(jobId: string): Promise<SolutionEnvelope> {
    return this.get<SolutionEnvelope>(`/solutions/${jobId}`);
  }

  /** Poll until the job leaves the queue; NotReady responses are retried. */
  async awaitSolution(
    jobId: string,
    { intervalMs = 150, timeoutMs = 60_000 } = {},
  ): Promise<SolutionEnvelope> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      try {
        return await this.fetchSolution(jobId);
      } catch (err) {
        if (!(err instanceof NotReadyError) || Date.now() > deadline) throw err;
      }
      await new Promise((r) => setTimeout(r, intervalMs));
    }
  }

  whatIf(
    solutionId: string,
    type: string,
    insert: number,
    remove: number,
  ): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>("/whatif", {
      solution: solutionId,
      type,
      insert,
      remove,
    });
  }
}
