// Thin typed client for the session service. Five endpoints, nothing else.

export interface SpaceJson {
  lower: number[];
  upper: number[];
}

export interface RuleJson {
  kind: string;
  batch_size: number;
  acquisition: string;
  [extra: string]: unknown;
}

export interface CreateRequest {
  space: SpaceJson;
  rule?: { kind: string; batch_size: number; acquisition: string };
  seed?: number;
  n0?: number;
}

export interface CreateResponse {
  id: string;
  tags: string[];
}

export interface AskResponse {
  points: number[][];
  step_index: number;
}

export interface TellResponse {
  step_index: number;
  best_objective: number | null;
}

export interface StateResponse {
  id: string;
  status: "ready" | "awaiting-tell" | "error";
  step_index: number;
  tags: string[];
  space: SpaceJson;
  rule: RuleJson;
  seed: number;
  pending_ask: number[][] | null;
  best_objective: number | null;
  error: string | null;
}

export interface HistoryStep {
  step: number;
  query_points: number[][];
  observations: Record<string, number[]>;
  best_so_far: number;
}

export interface HistoryResponse {
  id: string;
  steps: HistoryStep[];
}

// Server error body is {code, message, field}; keep all three.
export class ApiError extends Error {
  status: number;
  code: string;
  field: string | null;

  constructor(status: number, code: string, message: string, field: string | null) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.field = field;
  }
}

export function joinUrl(base: string, path: string): string {
  return base.replace(/\/+$/, "") + path;
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(joinUrl(base, path), init);
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const err = (body ?? {}) as { code?: string; message?: string; field?: string | null };
    throw new ApiError(
      response.status,
      err.code ?? "http-error",
      err.message ?? `request failed with status ${response.status}`,
      err.field ?? null,
    );
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export function createSession(base: string, body: CreateRequest): Promise<CreateResponse> {
  return request<CreateResponse>(base, "/sessions", post(body));
}

export function fetchAsk(base: string, id: string): Promise<AskResponse> {
  return request<AskResponse>(base, `/sessions/${encodeURIComponent(id)}/ask`);
}

export function submitTell(
  base: string,
  id: string,
  observations: Record<string, number[]>,
): Promise<TellResponse> {
  return request<TellResponse>(
    base,
    `/sessions/${encodeURIComponent(id)}/tell`,
    post({ observations }),
  );
}

export function fetchState(base: string, id: string): Promise<StateResponse> {
  return request<StateResponse>(base, `/sessions/${encodeURIComponent(id)}/state`);
}

export function fetchHistory(base: string, id: string): Promise<HistoryResponse> {
  return request<HistoryResponse>(base, `/sessions/${encodeURIComponent(id)}/history`);
}
