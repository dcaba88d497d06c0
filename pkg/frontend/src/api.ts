/** Thin typed client over the simulation service HTTP API.
 *
 * The transport is injectable so tests can replay recorded service
 * responses; the client itself performs no simulation or scoring.
 */

export interface HttpResponse {
  status: number;
  body: unknown;
}

export interface Http {
  request(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    params?: Record<string, string | number>,
  ): Promise<HttpResponse>;
}

export interface ServiceError {
  code: string;
  message: string;
}

export interface LogRecord {
  n: number;
  t: number;
  type: string;
  target?: string;
  [field: string]: unknown;
}

export interface LogPage {
  header: Record<string, unknown>;
  records: LogRecord[];
  finished: boolean;
  next: number;
}

export interface RunStart {
  id: string;
  finished: boolean;
  t: number;
  header: Record<string, unknown>;
}

export interface StepResult {
  finished: boolean;
  t: number;
  records: number;
}

export interface CompareEntry {
  id: string;
  score: number;
}

export interface CompareResponse {
  criterion: Record<string, unknown>;
  seed: number;
  model_digest: string;
  ranking: CompareEntry[];
}

/** Raised for non-2xx responses; carries the service's error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

function asError(status: number, body: unknown): ApiError {
  const err = (body ?? {}) as Partial<ServiceError>;
  return new ApiError(status, err.code ?? "Unknown", err.message ?? `HTTP ${status}`);
}

export class ApiClient {
  constructor(private readonly http: Http) {}

  private async call<T>(
    method: "GET" | "POST",
    path: string,
    body?: unknown,
    params?: Record<string, string | number>,
  ): Promise<T> {
    const res = await this.http.request(method, path, body, params);
    if (res.status < 200 || res.status >= 300) throw asError(res.status, res.body);
    return res.body as T;
  }

  health(): Promise<{ status: string }> {
    return this.call("GET", "/health");
  }

  uploadModel(doc: unknown): Promise<{ digest: string }> {
    return this.call("POST", "/models", doc);
  }

  listModels(): Promise<{ models: { digest: string; format: string }[] }> {
    return this.call("GET", "/models");
  }

  getModel(digest: string): Promise<Record<string, unknown>> {
    return this.call("GET", `/models/${digest}`);
  }

  startRun(body: {
    model: unknown;
    scenario: unknown;
    seed?: number;
    mode?: "full" | "paused";
  }): Promise<RunStart> {
    return this.call("POST", "/runs", body);
  }

  step(runId: string): Promise<StepResult> {
    return this.call("POST", `/runs/${runId}/step`);
  }

  control(runId: string, t: number, target: string, symbol: string): Promise<{ ok: boolean }> {
    return this.call("POST", `/runs/${runId}/control`, { t, target, symbol });
  }

  fetchLog(runId: string, from: number): Promise<LogPage> {
    return this.call("GET", `/runs/${runId}/log`, undefined, { from });
  }

  compare(body: {
    model: unknown;
    scenarios: unknown[];
    criterion: Record<string, unknown>;
    seed?: number;
  }): Promise<CompareResponse> {
    return this.call("POST", "/compare", body);
  }
}
