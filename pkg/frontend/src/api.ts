/** Typed client for the recovslice trace-slicing HTTP API.
 *
 * The UI never computes dependencies itself: every answer it shows is
 * the verbatim body of a `POST /api/slice` response.  All methods throw
 * `ApiError` for error envelopes (`{error: {code, message}}`) and
 * `ConnectionError` when the server is unreachable.
 */

export interface TraceMeta {
  step_count: number;
  files: string[];
}

export interface Step {
  step_id: number;
  file: string;
  line: number;
  order: number;
  code: string;
  is_call_site: boolean;
  reads: string[];
  writes: string[];
  callee_source: string | null;
}

export interface StepPage {
  from: number;
  to: number;
  step_count: number;
  steps: Step[];
}

export interface VariableInstance {
  var_id: string;
  name: string;
  type: string;
  content: string;
  location: { kind: string; token: string };
  children: { label: string; var_id: string }[];
}

export interface ProvenanceEvent {
  kind: string;
  [extra: string]: unknown;
}

export interface SliceResult {
  query: { step: number; path: string };
  def_step: number | null;
  case_kind: "case1_direct" | "case2_call_site" | "none";
  provenance: ProvenanceEvent[];
}

export type ObjectGraph = Record<string, unknown>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConnectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConnectionError";
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = globalThis.fetch,
  ) {}

  async traceMeta(): Promise<TraceMeta> {
    return this.request("GET", "/api/trace/meta");
  }

  async steps(from?: number, to?: number): Promise<StepPage> {
    const params = new URLSearchParams();
    if (from !== undefined) params.set("from", String(from));
    if (to !== undefined) params.set("to", String(to));
    const query = params.size ? `?${params}` : "";
    return this.request("GET", `/api/steps${query}`);
  }

  async variable(varId: string): Promise<VariableInstance> {
    return this.request("GET", `/api/var/${encodeURIComponent(varId)}`);
  }

  async slice(
    stepId: number,
    path: string,
    estimator?: string,
  ): Promise<SliceResult> {
    return this.request("POST", "/api/slice", {
      step_id: stepId,
      path,
      ...(estimator ? { estimator } : {}),
    });
  }

  async recover(
    stepId: number,
    path: string,
    estimator?: string,
  ): Promise<ObjectGraph> {
    return this.request("POST", "/api/recover", {
      step_id: stepId,
      path,
      ...(estimator ? { estimator } : {}),
    });
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined
          ? undefined
          : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (cause) {
      throw new ConnectionError(`cannot reach ${this.baseUrl}: ${cause}`);
    }
    const text = await response.text();
    let doc: unknown;
    try {
      doc = JSON.parse(text);
    } catch {
      throw new ApiError(response.status, "bad_response",
        `non-JSON response from ${path}`);
    }
    if (!response.ok) {
      const envelope = doc as { error?: { code?: string; message?: string } };
      throw new ApiError(
        response.status,
        envelope.error?.code ?? "unknown",
        envelope.error?.message ?? text,
      );
    }
    return doc as T;
  }
}

/** Holds at most one request in flight; later calls are dropped, not queued.
 *
 * Slice queries from the UI are debounced through this: a click while the
 * previous answer is pending is ignored rather than raced.
 */
export class SingleFlight {
  private pending = false;

  get inFlight(): boolean {
    return this.pending;
  }

  async run<T>(task: () => Promise<T>): Promise<T | undefined> {
    if (this.pending) return undefined;
    this.pending = true;
    try {
      return await task();
    } finally {
      this.pending = false;
    }
  }
}
