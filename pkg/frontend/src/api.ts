/** Typed REST client for the feedback service. All dashboard data comes
 * through this module; nothing else in the app talks to the network. */

export type FeedbackValue = "true_positive" | "false_positive";

export interface RunSummary {
  run_id: string;
  models: string[];
  nodes: number;
  horizon: { start: string; end: string };
}

export interface AlertRow {
  id: string;
  node_id: string;
  model: string;
  start: string;
  end: string;
  duration_minutes: number;
  label: FeedbackValue | null;
  comment: string | null;
}

export interface SeriesPoint {
  timestamp: string;
  count: number;
}

export interface ForecastPoint {
  start: string;
  value: number;
}

export interface ForecastResponse {
  node_id: string;
  run_id: string;
  model: string;
  mode: string;
  tau_minutes: number;
  values: ForecastPoint[];
}

export interface Page<T> {
  items: T[];
  total: number;
  limit: number;
  offset: number;
}

export interface ModelReport {
  regression: { mse: number | null; rmse: number | null; mae: number | null };
  confusion: { tp: number; fp: number; tn: number; fn: number };
  classification: Record<string, number | null>;
  alerts: Record<string, number>;
  event_detection: { detected: number; total: number; rate: number | null };
  feedback_applied: number;
  skipped_nodes: string[];
}

export interface MetricsReport {
  run_id: string;
  events_in_span: number;
  models: Record<string, ModelReport>;
  notes: string[];
}

export interface FeedbackReceipt {
  alert_id: string;
  label: FeedbackValue;
  comment: string | null;
  submitted_at: string;
}

export interface AlertFilterParams {
  node?: string;
  model?: string;
  from?: string;
  to?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

type QueryParams = Record<string, string | number | undefined>;

function queryString(params: QueryParams): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) {
      search.set(key, String(value));
    }
  }
  const rendered = search.toString();
  return rendered ? `?${rendered}` : "";
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  listRuns(): Promise<{ items: RunSummary[]; total: number }> {
    return this.request("/api/v1/runs");
  }

  listAlerts(
    run: string,
    filter: AlertFilterParams = {},
  ): Promise<Page<AlertRow> & { run_id: string }> {
    return this.request(`/api/v1/alerts${queryString({ run, ...filter })}`);
  }

  getSeries(
    nodeId: string,
    from?: string,
    to?: string,
  ): Promise<Page<SeriesPoint> & { node_id: string }> {
    const path = `/api/v1/nodes/${encodeURIComponent(nodeId)}/series`;
    return this.request(`${path}${queryString({ from, to })}`);
  }

  getForecast(nodeId: string, run: string, model?: string): Promise<ForecastResponse> {
    const path = `/api/v1/nodes/${encodeURIComponent(nodeId)}/forecast`;
    return this.request(`${path}${queryString({ run, model })}`);
  }

  getMetrics(runId: string): Promise<MetricsReport> {
    return this.request(`/api/v1/runs/${encodeURIComponent(runId)}/metrics`);
  }

  postFeedback(
    alertId: string,
    label: FeedbackValue,
    comment?: string,
  ): Promise<FeedbackReceipt> {
    return this.request(`/api/v1/alerts/${encodeURIComponent(alertId)}/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ label, comment: comment ?? null }),
    });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (
      typeof body === "object" &&
      body !== null &&
      typeof (body as { detail?: unknown }).detail === "string"
    ) {
      return (body as { detail: string }).detail;
    }
  } catch {
    // fall through to the status line
  }
  return `${response.status} ${response.statusText}`.trim();
}
