/** Dashboard controller and DOM shell.
 *
 * The controller owns all data flow and is DOM-free so tests can drive a
 * full label round-trip against a fake API. mount() wires it to the page:
 * event delegation for clicks, a 10 s poll for metric refresh.
 */

import type { FeedbackValue, MetricsReport, RunSummary } from "./api.js";
import { ApiClient, ApiError } from "./api.js";
import { renderAlertDetail, renderMetricsPanel, renderNotice, renderQueue, renderRunPicker } from "./render.js";
import type { QueueFilter, QueueState } from "./state.js";
import {
  beginLabel,
  commitLabel,
  findAlert,
  initialState,
  markRetry,
  retryableLabels,
  rollbackLabel,
  selectAlert,
  setAlerts,
  setFilter,
} from "./state.js";
import {
  buildTimelineSvg,
  forecastToPoints,
  seriesToBucketPoints,
  timelineWindow,
} from "./timeline.js";

export const POLL_INTERVAL_MS = 10_000;

export class Dashboard {
  state: QueueState = initialState();
  runs: RunSummary[] = [];
  runId: string | null = null;
  metrics: MetricsReport | null = null;
  timelineSvg: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly render: () => void = () => {},
  ) {}

  async start(): Promise<void> {
    const runs = await this.api.listRuns();
    this.runs = runs.items;
    if (this.runs.length > 0) {
      await this.selectRun(this.runs[this.runs.length - 1]!.run_id);
    } else {
      this.render();
    }
  }

  async selectRun(runId: string): Promise<void> {
    this.runId = runId;
    this.state = initialState();
    this.metrics = null;
    this.timelineSvg = null;
    await this.refreshAlerts();
    await this.refreshMetrics();
  }

  async refreshAlerts(): Promise<void> {
    if (this.runId === null) {
      return;
    }
    const page = await this.api.listAlerts(this.runId);
    this.state = setAlerts(this.state, page.items);
    this.render();
  }

  async refreshMetrics(): Promise<void> {
    if (this.runId === null) {
      return;
    }
    this.metrics = await this.api.getMetrics(this.runId);
    this.render();
  }

  async poll(): Promise<void> {
    try {
      await this.refreshAlerts();
      await this.refreshMetrics();
    } catch {
      this.state = { ...this.state, notice: "Service unreachable; showing last data." };
      this.render();
    }
  }

  applyFilter(patch: Partial<QueueFilter>): void {
    this.state = setFilter(this.state, patch);
    this.render();
  }

  /** Optimistically label, then reconcile with the server's verdict:
   * confirmed -> commit and refresh metrics; 404 (alert gone) -> roll the
   * row back and refetch the queue; network error -> keep the label queued
   * for retry so nothing is lost. */
  async submitLabel(alertId: string, label: FeedbackValue): Promise<void> {
    if (findAlert(this.state, alertId) === undefined) {
      return;
    }
    this.state = beginLabel(this.state, alertId, label);
    this.render();
    try {
      const receipt = await this.api.postFeedback(alertId, label);
      this.state = commitLabel(this.state, alertId, receipt.label, receipt.comment);
      this.render();
      await this.refreshMetrics();
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        this.state = rollbackLabel(
          this.state,
          alertId,
          `Alert ${alertId} no longer exists on the server; label rolled back.`,
        );
        this.render();
        await this.refreshAlerts();
      } else {
        this.state = markRetry(
          this.state,
          alertId,
          "Service unreachable; label kept and queued for retry.",
        );
        this.render();
      }
    }
  }

  async retryPending(): Promise<void> {
    for (const entry of retryableLabels(this.state)) {
      await this.submitLabel(entry.alertId, entry.label);
    }
  }

  async openAlert(alertId: string): Promise<void> {
    const row = findAlert(this.state, alertId);
    if (row === undefined || this.runId === null) {
      return;
    }
    this.state = selectAlert(this.state, alertId);
    this.timelineSvg = null;
    this.render();
    const window = timelineWindow(row.start, row.end);
    try {
      const [series, forecast] = await Promise.all([
        this.api.getSeries(row.node_id, window.from.toISOString(), window.to.toISOString()),
        this.api.getForecast(row.node_id, this.runId, row.model),
      ]);
      this.timelineSvg = buildTimelineSvg(
        seriesToBucketPoints(series.items, forecast.tau_minutes),
        forecastToPoints(forecast.values),
        window,
        row.start,
        row.end,
      );
    } catch {
      this.state = { ...this.state, notice: "Could not load the alert timeline." };
    }
    this.render();
  }
}

function element(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing #${id}`);
  }
  return found;
}

export function mount(): void {
  const queueEl = element("queue");
  const detailEl = element("detail");
  const metricsEl = element("metrics");
  const noticeEl = element("notice");
  const runsEl = element("runs");

  const app = new Dashboard(new ApiClient(), () => {
    runsEl.innerHTML = renderRunPicker(app.runs, app.runId);
    noticeEl.innerHTML = renderNotice(app.state);
    queueEl.innerHTML = renderQueue(app.state);
    detailEl.innerHTML = renderAlertDetail(
      app.state.selectedId === null ? undefined : findAlert(app.state, app.state.selectedId),
      app.state,
      app.timelineSvg,
    );
    metricsEl.innerHTML = renderMetricsPanel(app.metrics);
  });

  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (target === null) {
      return;
    }
    const labelButton = target.closest<HTMLElement>("[data-label]");
    if (labelButton !== null) {
      void app.submitLabel(
        labelButton.dataset["alertId"] ?? "",
        labelButton.dataset["label"] as FeedbackValue,
      );
      return;
    }
    if (target.closest("[data-retry]") !== null) {
      void app.retryPending();
      return;
    }
    const row = target.closest<HTMLElement>("[data-alert-row]");
    if (row !== null) {
      void app.openAlert(row.dataset["alertRow"] ?? "");
    }
  });

  document.addEventListener("change", (event) => {
    const target = event.target as HTMLElement | null;
    if (target === null) {
      return;
    }
    if (target.matches("[data-run-picker]")) {
      void app.selectRun((target as HTMLSelectElement).value);
      return;
    }
    if (target.matches("[data-filter]")) {
      const input = target as HTMLInputElement;
      const field = input.dataset["filter"] as keyof QueueFilter;
      app.applyFilter({ [field]: input.value === "" ? null : input.value });
    }
  });

  void app.start().then(() => {
    setInterval(() => void app.poll(), POLL_INTERVAL_MS);
  });
}

if (typeof document !== "undefined" && document.getElementById("queue") !== null) {
  mount();
}
