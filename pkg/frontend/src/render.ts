/** Render-to-string views. Every number shown comes from a service
 * response; this module only formats, it never computes metrics. */

import type { AlertRow, MetricsReport, RunSummary } from "./api.js";
import {
  escapeHtml,
  formatCount,
  formatDuration,
  formatMetric,
  formatPercent,
  formatTimestamp,
} from "./format.js";
import type { QueueState } from "./state.js";
import { retryableLabels, visibleAlerts } from "./state.js";

export function renderRunPicker(runs: RunSummary[], selected: string | null): string {
  if (runs.length === 0) {
    return `<span class="muted">no runs stored</span>`;
  }
  const options = runs
    .map((run) => {
      const id = escapeHtml(run.run_id);
      const chosen = run.run_id === selected ? " selected" : "";
      return `<option value="${id}"${chosen}>${id} (${run.nodes} nodes)</option>`;
    })
    .join("");
  return `<label>Run <select data-run-picker>${options}</select></label>`;
}

function labelBadge(row: AlertRow, state: QueueState): string {
  const pending = state.pending[row.id];
  const text =
    row.label === null ? "unlabeled" : row.label === "true_positive" ? "TP" : "FP";
  const kind = row.label === null ? "none" : row.label;
  const suffix =
    pending === undefined ? "" : pending.status === "inflight" ? " saving" : " retry";
  return `<span class="badge badge-${kind}">${text}${suffix}</span>`;
}

function labelButtons(row: AlertRow): string {
  const id = escapeHtml(row.id);
  return (
    `<button data-label="true_positive" data-alert-id="${id}">TP</button>` +
    `<button data-label="false_positive" data-alert-id="${id}">FP</button>`
  );
}

export function renderQueue(state: QueueState): string {
  const rows = visibleAlerts(state);
  if (rows.length === 0) {
    return `<p class="empty">No alerts match the current filters.</p>`;
  }
  const body = rows
    .map((row) => {
      const id = escapeHtml(row.id);
      const selected = row.id === state.selectedId ? ` class="selected"` : "";
      return (
        `<tr data-alert-row="${id}"${selected}>` +
        `<td>${formatTimestamp(row.start)}</td>` +
        `<td>${escapeHtml(row.node_id)}</td>` +
        `<td>${escapeHtml(row.model)}</td>` +
        `<td>${formatDuration(row.duration_minutes)}</td>` +
        `<td>${labelBadge(row, state)}</td>` +
        `<td>${labelButtons(row)}</td>` +
        `</tr>`
      );
    })
    .join("");
  return (
    `<table class="queue"><thead><tr>` +
    `<th>start</th><th>node</th><th>model</th><th>duration</th>` +
    `<th>label</th><th>actions</th>` +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderNotice(state: QueueState): string {
  const retries = retryableLabels(state);
  if (state.notice === null && retries.length === 0) {
    return "";
  }
  const message = state.notice === null ? "" : escapeHtml(state.notice);
  const retryButton =
    retries.length === 0
      ? ""
      : ` <button data-retry>Retry ${retries.length} pending label` +
        `${retries.length === 1 ? "" : "s"}</button>`;
  return `<div class="notice" role="alert">${message}${retryButton}</div>`;
}

export function renderAlertDetail(
  row: AlertRow | undefined,
  state: QueueState,
  timelineSvg: string | null,
): string {
  if (row === undefined) {
    return `<p class="empty">Select an alert to inspect its timeline.</p>`;
  }
  const comment =
    row.comment === null || row.comment === ""
      ? ""
      : `<p class="comment">${escapeHtml(row.comment)}</p>`;
  return (
    `<h2>${escapeHtml(row.node_id)}</h2>` +
    `<p class="span">${formatTimestamp(row.start)} to ${formatTimestamp(row.end)} ` +
    `(${formatDuration(row.duration_minutes)}, ${escapeHtml(row.model)})</p>` +
    `<p>${labelBadge(row, state)} ${labelButtons(row)}</p>` +
    comment +
    (timelineSvg === null ? `<p class="muted">loading timeline</p>` : timelineSvg)
  );
}

const METRIC_ROWS: ReadonlyArray<[string, "regression" | "classification", string]> = [
  ["MSE", "regression", "mse"],
  ["RMSE", "regression", "rmse"],
  ["MAE", "regression", "mae"],
  ["Accuracy", "classification", "accuracy"],
  ["Precision", "classification", "precision"],
  ["Recall", "classification", "recall"],
  ["Specificity", "classification", "specificity"],
  ["Balanced accuracy", "classification", "balanced_accuracy"],
];

export function renderMetricsPanel(report: MetricsReport | null): string {
  if (report === null) {
    return `<p class="empty">Metrics not loaded yet.</p>`;
  }
  const models = Object.keys(report.models);
  const header = models.map((m) => `<th>${escapeHtml(m)}</th>`).join("");
  const rows = METRIC_ROWS.map(([title, section, key]) => {
    const cells = models
      .map((m) => {
        const model = report.models[m];
        if (model === undefined) {
          return `<td>${formatMetric(null)}</td>`;
        }
        const value = section === "regression" ? model.regression[key as "mse"] : model.classification[key];
        return `<td>${formatMetric(value ?? null)}</td>`;
      })
      .join("");
    return `<tr><td>${title}</td>${cells}</tr>`;
  });
  const confusion = models
    .map((m) => {
      const c = report.models[m]?.confusion;
      return c === undefined
        ? `<td>${formatMetric(null)}</td>`
        : `<td>${c.tp}/${c.fp}/${c.tn}/${c.fn}</td>`;
    })
    .join("");
  rows.push(`<tr><td>TP/FP/TN/FN</td>${confusion}</tr>`);
  const detection = models
    .map((m) => {
      const d = report.models[m]?.event_detection;
      return d === undefined
        ? `<td>${formatPercent(null)}</td>`
        : `<td>${formatPercent(d.rate)} (${d.detected}/${d.total})</td>`;
    })
    .join("");
  rows.push(`<tr><td>Event detection</td>${detection}</tr>`);
  const feedback = models
    .map((m) => `<td>${formatCount(report.models[m]?.feedback_applied ?? null)}</td>`)
    .join("");
  rows.push(`<tr><td>Feedback labels applied</td>${feedback}</tr>`);
  return (
    `<table class="metrics"><thead><tr><th>metric</th>${header}</tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>` +
    `<p class="muted">${report.events_in_span} ground-truth events in span</p>`
  );
}
