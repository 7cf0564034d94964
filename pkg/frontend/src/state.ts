/** Queue state and the optimistic-labeling lifecycle.
 *
 * A label submission moves through: beginLabel (optimistic, remembers the
 * previous value) -> commitLabel (server confirmed) or rollbackLabel
 * (server rejected: restore previous, post a notice) or markRetry (network
 * failure: keep the optimistic value and the pending record so nothing the
 * operator typed is lost, surface a retry).
 *
 * All transitions are pure: they take a state and return a new one.
 */

import type { AlertRow, FeedbackValue } from "./api.js";

export type LabelStateFilter = "all" | "unlabeled" | "labeled";

export interface QueueFilter {
  node: string | null;
  labelState: LabelStateFilter;
  from: string | null;
  to: string | null;
}

export type PendingStatus = "inflight" | "retry";

export interface PendingLabel {
  alertId: string;
  label: FeedbackValue;
  comment: string | null;
  previousLabel: FeedbackValue | null;
  previousComment: string | null;
  status: PendingStatus;
}

export interface QueueState {
  alerts: AlertRow[];
  filter: QueueFilter;
  selectedId: string | null;
  pending: Record<string, PendingLabel>;
  notice: string | null;
}

export function initialState(): QueueState {
  return {
    alerts: [],
    filter: { node: null, labelState: "all", from: null, to: null },
    selectedId: null,
    pending: {},
    notice: null,
  };
}

/** Replace the alert list with a fresh server page.
 *
 * Rows with an in-flight label keep their optimistic value so a poll
 * arriving mid-submission cannot clobber it; pending entries whose alert
 * vanished server-side are dropped (the submission path reports those
 * through its own 404 rollback).
 */
export function setAlerts(state: QueueState, rows: AlertRow[]): QueueState {
  const alerts = rows.map((row) => {
    const pending = state.pending[row.id];
    return pending ? { ...row, label: pending.label, comment: pending.comment } : row;
  });
  const present = new Set(rows.map((row) => row.id));
  const pending: Record<string, PendingLabel> = {};
  for (const [id, entry] of Object.entries(state.pending)) {
    if (present.has(id)) {
      pending[id] = entry;
    }
  }
  return {
    ...state,
    alerts,
    pending,
    selectedId: state.selectedId !== null && present.has(state.selectedId) ? state.selectedId : null,
  };
}

export function setFilter(state: QueueState, patch: Partial<QueueFilter>): QueueState {
  return { ...state, filter: { ...state.filter, ...patch } };
}

export function selectAlert(state: QueueState, alertId: string | null): QueueState {
  return { ...state, selectedId: alertId };
}

export function clearNotice(state: QueueState): QueueState {
  return { ...state, notice: null };
}

/** Rows passing the node / time / label-state filters, in listing order. */
export function visibleAlerts(state: QueueState): AlertRow[] {
  const { node, labelState, from, to } = state.filter;
  return state.alerts.filter((row) => {
    if (node !== null && node !== "" && row.node_id !== node) {
      return false;
    }
    if (labelState === "unlabeled" && row.label !== null) {
      return false;
    }
    if (labelState === "labeled" && row.label === null) {
      return false;
    }
    if (from !== null && from !== "" && row.end <= from) {
      return false;
    }
    if (to !== null && to !== "" && row.start > to) {
      return false;
    }
    return true;
  });
}

export function findAlert(state: QueueState, alertId: string): AlertRow | undefined {
  return state.alerts.find((row) => row.id === alertId);
}

/** Optimistically apply a label and remember what it replaced.
 *
 * Relabeling while a submission is already pending keeps the original
 * pre-submission value as the rollback target, not the intermediate one.
 */
export function beginLabel(
  state: QueueState,
  alertId: string,
  label: FeedbackValue,
  comment: string | null = null,
): QueueState {
  const row = findAlert(state, alertId);
  if (row === undefined) {
    return state;
  }
  const existing = state.pending[alertId];
  const entry: PendingLabel = {
    alertId,
    label,
    comment,
    previousLabel: existing ? existing.previousLabel : row.label,
    previousComment: existing ? existing.previousComment : row.comment,
    status: "inflight",
  };
  return {
    ...state,
    alerts: state.alerts.map((r) => (r.id === alertId ? { ...r, label, comment } : r)),
    pending: { ...state.pending, [alertId]: entry },
    notice: null,
  };
}

/** Server accepted the label: drop the pending record, keep the server copy. */
export function commitLabel(
  state: QueueState,
  alertId: string,
  label: FeedbackValue,
  comment: string | null,
): QueueState {
  const pending = { ...state.pending };
  delete pending[alertId];
  return {
    ...state,
    alerts: state.alerts.map((r) => (r.id === alertId ? { ...r, label, comment } : r)),
    pending,
  };
}

/** Server rejected the label: restore the pre-submission value and say so. */
export function rollbackLabel(state: QueueState, alertId: string, reason: string): QueueState {
  const entry = state.pending[alertId];
  const pending = { ...state.pending };
  delete pending[alertId];
  return {
    ...state,
    alerts: state.alerts.map((r) =>
      r.id === alertId && entry !== undefined
        ? { ...r, label: entry.previousLabel, comment: entry.previousComment }
        : r,
    ),
    pending,
    notice: reason,
  };
}

/** Network failure: keep the optimistic label, flag the entry for retry. */
export function markRetry(state: QueueState, alertId: string, reason: string): QueueState {
  const entry = state.pending[alertId];
  if (entry === undefined) {
    return { ...state, notice: reason };
  }
  return {
    ...state,
    pending: { ...state.pending, [alertId]: { ...entry, status: "retry" } },
    notice: reason,
  };
}

export function retryableLabels(state: QueueState): PendingLabel[] {
  return Object.values(state.pending).filter((entry) => entry.status === "retry");
}
