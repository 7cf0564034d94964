import { describe, expect, it } from "vitest";

import { Dashboard } from "../src/app.js";
import type { AlertRow, FetchLike } from "../src/api.js";
import { ApiClient } from "../src/api.js";
import { retryableLabels } from "../src/state.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** In-memory stand-in for the feedback service: one run, two alerts. */
class FakeService {
  alerts: AlertRow[] = [
    row("run-1:lachesis_v1:node-a:20250210T0000", "node-a", "2025-02-10T00:00:00Z"),
    row("run-1:lachesis_v1:node-b:20250210T0500", "node-b", "2025-02-10T05:00:00Z"),
  ];
  labels = new Map<string, string>();
  offline = false;
  vanished = new Set<string>();
  metricsFetches = 0;
  alertFetches = 0;

  fetchImpl: FetchLike = (url, init) => {
    if (this.offline) {
      return Promise.reject(new TypeError("fetch failed"));
    }
    return Promise.resolve(this.route(url, init));
  };

  private route(url: string, init?: RequestInit): Response {
    if (url === "/api/v1/runs") {
      return jsonResponse({
        items: [
          {
            run_id: "run-1",
            models: ["lachesis_v0", "lachesis_v1"],
            nodes: 2,
            horizon: { start: "2025-02-10", end: "2025-02-17" },
          },
        ],
        total: 1,
      });
    }
    if (url.startsWith("/api/v1/alerts?")) {
      this.alertFetches += 1;
      const items = this.alerts
        .filter((a) => !this.vanished.has(a.id))
        .map((a) => ({ ...a, label: (this.labels.get(a.id) ?? a.label) as AlertRow["label"] }));
      return jsonResponse({ items, total: items.length, limit: 500, offset: 0, run_id: "run-1" });
    }
    if (url.includes("/feedback")) {
      const alertId = decodeURIComponent(url.split("/alerts/")[1]!.split("/feedback")[0]!);
      if (this.vanished.has(alertId) || !this.alerts.some((a) => a.id === alertId)) {
        return jsonResponse({ detail: `no alert '${alertId}'` }, 404);
      }
      const body = JSON.parse(init!.body as string) as { label: string; comment: string | null };
      this.labels.set(alertId, body.label);
      return jsonResponse({
        alert_id: alertId,
        label: body.label,
        comment: body.comment,
        submitted_at: "2025-02-11T00:00:00.000000Z",
      });
    }
    if (url.includes("/metrics")) {
      this.metricsFetches += 1;
      return jsonResponse({
        run_id: "run-1",
        events_in_span: 2,
        models: {},
        notes: [],
      });
    }
    if (url.includes("/series")) {
      return jsonResponse({
        items: [{ timestamp: "2025-02-10T00:00:00Z", count: 4 }],
        total: 1,
        limit: 500,
        offset: 0,
        node_id: "node-a",
      });
    }
    if (url.includes("/forecast")) {
      return jsonResponse({
        node_id: "node-a",
        run_id: "run-1",
        model: "lachesis_v1",
        mode: "upper_bound",
        tau_minutes: 60,
        values: [{ start: "2025-02-10T00:00:00Z", value: 9 }],
      });
    }
    return jsonResponse({ detail: `unexpected ${url}` }, 404);
  }
}

function row(id: string, node: string, start: string): AlertRow {
  return {
    id,
    node_id: node,
    model: "lachesis_v1",
    start,
    end: start.replace("T00:", "T01:").replace("T05:", "T06:"),
    duration_minutes: 60,
    label: null,
    comment: null,
  };
}

async function startedDashboard() {
  const service = new FakeService();
  const app = new Dashboard(new ApiClient("", service.fetchImpl));
  await app.start();
  return { service, app };
}

describe("startup", () => {
  it("loads the run, its alert queue, and metrics", async () => {
    const { app } = await startedDashboard();
    expect(app.runId).toBe("run-1");
    expect(app.state.alerts).toHaveLength(2);
    expect(app.metrics).not.toBeNull();
  });
});

describe("label round trip", () => {
  it("commits a confirmed label and re-fetches metrics", async () => {
    const { service, app } = await startedDashboard();
    const fetchesBefore = service.metricsFetches;
    const id = app.state.alerts[0]!.id;

    await app.submitLabel(id, "false_positive");

    expect(service.labels.get(id)).toBe("false_positive");
    expect(app.state.alerts[0]!.label).toBe("false_positive");
    expect(app.state.pending).toEqual({});
    expect(service.metricsFetches).toBe(fetchesBefore + 1);
  });

  it("rolls back and refetches when the server 404s a stale alert", async () => {
    const { service, app } = await startedDashboard();
    const id = app.state.alerts[1]!.id;
    service.vanished.add(id);

    await app.submitLabel(id, "true_positive");

    expect(app.state.notice).toContain("no longer exists");
    expect(app.state.pending).toEqual({});
    expect(service.labels.has(id)).toBe(false);
    expect(app.state.alerts.map((a) => a.id)).not.toContain(id);
  });

  it("keeps an unsent label across an outage and retries it without loss", async () => {
    const { service, app } = await startedDashboard();
    const id = app.state.alerts[0]!.id;

    service.offline = true;
    await app.submitLabel(id, "true_positive");

    expect(app.state.alerts[0]!.label).toBe("true_positive");
    expect(retryableLabels(app.state)).toHaveLength(1);
    expect(app.state.notice).toContain("retry");
    expect(service.labels.has(id)).toBe(false);

    service.offline = false;
    await app.retryPending();

    expect(service.labels.get(id)).toBe("true_positive");
    expect(app.state.alerts[0]!.label).toBe("true_positive");
    expect(app.state.pending).toEqual({});
  });

  it("poll failures surface a notice without dropping data", async () => {
    const { service, app } = await startedDashboard();
    service.offline = true;
    await app.poll();
    expect(app.state.notice).toContain("unreachable");
    expect(app.state.alerts).toHaveLength(2);
  });
});

describe("alert detail", () => {
  it("builds a timeline covering the alert span", async () => {
    const { app } = await startedDashboard();
    const id = app.state.alerts[0]!.id;
    await app.openAlert(id);
    expect(app.state.selectedId).toBe(id);
    expect(app.timelineSvg).toContain('class="actual"');
    expect(app.timelineSvg).toContain('class="alert-span"');
  });
});
