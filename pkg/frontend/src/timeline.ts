/** Actual-vs-threshold timeline geometry for the alert detail view.
 *
 * The rendered window is the 48 hours surrounding the alert, widened when
 * the alert itself is longer, so the full alert span is always on screen.
 * Output is an SVG string; no canvas, no DOM dependency.
 */

import type { ForecastPoint, SeriesPoint } from "./api.js";

export const WINDOW_MS = 48 * 3600 * 1000;

export interface TimelineWindow {
  from: Date;
  to: Date;
}

export interface TimelinePoint {
  t: number;
  value: number;
}

export function timelineWindow(alertStartIso: string, alertEndIso: string): TimelineWindow {
  const start = Date.parse(alertStartIso);
  const end = Date.parse(alertEndIso);
  const pad = Math.max(0, (WINDOW_MS - (end - start)) / 2);
  return { from: new Date(start - pad), to: new Date(end + pad) };
}

/** Sum minute records into the same bucket grid the thresholds use. */
export function seriesToBucketPoints(
  records: SeriesPoint[],
  tauMinutes: number,
): TimelinePoint[] {
  const bucketMs = tauMinutes * 60 * 1000;
  const totals = new Map<number, number>();
  for (const record of records) {
    const t = Math.floor(Date.parse(record.timestamp) / bucketMs) * bucketMs;
    totals.set(t, (totals.get(t) ?? 0) + record.count);
  }
  return [...totals.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([t, value]) => ({ t, value }));
}

export function forecastToPoints(values: ForecastPoint[]): TimelinePoint[] {
  return values.map((point) => ({ t: Date.parse(point.start), value: point.value }));
}

const VIEW_WIDTH = 800;
const VIEW_HEIGHT = 220;
const MARGIN = 34;

export function buildTimelineSvg(
  actual: TimelinePoint[],
  threshold: TimelinePoint[],
  window: TimelineWindow,
  alertStartIso: string,
  alertEndIso: string,
): string {
  const t0 = window.from.getTime();
  const t1 = window.to.getTime();
  const span = Math.max(t1 - t0, 1);
  const inWindow = (p: TimelinePoint) => p.t >= t0 && p.t <= t1;
  const shown = [...actual.filter(inWindow), ...threshold.filter(inWindow)];
  const peak = Math.max(1, ...shown.map((p) => p.value));

  const x = (t: number) => MARGIN + ((t - t0) / span) * (VIEW_WIDTH - 2 * MARGIN);
  const y = (v: number) => VIEW_HEIGHT - MARGIN - (v / peak) * (VIEW_HEIGHT - 2 * MARGIN);
  const polyline = (points: TimelinePoint[]) =>
    points
      .filter(inWindow)
      .map((p) => `${x(p.t).toFixed(1)},${y(p.value).toFixed(1)}`)
      .join(" ");

  const alertX0 = x(Math.max(Date.parse(alertStartIso), t0));
  const alertX1 = x(Math.min(Date.parse(alertEndIso), t1));
  const parts = [
    `<svg class="timeline" viewBox="0 0 ${VIEW_WIDTH} ${VIEW_HEIGHT}" role="img" ` +
      `aria-label="actual versus threshold">`,
    `<rect class="alert-span" x="${alertX0.toFixed(1)}" y="${MARGIN}" ` +
      `width="${Math.max(alertX1 - alertX0, 1).toFixed(1)}" ` +
      `height="${VIEW_HEIGHT - 2 * MARGIN}"></rect>`,
    `<polyline class="threshold" fill="none" points="${polyline(threshold)}"></polyline>`,
    `<polyline class="actual" fill="none" points="${polyline(actual)}"></polyline>`,
    `<text class="axis" x="${MARGIN}" y="${VIEW_HEIGHT - 10}">peak ${peak.toFixed(1)}</text>`,
    `</svg>`,
  ];
  return parts.join("");
}
