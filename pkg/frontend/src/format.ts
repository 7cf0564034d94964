/** Display formatting. Undefined metrics render as an em dash, never 0:
 * a dash means "no denominator", 0 means a measured zero. */

export const UNDEFINED_MARK = "—";

export function formatMetric(value: number | null | undefined, digits = 3): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return UNDEFINED_MARK;
  }
  return value.toFixed(digits);
}

export function formatPercent(value: number | null | undefined, digits = 1): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return UNDEFINED_MARK;
  }
  return `${(100 * value).toFixed(digits)}%`;
}

export function formatCount(value: number | null | undefined): string {
  if (value === null || value === undefined || Number.isNaN(value)) {
    return UNDEFINED_MARK;
  }
  return String(value);
}

/** "2025-02-10T00:00:00Z" -> "2025-02-10 00:00" */
export function formatTimestamp(iso: string): string {
  return iso.slice(0, 16).replace("T", " ");
}

export function formatDuration(minutes: number): string {
  if (minutes < 60) {
    return `${minutes}m`;
  }
  const hours = Math.floor(minutes / 60);
  const rest = minutes % 60;
  return rest === 0 ? `${hours}h` : `${hours}h ${rest}m`;
}

const HTML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => HTML_ESCAPES[ch] as string);
}
