"""Alert generation, ground-truth matching, and the evaluation metric suite.

A bucket alerts when its actual total exceeds the threshold value;
consecutive alerted buckets merge into one alert. Confusion counting is
cell-based: every (node, bucket) pair is classified independently, with a
ground-truth event counting for any bucket whose start lies within an
inclusive +/-60 minute window of it.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import InvalidParams
from .model import BucketedSeries, Forecast, GroundTruthEvent, bucket_start

MATCH_WINDOW_MINUTES = 60


@dataclass(frozen=True)
class Alert:
    """A maximal run of over-threshold buckets on one node."""

    id: str
    node_id: str
    start: datetime
    end: datetime

    def __post_init__(self):
        if self.end <= self.start:
            raise InvalidParams("alert end must be after start")

    @property
    def duration_minutes(self) -> int:
        return int((self.end - self.start).total_seconds() // 60)

    def overlaps_day(self, day: date) -> bool:
        day_start = bucket_start(day, 0)
        return self.start < day_start + timedelta(days=1) and self.end > day_start


@dataclass(frozen=True)
class ConfusionCounts:
    """Cell-level confusion totals over all evaluated (node, bucket) pairs."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RegressionMetrics:
    mse: float
    rmse: float
    mae: float


@dataclass(frozen=True)
class AlertStats:
    """Fleet-level alerting aggregates over an evaluation span."""

    total_alerts: int
    avg_daily_alerts: float
    avg_daily_alerted_nodes: float
    avg_duration_minutes: float
    std_duration_minutes: float
    avg_alerts_per_hour: float
    std_alerts_per_hour: float


def generate_alerts(
    actual: BucketedSeries | dict[tuple[date, int], float],
    threshold: Forecast,
    id_prefix: str = "",
) -> list[Alert]:
    """Alerts for every maximal run of buckets whose total exceeds the threshold.

    The actual totals and the threshold must cover the same bucket grid.
    Alert ids are deterministic: prefix + node + start instant.
    """
    totals = actual.totals() if isinstance(actual, BucketedSeries) else actual
    if set(totals) != set(threshold.values):
        raise InvalidParams("actual and threshold bucket grids differ")

    node = threshold.node_id
    width = timedelta(minutes=threshold.tau_minutes)
    alerts: list[Alert] = []
    run_start: datetime | None = None
    run_end: datetime | None = None

    def close_run():
        if run_start is not None:
            alert_id = f"{id_prefix}{node}:{run_start.strftime('%Y%m%dT%H%M')}"
            alerts.append(Alert(alert_id, node, run_start, run_end))

    for key in sorted(totals):
        start = bucket_start(*key)
        if totals[key] > threshold.values[key]:
            if run_end == start:
                run_end = start + width
            else:
                close_run()
                run_start, run_end = start, start + width
        else:
            close_run()
            run_start = run_end = None
    close_run()
    return alerts


def match_confusion(
    alerts: list[Alert],
    events: list[GroundTruthEvent],
    grid: dict[str, list[tuple[date, int]]],
    window_minutes: int = MATCH_WINDOW_MINUTES,
) -> ConfusionCounts:
    """Classify every (node, bucket) cell against alerts and ground truth.

    A cell is positive when an alert covers the bucket's start instant and
    an event for the node lies within the inclusive +/-window of it. Events
    may justify any number of cells; there is no one-to-one consumption.
    """
    spans: dict[str, list[tuple[datetime, datetime]]] = {}
    for alert in alerts:
        spans.setdefault(alert.node_id, []).append((alert.start, alert.end))
    for node_spans in spans.values():
        node_spans.sort()

    event_times: dict[str, list[datetime]] = {}
    for event in events:
        event_times.setdefault(event.node_id, []).append(event.timestamp)
    for times in event_times.values():
        times.sort()

    window = timedelta(minutes=window_minutes)
    tp = fp = tn = fn = 0
    for node, keys in grid.items():
        node_spans = spans.get(node, [])
        span_starts = [s for s, _ in node_spans]
        times = event_times.get(node, [])
        for key in keys:
            start = bucket_start(*key)
            i = bisect_right(span_starts, start) - 1
            alerted = i >= 0 and start < node_spans[i][1]
            hit = bool(times) and bisect_right(times, start + window) > bisect_left(
                times, start - window
            )
            if alerted and hit:
                tp += 1
            elif alerted:
                fp += 1
            elif hit:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def regression_metrics(pred, actual) -> RegressionMetrics:
    """MSE, RMSE, and MAE between equal-length vectors."""
    p = np.asarray(pred, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if p.size == 0 or p.size != a.size:
        raise InvalidParams(
            f"prediction and actual lengths must match and be >= 1, "
            f"got {p.size} and {a.size}"
        )
    err = p - a
    mse = float(np.mean(err**2))
    return RegressionMetrics(mse, float(np.sqrt(mse)), float(np.mean(np.abs(err))))


def classification_metrics(c: ConfusionCounts) -> dict[str, float | None]:
    """Accuracy, precision, recall, specificity, balanced accuracy.

    A metric whose denominator is zero is reported as None rather than 0
    so downstream consumers can render it as undefined.
    """

    def ratio(num: int, den: int) -> float | None:
        return num / den if den > 0 else None

    recall = ratio(c.tp, c.tp + c.fn)
    specificity = ratio(c.tn, c.tn + c.fp)
    balanced = None
    if recall is not None and specificity is not None:
        balanced = (recall + specificity) / 2.0
    return {
        "accuracy": ratio(c.tp + c.tn, c.total),
        "precision": ratio(c.tp, c.tp + c.fp),
        "recall": recall,
        "specificity": specificity,
        "balanced_accuracy": balanced,
    }


def alert_stats(
    alerts: list[Alert], span_days: int, span_start: date | None = None
) -> AlertStats:
    """Table-style alerting aggregates over a span of whole days.

    Daily alerted-node counts take any alert overlapping the day; per-hour
    rates count alerts by their start hour. Standard deviations use the
    population divisor.
    """
    if span_days < 1:
        raise InvalidParams(f"span_days must be >= 1, got {span_days}")

    total = len(alerts)
    if total == 0:
        return AlertStats(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    if span_start is None:
        span_start = min(a.start for a in alerts).date()

    durations = np.array([a.duration_minutes for a in alerts], dtype=float)

    daily_nodes = []
    for offset in range(span_days):
        day = span_start + timedelta(days=offset)
        daily_nodes.append(len({a.node_id for a in alerts if a.overlaps_day(day)}))

    hours = span_days * 24
    span_begin = bucket_start(span_start, 0)
    hourly = np.zeros(hours, dtype=float)
    for alert in alerts:
        index = int((alert.start - span_begin).total_seconds() // 3600)
        if 0 <= index < hours:
            hourly[index] += 1

    return AlertStats(
        total_alerts=total,
        avg_daily_alerts=total / span_days,
        avg_daily_alerted_nodes=float(np.mean(daily_nodes)),
        avg_duration_minutes=float(durations.mean()),
        std_duration_minutes=float(durations.std()),
        avg_alerts_per_hour=total / hours,
        std_alerts_per_hour=float(hourly.std()),
    )
