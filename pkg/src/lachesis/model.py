"""Domain types, time bucketing, and history-window splitting.

Every other module consumes these types. All timestamps are normalized to
UTC with minute precision at construction time; weekdays are computed in
UTC (Monday = 0). Missing minutes are zero-filled everywhere: an absent
report means no events, not a gap to interpolate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import EmptyInput, InsufficientHistory, InvalidParams

MINUTES_PER_DAY = 1440

FORECAST_MODE = "forecast"
UPPER_BOUND_MODE = "upper_bound"

DEFAULT_HISTORY_DAYS = 35
DEFAULT_HORIZON_DAYS = 7


def normalize_timestamp(ts: datetime) -> datetime:
    """Coerce a timestamp to tz-aware UTC, truncated to the minute."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.replace(second=0, microsecond=0)


def parse_timestamp(raw: str) -> datetime:
    """Parse an RFC 3339 timestamp string into normalized UTC."""
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return normalize_timestamp(datetime.fromisoformat(text))


def bucket_start(day: date, slot: int) -> datetime:
    """UTC instant at which bucket (day, slot) begins."""
    return datetime.combine(day, time(slot // 60, slot % 60), tzinfo=timezone.utc)


@dataclass(frozen=True)
class EventRecord:
    """One node's event count observed at one minute."""

    node_id: str
    timestamp: datetime
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise InvalidParams(f"count must be >= 0, got {self.count}")
        object.__setattr__(self, "timestamp", normalize_timestamp(self.timestamp))


@dataclass(frozen=True)
class EventSeries:
    """Time-ordered event counts for a single node."""

    node_id: str
    records: tuple[EventRecord, ...]

    def __post_init__(self):
        prev = None
        for rec in self.records:
            if rec.node_id != self.node_id:
                raise InvalidParams(
                    f"record node {rec.node_id!r} != series node {self.node_id!r}"
                )
            if prev is not None and rec.timestamp <= prev:
                raise InvalidParams("timestamps must be strictly increasing")
            prev = rec.timestamp

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records)

    @property
    def first_date(self) -> date:
        return self.records[0].timestamp.date()

    @property
    def last_date(self) -> date:
        return self.records[-1].timestamp.date()

    @staticmethod
    def build(node_id: str, pairs: Iterable[tuple[datetime, int]]) -> "EventSeries":
        """Construct from unordered (timestamp, count) pairs.

        Duplicate minutes are summed, matching the ingest merge rule.
        """
        merged: dict[datetime, int] = {}
        for ts, count in pairs:
            ts = normalize_timestamp(ts)
            merged[ts] = merged.get(ts, 0) + int(count)
        records = tuple(
            EventRecord(node_id, ts, merged[ts]) for ts in sorted(merged)
        )
        return EventSeries(node_id, records)

    def window(self, start: date, end: date) -> "EventSeries":
        """Records with start <= date <= end (may be empty)."""
        kept = tuple(r for r in self.records if start <= r.timestamp.date() <= end)
        return EventSeries(self.node_id, kept)


@dataclass(frozen=True)
class TimeBucketKey:
    """Weekday (Monday = 0) plus start-of-bucket minute of day."""

    weekday: int
    slot: int

    def __post_init__(self):
        if not 0 <= self.weekday <= 6:
            raise InvalidParams(f"weekday must be 0-6, got {self.weekday}")
        if not 0 <= self.slot < MINUTES_PER_DAY:
            raise InvalidParams(f"slot must be within the day, got {self.slot}")


@dataclass(frozen=True)
class GroundTruthEvent:
    """A confirmed networking issue used to score alerts."""

    node_id: str
    timestamp: datetime
    kind: str = "loop_detected"

    def __post_init__(self):
        object.__setattr__(self, "timestamp", normalize_timestamp(self.timestamp))


@dataclass
class BucketedSeries:
    """Minute counts regrouped into fixed-width buckets.

    ``buckets`` maps (date, slot) to a length-``tau_minutes`` integer vector;
    minutes without a record hold 0. Every bucket between the first and last
    observed date is present.
    """

    node_id: str
    tau_minutes: int
    buckets: dict[tuple[date, int], np.ndarray]

    def sorted_keys(self) -> list[tuple[date, int]]:
        return sorted(self.buckets)

    def totals(self) -> dict[tuple[date, int], int]:
        """Per-bucket event totals, the per-slot series value."""
        return {key: int(vec.sum()) for key, vec in self.buckets.items()}

    def total_vector(self) -> np.ndarray:
        """Chronological vector of per-bucket totals."""
        return np.array([self.buckets[k].sum() for k in self.sorted_keys()], dtype=float)


@dataclass
class ForecastParams:
    """Hyperparameters of the particle-filter forecaster.

    ``c`` left as None resolves from the mode: 1.0 when forecasting,
    1.5 for upper-bound (threshold) prediction.
    """

    tau_minutes: int = 60
    forecast_mode: bool = False
    epsilon: float = 0.98
    theta: int = 100
    kernel: str = "gaussian"
    bandwidth: float = 0.3
    dbscan_eps: float = 0.1
    dbscan_min_samples: int = 15
    c: float | None = None
    history_days: int = DEFAULT_HISTORY_DAYS
    horizon_days: int = DEFAULT_HORIZON_DAYS

    def resolved_c(self) -> float:
        if self.c is not None:
            return self.c
        return 1.0 if self.forecast_mode else 1.5

    def validate(self) -> "ForecastParams":
        if not 0 < self.epsilon <= 1:
            raise InvalidParams(f"epsilon must be in (0, 1], got {self.epsilon}")
        if self.theta < 1:
            raise InvalidParams(f"theta must be >= 1, got {self.theta}")
        if self.bandwidth <= 0:
            raise InvalidParams(f"bandwidth must be > 0, got {self.bandwidth}")
        if self.dbscan_eps <= 0:
            raise InvalidParams(f"dbscan_eps must be > 0, got {self.dbscan_eps}")
        if self.dbscan_min_samples < 1:
            raise InvalidParams("dbscan_min_samples must be >= 1")
        from .density import KERNELS

        if self.kernel not in KERNELS:
            raise InvalidParams(
                f"kernel must be one of {sorted(KERNELS)}, got {self.kernel!r}"
            )
        if self.tau_minutes < 1 or MINUTES_PER_DAY % self.tau_minutes != 0:
            raise InvalidParams(
                f"tau_minutes must divide {MINUTES_PER_DAY}, got {self.tau_minutes}"
            )
        if not 1.0 <= self.resolved_c() <= 2.0:
            raise InvalidParams(f"c must be in [1.0, 2.0], got {self.resolved_c()}")
        if self.history_days < 1 or self.horizon_days < 1:
            raise InvalidParams("history_days and horizon_days must be >= 1")
        return self


@dataclass
class Forecast:
    """Per-slot predicted values over the horizon.

    ``mode`` records whether the values are a plain forecast or an alerting
    upper bound; ``values`` maps (date, slot) to a non-negative number.
    """

    node_id: str
    mode: str
    tau_minutes: int
    values: dict[tuple[date, int], float] = field(default_factory=dict)

    def sorted_keys(self) -> list[tuple[date, int]]:
        return sorted(self.values)

    def as_vector(self) -> np.ndarray:
        return np.array([self.values[k] for k in self.sorted_keys()], dtype=float)


def slot_sequence(tau_minutes: int) -> list[int]:
    """Start minutes of every bucket within one day."""
    if MINUTES_PER_DAY % tau_minutes != 0:
        raise InvalidParams(
            f"tau_minutes must divide {MINUTES_PER_DAY}, got {tau_minutes}"
        )
    return list(range(0, MINUTES_PER_DAY, tau_minutes))


def bucketize(
    series: EventSeries,
    tau_minutes: int,
    span: tuple[date, date] | None = None,
) -> BucketedSeries:
    """Regroup minute counts into fixed buckets over the covered date range.

    Every minute from the first covered date through the last lands in
    exactly one bucket; unobserved minutes contribute zero. ``span``
    widens the covered range beyond the observed records, so a window
    with sparse edges still yields its full bucket grid.
    """
    slots = slot_sequence(tau_minutes)
    if len(series) == 0:
        raise EmptyInput(f"series for node {series.node_id!r} is empty")

    first, last = series.first_date, series.last_date
    if span is not None:
        if span[0] > first or span[1] < last:
            raise InvalidParams("span must cover every record")
        first, last = span
    buckets: dict[tuple[date, int], np.ndarray] = {}
    day = first
    while day <= last:
        for slot in slots:
            buckets[(day, slot)] = np.zeros(tau_minutes, dtype=np.int64)
        day += timedelta(days=1)

    for rec in series:
        ts = rec.timestamp
        minute_of_day = ts.hour * 60 + ts.minute
        slot = minute_of_day - minute_of_day % tau_minutes
        buckets[(ts.date(), slot)][minute_of_day - slot] += rec.count

    return BucketedSeries(series.node_id, tau_minutes, buckets)


def flatten(bucketed: BucketedSeries) -> dict[datetime, int]:
    """Inverse of :func:`bucketize`: minute instant -> count (zeros included)."""
    out: dict[datetime, int] = {}
    for (day, slot), vec in bucketed.buckets.items():
        start = bucket_start(day, slot)
        for offset, count in enumerate(vec):
            out[start + timedelta(minutes=offset)] = int(count)
    return out


def split_history(
    series: EventSeries, anchor: date, history_days: int = DEFAULT_HISTORY_DAYS
) -> tuple[EventSeries, EventSeries]:
    """Split the trailing history before ``anchor`` into (4-week, last-week) windows.

    The first window spans days [anchor-35, anchor-8], the second
    [anchor-7, anchor-1]; together they cover exactly the 35 days ending
    the day before ``anchor``. Records outside the window are dropped.
    """
    if len(series) == 0:
        raise InsufficientHistory(history_days, 0)
    available = (anchor - series.first_date).days
    if available < history_days:
        raise InsufficientHistory(history_days, max(available, 0))

    q_start = anchor - timedelta(days=history_days)
    q_end = anchor - timedelta(days=8)
    s_start = anchor - timedelta(days=7)
    s_end = anchor - timedelta(days=1)
    return series.window(q_start, q_end), series.window(s_start, s_end)


def horizon_keys(
    anchor: date, tau_minutes: int, horizon_days: int = DEFAULT_HORIZON_DAYS
) -> list[tuple[date, int]]:
    """(date, slot) grid of the prediction horizon starting at ``anchor``."""
    slots = slot_sequence(tau_minutes)
    return [
        (anchor + timedelta(days=d), slot)
        for d in range(horizon_days)
        for slot in slots
    ]


def weekly_totals(
    bucketed: BucketedSeries,
) -> dict[TimeBucketKey, list[int]]:
    """Group per-bucket totals by (weekday, slot), chronologically within a group."""
    grouped: dict[TimeBucketKey, list[int]] = {}
    for (day, slot) in bucketed.sorted_keys():
        key = TimeBucketKey(day.weekday(), slot)
        grouped.setdefault(key, []).append(int(bucketed.buckets[(day, slot)].sum()))
    return grouped


def totals_for_keys(
    bucketed: BucketedSeries, keys: Iterable[tuple[date, int]]
) -> np.ndarray:
    """Per-bucket totals for an explicit (date, slot) grid; missing buckets are 0."""
    totals: Mapping[tuple[date, int], int] = bucketed.totals()
    return np.array([totals.get(k, 0) for k in keys], dtype=float)
