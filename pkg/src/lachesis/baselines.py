"""Reference forecasters used for comparison runs.

Each baseline consumes the same trailing history window as the main
forecasters and emits an upper-bound series over the 7-day horizon,
clamped at zero. The phase-1 statistical model referenced by comparison
tables is an external system; the stand-in here is a per-slot
mean + 3 std threshold and is labeled as such in reports.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np
from sklearn.base import BaseEstimator

from .errors import InsufficientHistory, InvalidParams
from .model import (
    UPPER_BOUND_MODE,
    EventSeries,
    Forecast,
    TimeBucketKey,
    bucketize,
    horizon_keys,
    weekly_totals,
)

BASELINE_KINDS = ("linear", "quadratic", "seasonal_naive", "phase1_stat")


def _trailing_window(
    series: EventSeries, anchor: date, max_days: int = 35
) -> tuple[EventSeries, tuple[date, date]]:
    if len(series) == 0:
        raise InsufficientHistory(1, 0)
    start = max(series.first_date, anchor - timedelta(days=max_days))
    end = anchor - timedelta(days=1)
    window = series.window(start, end)
    if len(window) == 0:
        raise InsufficientHistory(1, 0)
    return window, (min(start, window.first_date), end)


def _resolve_anchor(series: EventSeries, anchor: date | None) -> date:
    return anchor if anchor is not None else series.last_date + timedelta(days=1)


def _polynomial_forecast(
    series: EventSeries, tau_minutes: int, degree: int, anchor: date | None
) -> Forecast:
    anchor = _resolve_anchor(series, anchor)
    window, span = _trailing_window(series, anchor)
    bucketed = bucketize(window, tau_minutes, span=span)
    totals = bucketed.total_vector()
    if totals.size < degree + 1:
        raise InsufficientHistory(degree + 1, totals.size)

    coeffs = np.polyfit(np.arange(totals.size, dtype=float), totals, degree)
    keys = horizon_keys(anchor, tau_minutes)
    future_index = np.arange(totals.size, totals.size + len(keys), dtype=float)
    predicted = np.maximum(np.polyval(coeffs, future_index), 0.0)
    values = {key: float(v) for key, v in zip(keys, predicted)}
    return Forecast(series.node_id, UPPER_BOUND_MODE, tau_minutes, values)


def linear_forecast(
    series: EventSeries, tau_minutes: int = 60, anchor: date | None = None
) -> Forecast:
    """Least-squares line over bucket totals, extrapolated and clamped."""
    return _polynomial_forecast(series, tau_minutes, 1, anchor)


def quadratic_forecast(
    series: EventSeries, tau_minutes: int = 60, anchor: date | None = None
) -> Forecast:
    """Least-squares parabola over bucket totals, extrapolated and clamped."""
    return _polynomial_forecast(series, tau_minutes, 2, anchor)


def _grouped_window(
    series: EventSeries, tau_minutes: int, anchor: date
) -> dict[TimeBucketKey, list[int]]:
    window, span = _trailing_window(series, anchor)
    covered = (anchor - span[0]).days
    if covered < 7:
        raise InsufficientHistory(7, covered)
    return weekly_totals(bucketize(window, tau_minutes, span=span))


def seasonal_naive_forecast(
    series: EventSeries, tau_minutes: int = 60, anchor: date | None = None
) -> Forecast:
    """Mean of matching weekday/slot bucket totals over the history."""
    anchor = _resolve_anchor(series, anchor)
    groups = _grouped_window(series, tau_minutes, anchor)
    keys = horizon_keys(anchor, tau_minutes)
    values = {
        (day, slot): float(np.mean(groups.get(TimeBucketKey(day.weekday(), slot), [0])))
        for day, slot in keys
    }
    return Forecast(series.node_id, UPPER_BOUND_MODE, tau_minutes, values)


def phase1_threshold(
    series: EventSeries, tau_minutes: int = 60, anchor: date | None = None
) -> Forecast:
    """Per-slot mean + 3 population-std threshold over matching buckets."""
    anchor = _resolve_anchor(series, anchor)
    groups = _grouped_window(series, tau_minutes, anchor)
    keys = horizon_keys(anchor, tau_minutes)
    values: dict[tuple[date, int], float] = {}
    for day, slot in keys:
        members = groups.get(TimeBucketKey(day.weekday(), slot))
        if not members:
            values[(day, slot)] = 0.0
            continue
        arr = np.asarray(members, dtype=float)
        values[(day, slot)] = max(float(arr.mean() + 3.0 * arr.std()), 0.0)
    return Forecast(series.node_id, UPPER_BOUND_MODE, tau_minutes, values)


_BASELINE_FUNCS = {
    "linear": linear_forecast,
    "quadratic": quadratic_forecast,
    "seasonal_naive": seasonal_naive_forecast,
    "phase1_stat": phase1_threshold,
}


class BaselineForecaster(BaseEstimator):
    """Uniform fit/predict wrapper around one baseline kind."""

    def __init__(self, kind: str = "seasonal_naive", tau_minutes: int = 60):
        self.kind = kind
        self.tau_minutes = tau_minutes

    def fit(self, series: EventSeries, anchor: date | None = None) -> "BaselineForecaster":
        if self.kind not in _BASELINE_FUNCS:
            raise InvalidParams(
                f"unknown baseline {self.kind!r}, expected one of {BASELINE_KINDS}"
            )
        self.series_ = series
        self.anchor_ = _resolve_anchor(series, anchor)
        return self

    def predict(self) -> Forecast:
        if not hasattr(self, "series_"):
            raise InvalidParams("predict called before fit")
        func = _BASELINE_FUNCS[self.kind]
        return func(self.series_, self.tau_minutes, self.anchor_)
