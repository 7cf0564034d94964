"""Shared builders for test corpora."""

from datetime import date, datetime, timedelta, timezone

import pytest

from lachesis.model import EventSeries

MONDAY = date(2025, 1, 6)


def minute(day: date, minute_of_day: int) -> datetime:
    """UTC instant for a minute offset within a calendar day."""
    return datetime(day.year, day.month, day.day, tzinfo=timezone.utc) + timedelta(
        minutes=minute_of_day
    )


def series_from_rates(node_id, start, days, count_fn) -> EventSeries:
    """Build a series from count_fn(day_index, minute_of_day) -> int.

    Zero-count minutes are omitted, matching how real telemetry arrives.
    """
    pairs = []
    for d in range(days):
        day = start + timedelta(days=d)
        for m in range(1440):
            count = int(count_fn(d, m))
            if count > 0:
                pairs.append((minute(day, m), count))
    return EventSeries.build(node_id, pairs)


@pytest.fixture
def monday() -> date:
    return MONDAY
