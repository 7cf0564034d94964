"""Synthetic telemetry corpora with controlled shape and injected bursts.

Each node samples minute counts around a weekly base-rate profile and
optionally receives multiplicative bursts; every burst emits one
ground-truth event at its start. Generation is fully deterministic per
(seed, node index), so corpora can be regenerated instead of stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import InvalidParams
from .model import EventRecord, EventSeries, GroundTruthEvent, bucket_start

HOURS_PER_WEEK = 168
MINUTES_PER_WEEK = 10080

NOISE_KINDS = ("poisson", "gaussian", "none")

MIN_BURST_MINUTES = 30
MAX_BURST_MINUTES = 120


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one homogeneous group of synthetic nodes.

    ``weekly_profile`` holds the per-minute base rate for each hour of the
    week (Monday 00:00 first). ``days`` must fit a training window plus an
    evaluation week. Bursts multiply the base rate, so they are invisible
    on hours whose base rate is zero.
    """

    node_count: int
    days: int
    weekly_profile: tuple[float, ...]
    noise: str = "poisson"
    noise_sigma: float = 1.0
    burst_rate: float = 0.0
    burst_magnitude: float = 10.0
    seed: int = 0
    start: date = date(2025, 1, 6)
    node_prefix: str = "node-"

    def validate(self) -> "SynthSpec":
        if self.node_count < 1:
            raise InvalidParams(f"node_count must be >= 1, got {self.node_count}")
        if self.days < 42:
            raise InvalidParams(f"days must be >= 42, got {self.days}")
        if len(self.weekly_profile) != HOURS_PER_WEEK:
            raise InvalidParams(
                f"weekly_profile must have {HOURS_PER_WEEK} entries, "
                f"got {len(self.weekly_profile)}"
            )
        if any(rate < 0 for rate in self.weekly_profile):
            raise InvalidParams("weekly_profile rates must be >= 0")
        if self.noise not in NOISE_KINDS:
            raise InvalidParams(
                f"noise must be one of {NOISE_KINDS}, got {self.noise!r}"
            )
        if self.burst_rate < 0 or self.burst_magnitude < 0:
            raise InvalidParams("burst_rate and burst_magnitude must be >= 0")
        if self.start.weekday() != 0:
            raise InvalidParams("start must be a Monday so profiles align")
        return self


@dataclass
class SynthCorpus:
    """Generated node series plus the injected ground truth."""

    series: list[EventSeries]
    events: list[GroundTruthEvent] = field(default_factory=list)


def _minute_rates(spec: SynthSpec) -> np.ndarray:
    per_minute = np.repeat(np.asarray(spec.weekly_profile, dtype=float), 60)
    weeks = -(-spec.days * 1440 // MINUTES_PER_WEEK)
    return np.tile(per_minute, weeks)[: spec.days * 1440]


def _sample_counts(rates: np.ndarray, spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.noise == "poisson":
        return rng.poisson(rates)
    if spec.noise == "gaussian":
        noisy = rng.normal(rates, spec.noise_sigma)
        return np.maximum(np.rint(noisy), 0.0).astype(np.int64)
    return np.rint(rates).astype(np.int64)


def generate(spec: SynthSpec) -> SynthCorpus:
    """Generate every node described by a SynthSpec deterministically.

    Burst windows (uniform 30-120 minutes) scale the base rate by the
    burst magnitude and emit a ground-truth event at their start minute.
    Zero-count minutes are omitted from the series; bucketizing restores
    them as zeros.
    """
    spec.validate()
    origin = bucket_start(spec.start, 0)
    total_minutes = spec.days * 1440
    weeks = -(-spec.days // 7)

    all_series: list[EventSeries] = []
    all_events: list[GroundTruthEvent] = []
    for index in range(spec.node_count):
        rng = np.random.default_rng([spec.seed, index])
        node_id = f"{spec.node_prefix}{index:03d}"
        rates = _minute_rates(spec)

        for week in range(weeks):
            for _ in range(rng.poisson(spec.burst_rate)):
                offset = week * MINUTES_PER_WEEK + int(rng.integers(0, MINUTES_PER_WEEK))
                if offset >= total_minutes:
                    continue
                duration = int(rng.integers(MIN_BURST_MINUTES, MAX_BURST_MINUTES + 1))
                rates[offset : offset + duration] *= spec.burst_magnitude
                all_events.append(
                    GroundTruthEvent(node_id, origin + timedelta(minutes=offset))
                )

        counts = _sample_counts(rates, spec, rng)
        nonzero = np.flatnonzero(counts)
        records = tuple(
            EventRecord(node_id, origin + timedelta(minutes=int(m)), int(counts[m]))
            for m in nonzero
        )
        all_series.append(EventSeries(node_id, records))

    all_events.sort(key=lambda e: (e.node_id, e.timestamp))
    return SynthCorpus(all_series, all_events)
