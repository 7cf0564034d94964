"""Synthetic corpus generation: determinism, validation, burst bookkeeping."""

from datetime import date, timedelta

import pytest

from lachesis.datagen import SynthCorpus, SynthSpec, generate
from lachesis.errors import InvalidParams
from lachesis.model import bucket_start

MONDAY = date(2025, 1, 6)


def flat_profile(rate=2.0):
    return tuple([rate] * 168)


def spec_with(**overrides):
    base = dict(
        node_count=2,
        days=42,
        weekly_profile=flat_profile(),
        noise="poisson",
        seed=7,
        start=MONDAY,
    )
    base.update(overrides)
    return SynthSpec(**base)


def test_generation_is_deterministic():
    a = generate(spec_with(burst_rate=1.0))
    b = generate(spec_with(burst_rate=1.0))
    assert [s.records for s in a.series] == [s.records for s in b.series]
    assert a.events == b.events


def test_node_streams_are_independent_of_node_count():
    # adding a node must not perturb existing nodes' samples
    small = generate(spec_with(node_count=1))
    large = generate(spec_with(node_count=3))
    assert small.series[0].records == large.series[0].records


def test_node_ids_use_prefix_and_padding():
    corpus = generate(spec_with(node_prefix="edge-"))
    assert [s.node_id for s in corpus.series] == ["edge-000", "edge-001"]


def test_zero_rate_profile_is_silent():
    corpus = generate(spec_with(weekly_profile=tuple([0.0] * 168), noise="none"))
    assert all(len(s) == 0 for s in corpus.series)
    assert corpus.events == []


def test_noiseless_counts_follow_profile_exactly():
    profile = [0.0] * 168
    profile[0] = 3.0
    corpus = generate(spec_with(weekly_profile=tuple(profile), noise="none"))
    series = corpus.series[0]
    # 6 weeks x 60 hot minutes, all exactly 3
    assert len(series) == 6 * 60
    assert all(r.count == 3 for r in series)
    assert series.records[0].timestamp == bucket_start(MONDAY, 0)
    assert all(
        r.timestamp.weekday() == 0 and r.timestamp.hour == 0 for r in series
    )


def test_zero_count_minutes_are_omitted():
    rng_free = generate(spec_with(noise="none", weekly_profile=flat_profile(0.4)))
    # rint(0.4) == 0 so nothing survives
    assert all(len(s) == 0 for s in rng_free.series)


def test_gaussian_noise_floors_at_zero():
    corpus = generate(
        spec_with(
            weekly_profile=flat_profile(0.2), noise="gaussian", noise_sigma=3.0
        )
    )
    for series in corpus.series:
        assert all(r.count >= 1 for r in series)


def test_burst_events_mark_burst_starts():
    spec = spec_with(burst_rate=2.0, burst_magnitude=50.0, noise="none")
    corpus = generate(spec)
    assert corpus.events
    first = bucket_start(MONDAY, 0)
    last = first + timedelta(days=42)
    for event in corpus.events:
        assert first <= event.timestamp < last
        assert event.kind == "loop_detected"
        # the burst multiplies a nonzero base rate, so its start minute is loud
        series = next(s for s in corpus.series if s.node_id == event.node_id)
        counts = {r.timestamp: r.count for r in series}
        assert counts.get(event.timestamp, 0) >= 2


def test_events_sorted_by_node_then_time():
    corpus = generate(spec_with(node_count=4, burst_rate=3.0))
    keys = [(e.node_id, e.timestamp) for e in corpus.events]
    assert keys == sorted(keys)


@pytest.mark.parametrize(
    "overrides",
    [
        {"node_count": 0},
        {"days": 30},
        {"weekly_profile": tuple([1.0] * 24)},
        {"weekly_profile": tuple([-1.0] + [1.0] * 167)},
        {"noise": "uniform"},
        {"burst_rate": -0.5},
        {"start": date(2025, 1, 7)},
    ],
)
def test_spec_validation_rejects(overrides):
    with pytest.raises(InvalidParams):
        generate(spec_with(**overrides))


def test_corpus_container_defaults():
    corpus = SynthCorpus(series=[])
    assert corpus.events == []
