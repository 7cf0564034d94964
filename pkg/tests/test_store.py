"""File-tree store round trips and the append-only feedback log."""

from datetime import datetime, timedelta, timezone

import pytest

from lachesis.errors import InvalidParams, NotFound
from lachesis.model import EventSeries, Forecast, GroundTruthEvent
from lachesis.store import (
    FeedbackLabel,
    Store,
    canonical_json,
    forecast_from_payload,
    forecast_to_payload,
)
from tests.conftest import MONDAY, minute


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store").initialize()


def sample_series(node_id="n1"):
    return EventSeries.build(
        node_id, [(minute(MONDAY, m), m + 1) for m in (0, 5, 1441)]
    )


def sample_forecast(node_id="n1"):
    values = {
        (MONDAY, 0): 1.5,
        (MONDAY, 60): 0.0,
        (MONDAY + timedelta(days=1), 0): 2.25,
    }
    return Forecast(node_id, "upper_bound", 60, values)


def test_series_round_trip(store):
    series = sample_series()
    store.write_series(series)
    back = store.read_series("n1")
    assert back.records == series.records


def test_node_ids_with_path_hostile_characters(store):
    series = sample_series("rack/7:unit.9")
    store.write_series(series)
    assert store.list_nodes() == ["rack/7:unit.9"]
    assert store.read_series("rack/7:unit.9").records == series.records


def test_missing_series_raises(store):
    with pytest.raises(NotFound):
        store.read_series("ghost")


def test_list_nodes_sorted(store):
    for node in ("b", "a", "c"):
        store.write_series(sample_series(node))
    assert store.list_nodes() == ["a", "b", "c"]


def test_events_round_trip(store):
    events = [
        GroundTruthEvent("n1", minute(MONDAY, 90)),
        GroundTruthEvent("n2", minute(MONDAY, 10), kind="link_flap"),
    ]
    store.write_events(events)
    back = store.read_events()
    assert back == events


def test_events_default_empty(store):
    assert store.read_events() == []


def test_forecast_payload_round_trip():
    fc = sample_forecast()
    assert forecast_from_payload(forecast_to_payload(fc)) == fc


def test_forecast_bytes_are_canonical(store):
    fc = sample_forecast()
    store.write_forecast("r1", "lachesis_v0", fc)
    raw = store.forecast_bytes("r1", "lachesis_v0", "n1")
    assert raw == canonical_json(forecast_to_payload(fc))
    # writing the same forecast again yields identical bytes
    store.write_forecast("r1", "lachesis_v0", fc)
    assert store.forecast_bytes("r1", "lachesis_v0", "n1") == raw


def test_forecast_round_trip_and_missing(store):
    fc = sample_forecast()
    store.write_forecast("r1", "m", fc)
    assert store.read_forecast("r1", "m", "n1") == fc
    with pytest.raises(NotFound):
        store.read_forecast("r1", "m", "other")
    with pytest.raises(NotFound):
        store.forecast_bytes("r2", "m", "n1")


def test_manifest_round_trip_and_listing(store):
    store.write_manifest("run-b", {"anchor": "2025-02-10"})
    store.write_manifest("run-a", {"anchor": "2025-02-03"})
    assert store.list_runs() == ["run-a", "run-b"]
    assert store.read_manifest("run-b")["anchor"] == "2025-02-10"
    with pytest.raises(NotFound):
        store.read_manifest("run-c")


def test_evaluation_requires_existing_run(store):
    with pytest.raises(NotFound):
        store.write_evaluation("nope", {})
    store.write_manifest("r1", {})
    store.write_evaluation("r1", {"detection": 0.9})
    assert store.read_evaluation("r1") == {"detection": 0.9}
    with pytest.raises(NotFound):
        store.read_evaluation("r2")


def test_feedback_append_latest_wins(store):
    t0 = datetime(2025, 2, 1, tzinfo=timezone.utc)
    store.append_feedback(FeedbackLabel("a1", "true_positive", submitted_at=t0))
    store.append_feedback(
        FeedbackLabel("a1", "false_positive", comment="noise", submitted_at=t0)
    )
    store.append_feedback(FeedbackLabel("a2", "true_positive", submitted_at=t0))
    latest = store.read_feedback()
    assert set(latest) == {"a1", "a2"}
    assert latest["a1"].label == "false_positive"
    assert latest["a1"].comment == "noise"
    assert latest["a1"].submitted_at == t0


def test_feedback_log_is_append_only(store):
    store.append_feedback(FeedbackLabel("a1", "true_positive"))
    store.append_feedback(FeedbackLabel("a1", "false_positive"))
    lines = (store.root / "feedback.jsonl").read_text().strip().splitlines()
    assert len(lines) == 2


def test_feedback_label_validation():
    with pytest.raises(InvalidParams):
        FeedbackLabel("a1", "maybe")


def test_feedback_token_changes_on_append(store):
    before = store.feedback_token()
    assert before == (0, 0)
    store.append_feedback(FeedbackLabel("a1", "true_positive"))
    after = store.feedback_token()
    assert after != before
    assert store.feedback_token() == after


def test_store_paths_stay_inside_root(store, tmp_path):
    store.write_series(sample_series("../escape"))
    inside = [p for p in (tmp_path / "store").rglob("*") if p.is_file()]
    outside = [p for p in tmp_path.rglob("*.csv") if "store" not in p.parts]
    assert inside and not outside
