"""HTTP service endpoints over a real store via the ASGI test client."""

import json
import threading
from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from lachesis.model import GroundTruthEvent
from lachesis.pipeline import RunConfig, run_experiment
from lachesis.service import create_app
from lachesis.store import Store
from tests.conftest import MONDAY, minute, series_from_rates

ANCHOR = MONDAY + timedelta(days=35)
RUN = "svc-run"


@pytest.fixture(scope="module")
def service_store(tmp_path_factory):
    store = Store(tmp_path_factory.mktemp("svc") / "store").initialize()

    def hot(rate):
        return lambda d, m: rate if (d % 7 == 0 and m < 60) else 0

    store.write_series(series_from_rates("loud-000", MONDAY, 42, hot(10)))
    store.write_series(series_from_rates("loud-001", MONDAY, 42, hot(5)))
    store.write_events([GroundTruthEvent("loud-000", minute(ANCHOR, 0))])
    run_experiment(
        store,
        RunConfig(
            models=("lachesis_v0", "seasonal_naive"),
            anchor=ANCHOR,
            seed=3,
            run_id=RUN,
        ),
    )
    return store


@pytest.fixture
def client(service_store):
    app = create_app(service_store.root)
    with TestClient(app) as c:
        yield c


def test_list_runs(client):
    body = client.get("/api/v1/runs").json()
    assert body["total"] == 1
    row = body["items"][0]
    assert row["run_id"] == RUN
    assert row["models"] == ["lachesis_v0", "seasonal_naive"]
    assert row["nodes"] == 2
    assert row["horizon"]["start"] == "2025-02-10"


def test_list_nodes_pagination(client):
    body = client.get("/api/v1/nodes").json()
    assert body["total"] == 2
    assert [row["node_id"] for row in body["items"]] == ["loud-000", "loud-001"]

    page = client.get("/api/v1/nodes", params={"limit": 1, "offset": 1}).json()
    assert page["total"] == 2
    assert [row["node_id"] for row in page["items"]] == ["loud-001"]
    assert page["limit"] == 1 and page["offset"] == 1


def test_node_series_window(client):
    body = client.get(
        "/api/v1/nodes/loud-000/series",
        params={"from": "2025-01-06T00:00:00Z", "to": "2025-01-06T00:04:00Z"},
    ).json()
    assert body["node_id"] == "loud-000"
    assert body["total"] == 5
    assert body["items"][0] == {"timestamp": "2025-01-06T00:00:00Z", "count": 10}


def test_node_series_bad_window(client):
    resp = client.get(
        "/api/v1/nodes/loud-000/series",
        params={"from": "2025-01-07", "to": "2025-01-06"},
    )
    assert resp.status_code == 400
    resp = client.get("/api/v1/nodes/loud-000/series", params={"from": "whenever"})
    assert resp.status_code == 400


def test_node_series_unknown_node(client):
    assert client.get("/api/v1/nodes/ghost/series").status_code == 404


def test_node_forecast_defaults_to_best_model(client):
    body = client.get(
        "/api/v1/nodes/loud-000/forecast", params={"run": RUN}
    ).json()
    # no v1 in this run, so the first configured model is used
    assert body["model"] == "lachesis_v0"
    assert body["mode"] == "upper_bound"
    assert len(body["values"]) == 7 * 24
    assert body["values"][0]["start"] == "2025-02-10T00:00:00Z"


def test_node_forecast_404s(client):
    assert (
        client.get("/api/v1/nodes/loud-000/forecast", params={"run": "nope"}).status_code
        == 404
    )
    assert (
        client.get("/api/v1/nodes/ghost/forecast", params={"run": RUN}).status_code
        == 404
    )
    assert (
        client.get(
            "/api/v1/nodes/loud-000/forecast",
            params={"run": RUN, "model": "lachesis_v1"},
        ).status_code
        == 404
    )


def test_alert_listing_and_filters(client):
    body = client.get("/api/v1/alerts", params={"run": RUN}).json()
    assert body["run_id"] == RUN
    # v0 thresholds sit at zero, so each node's hot bucket alerts
    assert body["total"] == 2
    ids = {row["id"] for row in body["items"]}
    assert f"{RUN}:lachesis_v0:loud-000:20250210T0000" in ids

    only = client.get(
        "/api/v1/alerts", params={"run": RUN, "node": "loud-001"}
    ).json()
    assert [r["node_id"] for r in only["items"]] == ["loud-001"]

    none = client.get(
        "/api/v1/alerts", params={"run": RUN, "to": "2025-02-09"}
    ).json()
    assert none["total"] == 0


def test_alert_listing_unknown_run(client):
    assert client.get("/api/v1/alerts", params={"run": "nope"}).status_code == 404


def test_feedback_round_trip(client, service_store):
    alert_id = f"{RUN}:lachesis_v0:loud-001:20250210T0000"
    resp = client.post(
        f"/api/v1/alerts/{alert_id}/feedback",
        json={"label": "true_positive", "comment": "confirmed loop"},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["alert_id"] == alert_id
    assert body["label"] == "true_positive"
    assert body["submitted_at"].endswith("Z")

    # durable: the label is on disk, not only in process state
    lines = (service_store.root / "feedback.jsonl").read_text().splitlines()
    assert any(json.loads(line)["alert_id"] == alert_id for line in lines)

    listed = client.get("/api/v1/alerts", params={"run": RUN}).json()
    row = next(r for r in listed["items"] if r["id"] == alert_id)
    assert row["label"] == "true_positive"
    assert row["comment"] == "confirmed loop"


def test_feedback_validation_errors(client):
    alert_id = f"{RUN}:lachesis_v0:loud-000:20250210T0000"
    resp = client.post(f"/api/v1/alerts/{alert_id}/feedback", json={"label": "meh"})
    assert resp.status_code == 422
    resp = client.post(
        f"/api/v1/alerts/{alert_id}/feedback",
        content=b"{not json",
        headers={"content-type": "application/json"},
    )
    assert resp.status_code == 400
    resp = client.post(
        "/api/v1/alerts/unknown:alert/feedback", json={"label": "true_positive"}
    )
    assert resp.status_code == 404


def test_metrics_react_to_feedback(client):
    alert_id = f"{RUN}:lachesis_v0:loud-000:20250210T0000"
    before = client.get(f"/api/v1/runs/{RUN}/metrics").json()
    tp0 = before["models"]["lachesis_v0"]["confusion"]["tp"]
    fp0 = before["models"]["lachesis_v0"]["confusion"]["fp"]

    # cached while the feedback log is unchanged
    again = client.get(f"/api/v1/runs/{RUN}/metrics").json()
    assert again == before

    client.post(
        f"/api/v1/alerts/{alert_id}/feedback", json={"label": "false_positive"}
    )
    after = client.get(f"/api/v1/runs/{RUN}/metrics").json()
    assert after["models"]["lachesis_v0"]["confusion"]["tp"] == tp0 - 1
    assert after["models"]["lachesis_v0"]["confusion"]["fp"] == fp0 + 1


def test_metrics_unknown_run(client):
    assert client.get("/api/v1/runs/nope/metrics").status_code == 404


def test_concurrent_feedback_appends_all_land(client, service_store):
    alert_id = f"{RUN}:lachesis_v0:loud-001:20250210T0000"
    before = len(
        (service_store.root / "feedback.jsonl").read_text().splitlines()
    )
    errors = []

    def submit(i):
        try:
            resp = client.post(
                f"/api/v1/alerts/{alert_id}/feedback",
                json={"label": "true_positive", "comment": f"worker-{i}"},
            )
            assert resp.status_code == 200
        except Exception as exc:
            errors.append(exc)

    threads = [threading.Thread(target=submit, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    lines = (service_store.root / "feedback.jsonl").read_text().splitlines()
    assert len(lines) == before + 16
    assert all(json.loads(line)["alert_id"] for line in lines)
