"""HTTP feedback service over a pipeline store.

Read endpoints expose nodes, series, forecasts, alerts, and run metrics;
the single write endpoint records operator feedback on alerts. Metrics are
recomputed from stored artifacts plus the feedback log, so the service and
the CLI evaluation agree by construction.
"""

from __future__ import annotations

from datetime import date, datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .alerting import Alert, generate_alerts
from .errors import NotFound
from .model import bucket_start, parse_timestamp
from .pipeline import evaluate_run, horizon_actuals
from .store import FeedbackLabel, Store

DEFAULT_PAGE_LIMIT = 500


class FeedbackBody(BaseModel):
    label: Literal["true_positive", "false_positive"]
    comment: str | None = None


def _iso(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_bound(raw: str | None, name: str) -> datetime | None:
    if raw is None:
        return None
    try:
        return parse_timestamp(raw)
    except ValueError:
        pass
    try:
        day = date.fromisoformat(raw)
        return datetime(day.year, day.month, day.day, tzinfo=timezone.utc)
    except ValueError:
        raise HTTPException(400, f"malformed {name!r} timestamp: {raw!r}")


def _page(items: list, limit: int, offset: int) -> dict:
    return {
        "items": items[offset : offset + limit],
        "total": len(items),
        "limit": limit,
        "offset": offset,
    }


def create_app(store_path, frontend_dir=None) -> FastAPI:
    store = Store(store_path)
    app = FastAPI(title="event-count forecasting feedback service")

    alert_cache: dict[str, dict[str, dict]] = {}
    metrics_cache: dict[str, tuple[tuple, dict]] = {}

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        if any(err.get("type") == "json_invalid" for err in exc.errors()):
            return JSONResponse({"detail": "malformed JSON body"}, status_code=400)
        return JSONResponse({"detail": exc.errors()}, status_code=422)

    def run_alerts(run_id: str) -> dict[str, dict]:
        """All alerts of a run keyed by id, with their model name."""
        if run_id in alert_cache:
            return alert_cache[run_id]
        try:
            manifest = store.read_manifest(run_id)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        anchor = date.fromisoformat(manifest["horizon"]["start"])
        params = manifest["params"]
        tau = int(params["tau_minutes"])
        horizon_days = int(params["horizon_days"])
        actuals = horizon_actuals(store, manifest["nodes"], anchor, horizon_days, tau)

        collected: dict[str, dict] = {}
        for model in manifest["models"]:
            skipped = {e["node"] for e in manifest["skipped"].get(model, [])}
            for node in manifest["nodes"]:
                if node in skipped:
                    continue
                try:
                    forecast = store.read_forecast(run_id, model, node)
                except NotFound:
                    continue
                for alert in generate_alerts(
                    actuals[node], forecast, id_prefix=f"{run_id}:{model}:"
                ):
                    collected[alert.id] = {"alert": alert, "model": model}
        alert_cache[run_id] = collected
        return collected

    def alert_row(entry: dict, labels: dict[str, FeedbackLabel]) -> dict:
        alert: Alert = entry["alert"]
        label = labels.get(alert.id)
        return {
            "id": alert.id,
            "node_id": alert.node_id,
            "model": entry["model"],
            "start": _iso(alert.start),
            "end": _iso(alert.end),
            "duration_minutes": alert.duration_minutes,
            "label": label.label if label else None,
            "comment": label.comment if label else None,
        }

    @app.get("/api/v1/runs")
    def list_runs():
        rows = []
        for run_id in store.list_runs():
            manifest = store.read_manifest(run_id)
            rows.append(
                {
                    "run_id": run_id,
                    "models": manifest["models"],
                    "nodes": len(manifest["nodes"]),
                    "horizon": manifest["horizon"],
                }
            )
        return {"items": rows, "total": len(rows)}

    @app.get("/api/v1/nodes")
    def list_nodes(
        limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1),
        offset: int = Query(0, ge=0),
    ):
        return _page([{"node_id": n} for n in store.list_nodes()], limit, offset)

    @app.get("/api/v1/nodes/{node_id}/series")
    def node_series(
        node_id: str,
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None, alias="to"),
        limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1),
        offset: int = Query(0, ge=0),
    ):
        lo = _parse_bound(from_, "from")
        hi = _parse_bound(to, "to")
        if lo is not None and hi is not None and lo > hi:
            raise HTTPException(400, "'from' must not be after 'to'")
        try:
            series = store.read_series(node_id)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        records = [
            {"timestamp": _iso(r.timestamp), "count": r.count}
            for r in series
            if (lo is None or r.timestamp >= lo) and (hi is None or r.timestamp <= hi)
        ]
        body = _page(records, limit, offset)
        body["node_id"] = node_id
        return body

    @app.get("/api/v1/nodes/{node_id}/forecast")
    def node_forecast(node_id: str, run: str, model: str | None = None):
        try:
            manifest = store.read_manifest(run)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        if node_id not in manifest["nodes"]:
            raise HTTPException(404, f"node {node_id!r} is not part of run {run!r}")
        if model is None:
            model = (
                "lachesis_v1"
                if "lachesis_v1" in manifest["models"]
                else manifest["models"][0]
            )
        try:
            forecast = store.read_forecast(run, model, node_id)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        values = [
            {"start": _iso(bucket_start(d, s)), "value": forecast.values[(d, s)]}
            for d, s in forecast.sorted_keys()
        ]
        return {
            "node_id": node_id,
            "run_id": run,
            "model": model,
            "mode": forecast.mode,
            "tau_minutes": forecast.tau_minutes,
            "values": values,
        }

    @app.get("/api/v1/alerts")
    def list_alerts(
        run: str,
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None, alias="to"),
        node: str | None = None,
        model: str | None = None,
        limit: int = Query(DEFAULT_PAGE_LIMIT, ge=1),
        offset: int = Query(0, ge=0),
    ):
        lo = _parse_bound(from_, "from")
        hi = _parse_bound(to, "to")
        if lo is not None and hi is not None and lo > hi:
            raise HTTPException(400, "'from' must not be after 'to'")
        entries = run_alerts(run)
        labels = store.read_feedback()
        rows = []
        for entry in entries.values():
            alert: Alert = entry["alert"]
            if node is not None and alert.node_id != node:
                continue
            if model is not None and entry["model"] != model:
                continue
            if lo is not None and alert.end <= lo:
                continue
            if hi is not None and alert.start > hi:
                continue
            rows.append(alert_row(entry, labels))
        rows.sort(key=lambda r: (r["start"], r["node_id"], r["model"]))
        body = _page(rows, limit, offset)
        body["run_id"] = run
        return body

    @app.post("/api/v1/alerts/{alert_id}/feedback")
    def post_feedback(alert_id: str, body: FeedbackBody):
        run_id = alert_id.split(":", 1)[0]
        entries = run_alerts(run_id)
        if alert_id not in entries:
            raise HTTPException(404, f"no alert {alert_id!r}")
        label = FeedbackLabel(alert_id=alert_id, label=body.label, comment=body.comment)
        store.append_feedback(label)
        return {
            "alert_id": alert_id,
            "label": label.label,
            "comment": label.comment,
            "submitted_at": label.submitted_at.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
        }

    @app.get("/api/v1/runs/{run_id}/metrics")
    def run_metrics(run_id: str):
        token = store.feedback_token()
        cached = metrics_cache.get(run_id)
        if cached is not None and cached[0] == token:
            return cached[1]
        try:
            report = evaluate_run(store, run_id, with_feedback=True)
        except NotFound as exc:
            raise HTTPException(404, str(exc))
        metrics_cache[run_id] = (token, report)
        return report

    if frontend_dir is not None and Path(frontend_dir).exists():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app


def serve(store_path, host: str = "127.0.0.1", port: int = 8000, frontend_dir=None):
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    app = create_app(store_path, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
