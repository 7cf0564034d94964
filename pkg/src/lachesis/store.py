"""File-tree persistence for series, runs, forecasts, and feedback.

Artifacts are line-delimited or canonical JSON under one root directory, so
runs diff cleanly and re-evaluation never mutates experiment outputs. The
feedback log is append-only with latest-wins resolution on read; appends
are serialized and fsynced before being acknowledged.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from urllib.parse import quote, unquote

from .errors import InvalidParams, NotFound
from .model import (
    EventSeries,
    Forecast,
    GroundTruthEvent,
    parse_timestamp,
)

FEEDBACK_LABELS = ("true_positive", "false_positive")


@dataclass(frozen=True)
class FeedbackLabel:
    """One operator verdict on an alert; later submissions supersede."""

    alert_id: str
    label: str
    comment: str | None = None
    submitted_at: datetime | None = None

    def __post_init__(self):
        if self.label not in FEEDBACK_LABELS:
            raise InvalidParams(
                f"label must be one of {FEEDBACK_LABELS}, got {self.label!r}"
            )
        ts = self.submitted_at or datetime.now(timezone.utc)
        object.__setattr__(self, "submitted_at", ts.astimezone(timezone.utc))


def canonical_json(payload) -> bytes:
    """Stable byte encoding: sorted keys, no whitespace, repr floats."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _timestamp_str(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def forecast_to_payload(forecast: Forecast) -> dict:
    return {
        "node_id": forecast.node_id,
        "mode": forecast.mode,
        "tau_minutes": forecast.tau_minutes,
        "values": {
            f"{day.isoformat()}T{slot // 60:02d}:{slot % 60:02d}": value
            for (day, slot), value in forecast.values.items()
        },
    }


def forecast_from_payload(payload: dict) -> Forecast:
    values = {}
    for key, value in payload["values"].items():
        day = date.fromisoformat(key[:10])
        slot = int(key[11:13]) * 60 + int(key[14:16])
        values[(day, slot)] = float(value)
    return Forecast(
        node_id=payload["node_id"],
        mode=payload["mode"],
        tau_minutes=int(payload["tau_minutes"]),
        values=values,
    )


class Store:
    """Directory-tree artifact store rooted at ``root``."""

    def __init__(self, root):
        self.root = Path(root)
        self._feedback_lock = threading.Lock()

    # Layout helpers

    def _series_dir(self) -> Path:
        return self.root / "series"

    def _series_path(self, node_id: str) -> Path:
        return self._series_dir() / f"{quote(node_id, safe='')}.csv"

    def _events_path(self) -> Path:
        return self.root / "events.jsonl"

    def _run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / quote(run_id, safe="")

    def _forecast_path(self, run_id: str, model: str, node_id: str) -> Path:
        return (
            self._run_dir(run_id)
            / "forecasts"
            / quote(model, safe="")
            / f"{quote(node_id, safe='')}.json"
        )

    def _feedback_path(self) -> Path:
        return self.root / "feedback.jsonl"

    def initialize(self) -> "Store":
        self.root.mkdir(parents=True, exist_ok=True)
        self._series_dir().mkdir(exist_ok=True)
        (self.root / "runs").mkdir(exist_ok=True)
        return self

    # Series

    def write_series(self, series: EventSeries) -> Path:
        self.initialize()
        path = self._series_path(series.node_id)
        lines = ["node_id,timestamp,count"]
        lines += [
            f"{series.node_id},{_timestamp_str(r.timestamp)},{r.count}"
            for r in series
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def read_series(self, node_id: str) -> EventSeries:
        path = self._series_path(node_id)
        if not path.exists():
            raise NotFound(f"no series stored for node {node_id!r}")
        pairs = []
        with path.open(encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                _, ts, count = line.rstrip("\n").split(",")
                pairs.append((parse_timestamp(ts), int(count)))
        return EventSeries.build(node_id, pairs)

    def list_nodes(self) -> list[str]:
        if not self._series_dir().exists():
            return []
        return sorted(unquote(p.stem) for p in self._series_dir().glob("*.csv"))

    # Ground truth

    def write_events(self, events: list[GroundTruthEvent]) -> Path:
        self.initialize()
        path = self._events_path()
        with path.open("w", encoding="utf-8") as fh:
            for event in events:
                fh.write(
                    canonical_json(
                        {
                            "node_id": event.node_id,
                            "timestamp": _timestamp_str(event.timestamp),
                            "kind": event.kind,
                        }
                    ).decode("utf-8")
                    + "\n"
                )
        return path

    def read_events(self) -> list[GroundTruthEvent]:
        path = self._events_path()
        if not path.exists():
            return []
        events = []
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                events.append(
                    GroundTruthEvent(
                        row["node_id"],
                        parse_timestamp(row["timestamp"]),
                        row.get("kind", "loop_detected"),
                    )
                )
        return events

    # Runs and forecasts

    def write_manifest(self, run_id: str, manifest: dict) -> Path:
        run_dir = self._run_dir(run_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / "manifest.json"
        path.write_bytes(json.dumps(manifest, sort_keys=True, indent=2).encode("utf-8"))
        return path

    def read_manifest(self, run_id: str) -> dict:
        path = self._run_dir(run_id) / "manifest.json"
        if not path.exists():
            raise NotFound(f"no run {run_id!r} in store")
        return json.loads(path.read_text(encoding="utf-8"))

    def list_runs(self) -> list[str]:
        runs_dir = self.root / "runs"
        if not runs_dir.exists():
            return []
        return sorted(
            unquote(p.name) for p in runs_dir.iterdir() if (p / "manifest.json").exists()
        )

    def write_forecast(self, run_id: str, model: str, forecast: Forecast) -> Path:
        path = self._forecast_path(run_id, model, forecast.node_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(canonical_json(forecast_to_payload(forecast)))
        return path

    def read_forecast(self, run_id: str, model: str, node_id: str) -> Forecast:
        path = self._forecast_path(run_id, model, node_id)
        if not path.exists():
            raise NotFound(
                f"no forecast for run {run_id!r}, model {model!r}, node {node_id!r}"
            )
        return forecast_from_payload(json.loads(path.read_text(encoding="utf-8")))

    def forecast_bytes(self, run_id: str, model: str, node_id: str) -> bytes:
        path = self._forecast_path(run_id, model, node_id)
        if not path.exists():
            raise NotFound(
                f"no forecast for run {run_id!r}, model {model!r}, node {node_id!r}"
            )
        return path.read_bytes()

    def write_evaluation(self, run_id: str, report: dict) -> Path:
        run_dir = self._run_dir(run_id)
        if not run_dir.exists():
            raise NotFound(f"no run {run_id!r} in store")
        path = run_dir / "evaluation.json"
        path.write_bytes(json.dumps(report, sort_keys=True, indent=2).encode("utf-8"))
        return path

    def read_evaluation(self, run_id: str) -> dict:
        path = self._run_dir(run_id) / "evaluation.json"
        if not path.exists():
            raise NotFound(f"run {run_id!r} has no stored evaluation")
        return json.loads(path.read_text(encoding="utf-8"))

    # Feedback log

    def append_feedback(self, label: FeedbackLabel) -> None:
        """Append one label durably; returns only after fsync."""
        self.initialize()
        row = canonical_json(
            {
                "alert_id": label.alert_id,
                "label": label.label,
                "comment": label.comment,
                "submitted_at": label.submitted_at.strftime("%Y-%m-%dT%H:%M:%S.%fZ"),
            }
        )
        with self._feedback_lock:
            with self._feedback_path().open("ab") as fh:
                fh.write(row + b"\n")
                fh.flush()
                os.fsync(fh.fileno())

    def read_feedback(self) -> dict[str, FeedbackLabel]:
        """Latest label per alert id, in log order."""
        path = self._feedback_path()
        if not path.exists():
            return {}
        latest: dict[str, FeedbackLabel] = {}
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                latest[row["alert_id"]] = FeedbackLabel(
                    alert_id=row["alert_id"],
                    label=row["label"],
                    comment=row.get("comment"),
                    submitted_at=datetime.fromisoformat(
                        row["submitted_at"].replace("Z", "+00:00")
                    ),
                )
        return latest

    def feedback_token(self) -> tuple[int, int]:
        """Cheap change token for caching evaluations over the feedback log."""
        path = self._feedback_path()
        if not path.exists():
            return (0, 0)
        stat = path.stat()
        return (stat.st_size, stat.st_mtime_ns)
