"""Batch pipeline: ingest, experiment runs, evaluation, and reports.

Experiments and evaluation are decoupled: run_experiment persists forecasts
and timings, evaluate_run later scores them against actuals and ground
truth, folding in operator feedback without re-running any model.
"""

from __future__ import annotations

import json
import logging
import time
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .alerting import (
    Alert,
    ConfusionCounts,
    alert_stats,
    classification_metrics,
    generate_alerts,
    match_confusion,
    regression_metrics,
)
from .baselines import BaselineForecaster
from .errors import InsufficientHistory, InvalidParams, NotFound, ValidationFailure
from .forecasters import LachesisV0, LachesisV1
from .model import (
    EventSeries,
    ForecastParams,
    GroundTruthEvent,
    bucket_start,
    bucketize,
    horizon_keys,
    parse_timestamp,
)
from .store import FeedbackLabel, Store

logger = logging.getLogger(__name__)

MODEL_NAMES = (
    "lachesis_v0",
    "lachesis_v1",
    "linear",
    "quadratic",
    "seasonal_naive",
    "phase1_stat",
)

PHASE1_NOTE = (
    "phase1_stat is a stand-in threshold model (per-slot mean + 3 std); "
    "the production phase-1 system it is compared against is external."
)

MINUTES_PER_DAY = 1440


@dataclass
class IngestReport:
    """Outcome of one ingest pass."""

    accepted: int = 0
    duplicates: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)
    nodes: list[str] = field(default_factory=list)

    @property
    def rejection_rate(self) -> float:
        total = self.accepted + len(self.rejected)
        return len(self.rejected) / total if total else 0.0


@dataclass
class RunConfig:
    """Everything needed to reproduce one experiment run."""

    models: tuple[str, ...] = ("lachesis_v0", "lachesis_v1")
    anchor: date | None = None
    seed: int = 0
    params: ForecastParams = field(default_factory=ForecastParams)
    run_id: str | None = None

    def resolved_run_id(self, anchor: date) -> str:
        return self.run_id or f"run-{anchor.isoformat()}-s{self.seed}"


def _parse_csv_row(line: str) -> tuple[str, str, str]:
    parts = line.split(",")
    if len(parts) != 3:
        raise ValueError(f"expected 3 comma-separated fields, got {len(parts)}")
    return parts[0].strip(), parts[1].strip(), parts[2].strip()


def _parse_jsonl_row(line: str) -> tuple[str, str, str]:
    row = json.loads(line)
    try:
        return str(row["node_id"]), str(row["timestamp"]), str(row["count"])
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]}") from exc


def ingest(path, store: Store) -> IngestReport:
    """Validate and normalize a series file into the store.

    Bad rows are logged with their line numbers and skipped; more than 10%
    rejected aborts the whole ingest. Duplicate (node, timestamp) pairs are
    summed with a warning.
    """
    path = Path(path)
    if not path.exists():
        raise NotFound(f"series file {path} does not exist")

    is_jsonl = path.suffix in (".jsonl", ".ndjson")
    parse_row = _parse_jsonl_row if is_jsonl else _parse_csv_row

    report = IngestReport()
    merged: dict[str, dict] = {}
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line_no == 1 and not is_jsonl and line.lower().startswith("node_id"):
                continue
            try:
                node, ts_raw, count_raw = parse_row(line)
                if not node:
                    raise ValueError("empty node_id")
                ts = parse_timestamp(ts_raw)
                count = int(count_raw)
                if count < 0:
                    raise ValueError(f"count must be >= 0, got {count}")
            except (ValueError, json.JSONDecodeError) as exc:
                report.rejected.append((line_no, str(exc)))
                logger.warning("ingest: rejected line %d: %s", line_no, exc)
                continue

            node_map = merged.setdefault(node, {})
            if ts in node_map:
                report.duplicates += 1
                logger.warning(
                    "ingest: duplicate (%s, %s) at line %d, counts summed",
                    node,
                    ts.isoformat(),
                    line_no,
                )
            node_map[ts] = node_map.get(ts, 0) + count
            report.accepted += 1

    if report.rejection_rate > 0.10:
        raise ValidationFailure(
            f"{len(report.rejected)} of {report.accepted + len(report.rejected)} "
            f"rows rejected (> 10%), ingest aborted"
        )

    for node in sorted(merged):
        series = EventSeries.build(node, merged[node].items())
        store.write_series(series)
        report.nodes.append(node)
    return report


def ingest_events(path, store: Store) -> int:
    """Load a ground-truth event JSONL file into the store.

    Rows need node_id and timestamp; kind defaults to "loop_detected".
    Returns the number of events written.
    """
    path = Path(path)
    if not path.exists():
        raise NotFound(f"events file {path} does not exist")
    events = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                events.append(
                    GroundTruthEvent(
                        node_id=row["node_id"],
                        timestamp=parse_timestamp(row["timestamp"]),
                        kind=row.get("kind", "loop_detected"),
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ValidationFailure(f"bad event row at line {line_no}: {exc}")
    store.write_events(events)
    return len(events)


def build_model(name: str, config: RunConfig):
    """Instantiate one forecaster by registry name."""
    p = config.params
    common = dict(
        tau_minutes=p.tau_minutes,
        forecast_mode=p.forecast_mode,
        epsilon=p.epsilon,
        theta=p.theta,
        kernel=p.kernel,
        bandwidth=p.bandwidth,
        dbscan_eps=p.dbscan_eps,
        dbscan_min_samples=p.dbscan_min_samples,
        c=p.c,
        history_days=p.history_days,
        horizon_days=p.horizon_days,
        seed=config.seed,
    )
    if name == "lachesis_v0":
        return LachesisV0(**common)
    if name == "lachesis_v1":
        return LachesisV1(**common)
    if name in ("linear", "quadratic", "seasonal_naive", "phase1_stat"):
        return BaselineForecaster(kind=name, tau_minutes=p.tau_minutes)
    raise InvalidParams(f"unknown model {name!r}, expected one of {MODEL_NAMES}")


def _resolve_anchor(store: Store, config: RunConfig, nodes: list[str]) -> date:
    if config.anchor is not None:
        return config.anchor
    last = max(store.read_series(node).last_date for node in nodes)
    return last + timedelta(days=1)


def run_experiment(store: Store, config: RunConfig) -> dict:
    """Train and infer every configured model on every stored node.

    Persists one forecast artifact per (model, node) plus a manifest with
    wall-clock timings in absolute, per-1k-datapoint, and per-1k-node
    normalizations. Evaluation runs separately.
    """
    for name in config.models:
        if name not in MODEL_NAMES:
            raise InvalidParams(f"unknown model {name!r}, expected one of {MODEL_NAMES}")
    nodes = store.list_nodes()
    if not nodes:
        raise NotFound("store has no ingested series")

    params = config.params.validate()
    anchor = _resolve_anchor(store, config, nodes)
    run_id = config.resolved_run_id(anchor)

    timings: dict[str, dict] = {}
    skipped: dict[str, list[dict]] = {}
    for name in config.models:
        t_train = 0.0
        t_infer = 0.0
        done = 0
        for node in nodes:
            series = store.read_series(node)
            model = build_model(name, config)
            begin = time.perf_counter()
            try:
                model.fit(series, anchor)
            except InsufficientHistory as exc:
                logger.warning("run %s: %s skipped for %s: %s", run_id, name, node, exc)
                skipped.setdefault(name, []).append({"node": node, "reason": str(exc)})
                continue
            mid = time.perf_counter()
            forecast = model.predict()
            t_infer += time.perf_counter() - mid
            t_train += mid - begin
            store.write_forecast(run_id, name, forecast)
            done += 1

        train_points = done * params.history_days * MINUTES_PER_DAY
        infer_points = done * params.horizon_days * MINUTES_PER_DAY
        timings[name] = {
            "nodes": done,
            "t_train_s": t_train,
            "t_infer_s": t_infer,
            "train_points": train_points,
            "infer_points": infer_points,
            "t_train_per_1k_points": t_train / (train_points / 1000) if train_points else 0.0,
            "t_infer_per_1k_points": t_infer / (infer_points / 1000) if infer_points else 0.0,
            "t_train_per_1k_nodes": t_train / (done / 1000) if done else 0.0,
            "t_infer_per_1k_nodes": t_infer / (done / 1000) if done else 0.0,
        }

    manifest = {
        "run_id": run_id,
        "models": list(config.models),
        "nodes": nodes,
        "skipped": skipped,
        "seed": config.seed,
        "params": {
            "tau_minutes": params.tau_minutes,
            "forecast_mode": params.forecast_mode,
            "epsilon": params.epsilon,
            "theta": params.theta,
            "kernel": params.kernel,
            "bandwidth": params.bandwidth,
            "dbscan_eps": params.dbscan_eps,
            "dbscan_min_samples": params.dbscan_min_samples,
            "c": params.resolved_c(),
            "history_days": params.history_days,
            "horizon_days": params.horizon_days,
        },
        "train_window": {
            "start": (anchor - timedelta(days=params.history_days)).isoformat(),
            "end": (anchor - timedelta(days=1)).isoformat(),
        },
        "horizon": {
            "start": anchor.isoformat(),
            "end": (anchor + timedelta(days=params.horizon_days - 1)).isoformat(),
        },
        "timings": timings,
    }
    store.write_manifest(run_id, manifest)
    return manifest


def horizon_actuals(
    store: Store, nodes: list[str], anchor: date, horizon_days: int, tau: int
) -> dict[str, dict[tuple[date, int], float]]:
    end = anchor + timedelta(days=horizon_days - 1)
    keys = horizon_keys(anchor, tau, horizon_days)
    actuals = {}
    for node in nodes:
        series = store.read_series(node)
        window = series.window(anchor, end)
        if len(window) == 0:
            actuals[node] = {k: 0.0 for k in keys}
            continue
        totals = bucketize(window, tau, span=(anchor, end)).totals()
        actuals[node] = {k: float(totals.get(k, 0)) for k in keys}
    return actuals


def _events_in_span(
    events: list[GroundTruthEvent], anchor: date, horizon_days: int
) -> list[GroundTruthEvent]:
    start = bucket_start(anchor, 0)
    end = start + timedelta(days=horizon_days)
    return [e for e in events if start <= e.timestamp < end]


def _detected_events(
    alerts: list[Alert],
    events: list[GroundTruthEvent],
    tau: int,
    window_minutes: int = 60,
) -> int:
    """Events with at least one alerted bucket start within the window."""
    spans: dict[str, list[tuple]] = {}
    for alert in alerts:
        spans.setdefault(alert.node_id, []).append((alert.start, alert.end))

    window = timedelta(minutes=window_minutes)
    width = timedelta(minutes=tau)
    detected = 0
    for event in events:
        for span_start, span_end in spans.get(event.node_id, []):
            last_bucket = span_end - width
            if span_start - window <= event.timestamp <= last_bucket + window:
                detected += 1
                break
    return detected


def _apply_feedback(
    confusion: ConfusionCounts,
    alerts: list[Alert],
    labels: dict[str, FeedbackLabel],
    events: list[GroundTruthEvent],
    tau: int,
    window_minutes: int = 60,
) -> tuple[ConfusionCounts, int]:
    """Reclassify the cells of labeled alerts per the operator's verdict."""
    times: dict[str, list] = {}
    for event in events:
        times.setdefault(event.node_id, []).append(event.timestamp)
    for value in times.values():
        value.sort()

    window = timedelta(minutes=window_minutes)
    tp, fp = confusion.tp, confusion.fp
    applied = 0
    for alert in alerts:
        label = labels.get(alert.id)
        if label is None:
            continue
        applied += 1
        node_times = times.get(alert.node_id, [])
        t = alert.start
        while t < alert.end:
            hit = bool(node_times) and bisect_right(node_times, t + window) > bisect_left(
                node_times, t - window
            )
            if label.label == "true_positive" and not hit:
                tp += 1
                fp -= 1
            elif label.label == "false_positive" and hit:
                fp += 1
                tp -= 1
            t += timedelta(minutes=tau)
    return ConfusionCounts(tp, fp, confusion.tn, confusion.fn), applied


def evaluate_run(store: Store, run_id: str, with_feedback: bool = True) -> dict:
    """Score a stored run: regression, alerts, confusion, and aggregates.

    Pure over the stored artifacts: evaluating twice yields the identical
    report. Feedback labels, when present, override the automatic
    classification of the labeled alerts' cells.
    """
    manifest = store.read_manifest(run_id)
    anchor = date.fromisoformat(manifest["horizon"]["start"])
    params = manifest["params"]
    tau = int(params["tau_minutes"])
    horizon_days = int(params["horizon_days"])

    nodes = manifest["nodes"]
    actuals = horizon_actuals(store, nodes, anchor, horizon_days, tau)
    events = _events_in_span(store.read_events(), anchor, horizon_days)
    labels = store.read_feedback() if with_feedback else {}

    report: dict = {
        "run_id": run_id,
        "horizon": manifest["horizon"],
        "events_in_span": len(events),
        "models": {},
        "notes": [],
    }
    if "phase1_stat" in manifest["models"]:
        report["notes"].append(PHASE1_NOTE)

    for model_name in manifest["models"]:
        skipped = {entry["node"] for entry in manifest["skipped"].get(model_name, [])}
        covered = [n for n in nodes if n not in skipped]

        predictions = []
        actual_vec = []
        alerts: list[Alert] = []
        grid: dict[str, list[tuple[date, int]]] = {}
        for node in covered:
            forecast = store.read_forecast(run_id, model_name, node)
            keys = forecast.sorted_keys()
            grid[node] = keys
            predictions.extend(forecast.values[k] for k in keys)
            actual_vec.extend(actuals[node][k] for k in keys)
            alerts.extend(
                generate_alerts(
                    actuals[node], forecast, id_prefix=f"{run_id}:{model_name}:"
                )
            )

        if not covered:
            report["models"][model_name] = {"skipped_nodes": sorted(skipped)}
            continue

        regression = regression_metrics(predictions, actual_vec)
        confusion = match_confusion(alerts, events, grid)
        confusion, applied = _apply_feedback(
            confusion, alerts, labels, events, tau
        )
        stats = alert_stats(alerts, span_days=horizon_days, span_start=anchor)
        detected = _detected_events(alerts, events, tau)

        report["models"][model_name] = {
            "regression": {
                "mse": regression.mse,
                "rmse": regression.rmse,
                "mae": regression.mae,
            },
            "confusion": {
                "tp": confusion.tp,
                "fp": confusion.fp,
                "tn": confusion.tn,
                "fn": confusion.fn,
            },
            "classification": classification_metrics(confusion),
            "alerts": {
                "total_alerts": stats.total_alerts,
                "avg_daily_alerts": stats.avg_daily_alerts,
                "avg_daily_alerted_nodes": stats.avg_daily_alerted_nodes,
                "avg_duration_minutes": stats.avg_duration_minutes,
                "std_duration_minutes": stats.std_duration_minutes,
                "avg_alerts_per_hour": stats.avg_alerts_per_hour,
                "std_alerts_per_hour": stats.std_alerts_per_hour,
            },
            "event_detection": {
                "detected": detected,
                "total": len(events),
                "rate": detected / len(events) if events else None,
            },
            "feedback_applied": applied,
            "skipped_nodes": sorted(skipped),
        }
    return report


REPORT_ROWS = [
    ("MSE", "regression", "mse"),
    ("RMSE", "regression", "rmse"),
    ("MAE", "regression", "mae"),
    ("Accuracy", "classification", "accuracy"),
    ("Precision", "classification", "precision"),
    ("Recall", "classification", "recall"),
    ("Specificity", "classification", "specificity"),
    ("Balanced accuracy", "classification", "balanced_accuracy"),
    ("True positives", "confusion", "tp"),
    ("False positives", "confusion", "fp"),
    ("True negatives", "confusion", "tn"),
    ("False negatives", "confusion", "fn"),
    ("Total alerts", "alerts", "total_alerts"),
    ("Avg alerts/day", "alerts", "avg_daily_alerts"),
    ("Avg alerted nodes/day", "alerts", "avg_daily_alerted_nodes"),
    ("Avg alert duration (min)", "alerts", "avg_duration_minutes"),
    ("Std alert duration (min)", "alerts", "std_duration_minutes"),
    ("Avg alerts/hour", "alerts", "avg_alerts_per_hour"),
    ("Std alerts/hour", "alerts", "std_alerts_per_hour"),
]


def _format_value(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def render_report(evaluation: dict) -> tuple[str, str]:
    """Render an evaluation as (human-readable table, CSV)."""
    models = [m for m, body in evaluation["models"].items() if "regression" in body]
    header = ["metric"] + models

    csv_lines = [",".join(header)]
    rows = []
    for label, section, key in REPORT_ROWS:
        cells = []
        for model in models:
            value = evaluation["models"][model][section][key]
            cells.append(_format_value(value))
        csv_lines.append(",".join([label] + cells))
        rows.append((label, cells))

    width = max(len(label) for label, _ in rows) + 2
    col = max(
        max((len(c) for _, cs in rows for c in cs), default=8),
        max((len(m) for m in models), default=8),
        10,
    ) + 2
    lines = [f"Run {evaluation['run_id']} (horizon {evaluation['horizon']['start']}"
             f" to {evaluation['horizon']['end']})"]
    lines.append("".ljust(width) + "".join(m.ljust(col) for m in models))
    for label, cells in rows:
        lines.append(label.ljust(width) + "".join(c.ljust(col) for c in cells))
    for note in evaluation.get("notes", []):
        lines.append(f"note: {note}")
    return "\n".join(lines), "\n".join(csv_lines) + "\n"
