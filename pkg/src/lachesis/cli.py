"""Command-line entry point for the full pipeline.

Exit codes: 0 on success, 1 when validation or data requirements fail,
2 on bad arguments.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from datetime import date, timedelta
from pathlib import Path

from .characterization import characterize
from .config import load_config
from .datagen import SynthSpec, generate
from .errors import InvalidParams, LachesisError
from .forecasters import tune_c
from .pipeline import (
    MODEL_NAMES,
    evaluate_run,
    ingest,
    ingest_events,
    render_report,
    run_experiment,
)
from .store import Store

logger = logging.getLogger(__name__)

PROFILE_PRESETS = ("flat", "diurnal", "single_peak")


def preset_profile(name: str, scale: float) -> tuple[float, ...]:
    """Built-in weekly base-rate shapes (per-minute rates per hour)."""
    if name == "flat":
        return tuple([scale] * 168)
    if name == "single_peak":
        profile = [0.0] * 168
        profile[2 * 24 + 12] = scale
        return tuple(profile)
    if name == "diurnal":
        profile = []
        for hour in range(168):
            hod = hour % 24
            bump = max(0.0, math.sin(math.pi * (hod - 6) / 12.0))
            profile.append(scale * (0.2 + 0.8 * bump))
        return tuple(profile)
    raise InvalidParams(f"unknown profile {name!r}, expected one of {PROFILE_PRESETS}")


def _cmd_ingest(args) -> int:
    store = Store(args.store).initialize()
    if args.events:
        written = ingest_events(args.path, store)
        print(f"ingested {written} ground-truth events")
        return 0
    report = ingest(args.path, store)
    print(
        f"ingested {report.accepted} rows into {len(report.nodes)} node series "
        f"({len(report.rejected)} rejected, {report.duplicates} duplicates merged)"
    )
    return 0


def _cmd_datagen(args) -> int:
    if args.profile_json:
        profile = tuple(json.loads(Path(args.profile_json).read_text()))
    else:
        profile = preset_profile(args.profile, args.scale)
    spec = SynthSpec(
        node_count=args.nodes,
        days=args.days,
        weekly_profile=profile,
        noise=args.noise,
        burst_rate=args.burst_rate,
        burst_magnitude=args.burst_magnitude,
        seed=args.seed,
        start=date.fromisoformat(args.start),
        node_prefix=args.node_prefix,
    )
    corpus = generate(spec)

    series_path = Path(args.out_series)
    series_path.parent.mkdir(parents=True, exist_ok=True)
    with series_path.open("w", encoding="utf-8") as fh:
        fh.write("node_id,timestamp,count\n")
        for series in corpus.series:
            for record in series:
                ts = record.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ")
                fh.write(f"{record.node_id},{ts},{record.count}\n")

    events_path = Path(args.out_events)
    events_path.parent.mkdir(parents=True, exist_ok=True)
    with events_path.open("w", encoding="utf-8") as fh:
        for event in corpus.events:
            row = {
                "node_id": event.node_id,
                "timestamp": event.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "kind": event.kind,
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    total_records = sum(len(s) for s in corpus.series)
    print(
        f"wrote {total_records} records for {len(corpus.series)} nodes to "
        f"{series_path} and {len(corpus.events)} events to {events_path}"
    )
    return 0


def _cmd_characterize(args) -> int:
    store = Store(args.store)
    nodes = store.list_nodes()
    if not nodes:
        print("store has no ingested series", file=sys.stderr)
        return 1
    histories = {node: store.read_series(node) for node in nodes}
    profiles = characterize(histories, tau_minutes=args.tau)

    header = f"{'node':24} {'kpss':>8} {'stationarity':13} {'volatility':>10} {'band':7} {'periodicity'}"
    print(header)
    for node in nodes:
        p = profiles[node]
        print(
            f"{node:24} {p.kpss_stat:8.4f} {p.stationarity_label:13} "
            f"{p.volatility:10.4f} {p.volatility_label:7} {p.periodicity_label}"
        )
    return 0


def _cmd_forecast(args) -> int:
    config = load_config(args.config)
    if args.models:
        config.models = tuple(args.models.split(","))
    if args.anchor:
        config.anchor = date.fromisoformat(args.anchor)
    if args.seed is not None:
        config.seed = args.seed
    if args.run_id:
        config.run_id = args.run_id

    store = Store(args.store)
    manifest = run_experiment(store, config)
    print(f"run {manifest['run_id']} complete")
    for model, timing in manifest["timings"].items():
        print(
            f"  {model}: {timing['nodes']} nodes, "
            f"train {timing['t_train_s']:.2f}s "
            f"({timing['t_train_per_1k_points']:.4f}s/1k pts), "
            f"infer {timing['t_infer_s']:.2f}s "
            f"({timing['t_infer_per_1k_points']:.4f}s/1k pts)"
        )
    return 0


def _cmd_evaluate(args) -> int:
    store = Store(args.store)
    report = evaluate_run(store, args.run, with_feedback=not args.no_feedback)
    store.write_evaluation(args.run, report)
    print(f"evaluated run {args.run} ({report['events_in_span']} events in span)")
    for model, body in report["models"].items():
        if "regression" not in body:
            print(f"  {model}: skipped for all nodes")
            continue
        detection = body["event_detection"]
        rate = "n/a" if detection["rate"] is None else f"{detection['rate']:.0%}"
        print(
            f"  {model}: rmse {body['regression']['rmse']:.2f}, "
            f"alerts {body['alerts']['total_alerts']}, detection {rate}"
        )
    return 0


def _cmd_report(args) -> int:
    store = Store(args.store)
    evaluation = evaluate_run(store, args.run, with_feedback=True)
    table, csv_text = render_report(evaluation)
    print(table)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
        print(f"csv written to {args.csv}")
    return 0


def _cmd_tune_c(args) -> int:
    store = Store(args.store)
    series = store.read_series(args.node)
    split = (
        date.fromisoformat(args.anchor)
        if args.anchor
        else series.last_date - timedelta(days=6)
    )
    train = series.window(series.first_date, split - timedelta(days=1))
    validation = series.window(split, split + timedelta(days=6))
    best = tune_c(train, validation)
    print(f"best c for {args.node}: {best}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.store, host=args.host, port=args.port, frontend_dir=args.frontend)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lachesis",
        description="Forecasting and alerting toolkit for per-node event-count telemetry",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a series file into the store")
    p.add_argument("path", help="CSV or JSONL file with node_id,timestamp,count rows")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument(
        "--events",
        action="store_true",
        help="treat the file as ground-truth event JSONL instead of a series",
    )
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("datagen", help="generate a synthetic corpus")
    p.add_argument("--out-series", required=True, help="output series CSV path")
    p.add_argument("--out-events", required=True, help="output ground-truth JSONL path")
    p.add_argument("--nodes", type=int, default=10)
    p.add_argument("--days", type=int, default=42)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", choices=("poisson", "gaussian", "none"), default="poisson")
    p.add_argument("--burst-rate", type=float, default=0.0, help="bursts per week")
    p.add_argument("--burst-magnitude", type=float, default=10.0)
    p.add_argument("--profile", choices=PROFILE_PRESETS, default="diurnal")
    p.add_argument("--scale", type=float, default=1.0, help="profile peak rate per minute")
    p.add_argument("--profile-json", help="JSON file with a 168-entry rate vector")
    p.add_argument("--start", default="2025-01-06", help="corpus start date (a Monday)")
    p.add_argument("--node-prefix", default="node-")
    p.set_defaults(func=_cmd_datagen)

    p = sub.add_parser("characterize", help="label stored nodes by temporal behavior")
    p.add_argument("--store", required=True)
    p.add_argument("--tau", type=int, default=60)
    p.set_defaults(func=_cmd_characterize)

    p = sub.add_parser("forecast", help="train and infer all configured models")
    p.add_argument("--store", required=True)
    p.add_argument("--config", help="TOML config path")
    p.add_argument("--models", help=f"comma-separated subset of {', '.join(MODEL_NAMES)}")
    p.add_argument("--anchor", help="horizon start date (YYYY-MM-DD)")
    p.add_argument("--seed", type=int)
    p.add_argument("--run-id")
    p.set_defaults(func=_cmd_forecast)

    p = sub.add_parser("evaluate", help="score a stored run")
    p.add_argument("--store", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--no-feedback", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render the metric table for a run")
    p.add_argument("--store", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("tune-c", help="grid-search the threshold scale for one node")
    p.add_argument("--store", required=True)
    p.add_argument("--node", required=True)
    p.add_argument("--anchor", help="validation week start (default: last 7 days)")
    p.set_defaults(func=_cmd_tune_c)

    p = sub.add_parser("serve", help="run the feedback HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--frontend", help="directory of dashboard static files")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return args.func(args)
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LachesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
