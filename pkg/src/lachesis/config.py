"""TOML configuration loading for the pipeline and CLI."""

from __future__ import annotations

from datetime import date
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import InvalidParams
from .model import ForecastParams
from .pipeline import RunConfig

LACHESIS_KEYS = {
    "tau_minutes",
    "forecast_mode",
    "epsilon",
    "theta",
    "kernel",
    "bandwidth",
    "dbscan_eps",
    "dbscan_min_samples",
    "c",
    "seed",
    "history_days",
    "horizon_days",
}

RUN_KEYS = {"models", "anchor", "run_id"}


def _check_keys(section: dict, allowed: set[str], name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise InvalidParams(
            f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}"
        )


def _coerce_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def load_config(path=None) -> RunConfig:
    """Build a RunConfig from a TOML file; every key is optional."""
    data: dict = {}
    if path is not None:
        with Path(path).open("rb") as fh:
            data = tomllib.load(fh)

    _check_keys(data, {"lachesis", "run"}, "root")
    section = data.get("lachesis", {})
    run = data.get("run", {})
    _check_keys(section, LACHESIS_KEYS, "lachesis")
    _check_keys(run, RUN_KEYS, "run")

    params = ForecastParams(
        tau_minutes=int(section.get("tau_minutes", 60)),
        forecast_mode=bool(section.get("forecast_mode", False)),
        epsilon=float(section.get("epsilon", 0.98)),
        theta=int(section.get("theta", 100)),
        kernel=str(section.get("kernel", "gaussian")),
        bandwidth=float(section.get("bandwidth", 0.3)),
        dbscan_eps=float(section.get("dbscan_eps", 0.1)),
        dbscan_min_samples=int(section.get("dbscan_min_samples", 15)),
        c=float(section["c"]) if "c" in section else None,
        history_days=int(section.get("history_days", 35)),
        horizon_days=int(section.get("horizon_days", 7)),
    ).validate()

    anchor = _coerce_date(run["anchor"]) if "anchor" in run else None
    models = tuple(run.get("models", ("lachesis_v0", "lachesis_v1")))
    return RunConfig(
        models=models,
        anchor=anchor,
        seed=int(section.get("seed", 0)),
        params=params,
        run_id=run.get("run_id"),
    )
