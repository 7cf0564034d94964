"""Forecasting estimators with a scikit-learn style fit/predict API.

LachesisV0 runs the spectral particle-filter chain per weekday/slot group;
LachesisV1 refines a V0 forecast against recent drift. Both are
deterministic given (seed, node_id): every slot draws from its own
generator so parallel evaluation order cannot change results.
"""

from __future__ import annotations

import hashlib
from datetime import date, timedelta

import numpy as np
from sklearn.base import BaseEstimator

from .density import density_estimate
from .errors import InsufficientHistory, InvalidParams, NoCluster
from .model import (
    FORECAST_MODE,
    UPPER_BOUND_MODE,
    BucketedSeries,
    EventSeries,
    Forecast,
    ForecastParams,
    TimeBucketKey,
    bucketize,
    horizon_keys,
    split_history,
    weekly_totals,
)
from .particles import draw_particles, particle_predict
from .refine import RefinementInputs, refine_forecast
from .spectral import (
    power_spectral_density,
    principal_subspace,
    select_cluster,
    significant_frequencies,
    spectral_transform,
    time_domain_values,
)

C_GRID = [round(1.1 + 0.1 * i, 1) for i in range(10)]


def node_slot_rng(seed: int, node_id: str, weekday: int, slot: int) -> np.random.Generator:
    """Independent generator for one node's weekday/slot group."""
    digest = hashlib.sha256(node_id.encode("utf-8")).digest()
    node_key = int.from_bytes(digest[:8], "big")
    return np.random.default_rng([seed, node_key, weekday, slot])


def _resolve_anchor(series: EventSeries, anchor: date | None) -> date:
    if anchor is not None:
        return anchor
    return series.last_date + timedelta(days=1)


def _history_window(
    series: EventSeries, anchor: date, history_days: int
) -> tuple[EventSeries, tuple[date, date]]:
    start = anchor - timedelta(days=history_days)
    end = anchor - timedelta(days=1)
    window = series.window(start, end)
    if len(window) == 0:
        raise InsufficientHistory(history_days, 0)
    available = (anchor - series.first_date).days
    if available < history_days:
        raise InsufficientHistory(history_days, max(available, 0))
    return window, (start, end)


def slot_group_values(
    bucketed: BucketedSeries, params: ForecastParams, seed: int
) -> dict[TimeBucketKey, float]:
    """Predicted value per weekday/slot group via the full spectral chain.

    Groups whose buckets hold no events at all short-circuit to 0.0: an
    always-quiet slot must forecast quiet, and the significance formula's
    additive member-count term would otherwise manufacture a small positive
    value out of pure silence.
    """
    group_totals = weekly_totals(bucketed)
    spectra = spectral_transform(bucketed)
    significant = significant_frequencies(spectra, params.resolved_c())

    values: dict[TimeBucketKey, float] = {}
    for sig in significant:
        if not any(group_totals.get(sig.key, [])):
            values[sig.key] = 0.0
            continue
        power = power_spectral_density(sig)
        subspace = principal_subspace(sig, power)
        try:
            selection = select_cluster(
                sig, power, subspace.center, params.dbscan_eps, params.dbscan_min_samples
            )
            selected = selection.selected_indices
        except NoCluster:
            selected = np.arange(sig.values.size)
        time_values = time_domain_values(sig, selected)
        model = density_estimate(time_values, params.kernel, params.bandwidth)
        rng = node_slot_rng(seed, bucketed.node_id, sig.key.weekday, sig.key.slot)
        particles = draw_particles(
            model,
            float(time_values.min()),
            float(time_values.max()),
            params.theta,
            params.epsilon,
            rng,
        )
        values[sig.key] = particle_predict(particles)
    return values


def forecast_v0(
    series: EventSeries,
    params: ForecastParams,
    rng_seed: int = 0,
    anchor: date | None = None,
) -> Forecast:
    """Spectral particle-filter forecast over the 7 days after ``anchor``."""
    params.validate()
    anchor = _resolve_anchor(series, anchor)
    history, span = _history_window(series, anchor, params.history_days)
    bucketed = bucketize(history, params.tau_minutes, span=span)
    per_slot = slot_group_values(bucketed, params, rng_seed)

    keys = horizon_keys(anchor, params.tau_minutes, params.horizon_days)
    mode = FORECAST_MODE if params.forecast_mode else UPPER_BOUND_MODE
    values = {
        (day, slot): per_slot.get(TimeBucketKey(day.weekday(), slot), 0.0)
        for day, slot in keys
    }
    return Forecast(series.node_id, mode, params.tau_minutes, values)


def tune_c(
    series: EventSeries,
    validation: EventSeries,
    params: ForecastParams | None = None,
    rng_seed: int = 0,
) -> float:
    """Grid-search c over [1.1, 2.0] minimizing upper-bound RMSE.

    The validation series must cover the 7 days following the training
    window; ties prefer the smaller c.
    """
    params = params or ForecastParams()
    anchor = _resolve_anchor(series, None)
    horizon_end = anchor + timedelta(days=params.horizon_days - 1)
    window = validation.window(anchor, horizon_end)
    if len(window) == 0 or validation.last_date < horizon_end:
        have = 0
        if len(validation) > 0:
            have = max((min(validation.last_date, horizon_end) - anchor).days + 1, 0)
        raise InsufficientHistory(params.horizon_days, have)

    keys = horizon_keys(anchor, params.tau_minutes, params.horizon_days)
    actual_buckets = bucketize(
        window, params.tau_minutes, span=(anchor, horizon_end)
    ).totals()
    actual = np.array([actual_buckets.get(k, 0) for k in keys], dtype=float)

    best_c = C_GRID[0]
    best_rmse = np.inf
    for c in C_GRID:
        trial = ForecastParams(
            tau_minutes=params.tau_minutes,
            forecast_mode=False,
            epsilon=params.epsilon,
            theta=params.theta,
            kernel=params.kernel,
            bandwidth=params.bandwidth,
            dbscan_eps=params.dbscan_eps,
            dbscan_min_samples=params.dbscan_min_samples,
            c=c,
            history_days=params.history_days,
            horizon_days=params.horizon_days,
        )
        predicted = forecast_v0(series, trial, rng_seed, anchor).as_vector()
        rmse = float(np.sqrt(np.mean((predicted - actual) ** 2)))
        if rmse < best_rmse:
            best_rmse = rmse
            best_c = c
    return best_c


class LachesisV0(BaseEstimator):
    """Spectral particle-filter forecaster.

    fit() learns per weekday/slot predictions from the trailing 35 days
    before the anchor; predict() lays them onto the 7-day horizon grid.
    """

    def __init__(
        self,
        tau_minutes: int = 60,
        forecast_mode: bool = False,
        epsilon: float = 0.98,
        theta: int = 100,
        kernel: str = "gaussian",
        bandwidth: float = 0.3,
        dbscan_eps: float = 0.1,
        dbscan_min_samples: int = 15,
        c: float | None = None,
        history_days: int = 35,
        horizon_days: int = 7,
        seed: int = 0,
    ):
        self.tau_minutes = tau_minutes
        self.forecast_mode = forecast_mode
        self.epsilon = epsilon
        self.theta = theta
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.dbscan_eps = dbscan_eps
        self.dbscan_min_samples = dbscan_min_samples
        self.c = c
        self.history_days = history_days
        self.horizon_days = horizon_days
        self.seed = seed

    def _params(self) -> ForecastParams:
        return ForecastParams(
            tau_minutes=self.tau_minutes,
            forecast_mode=self.forecast_mode,
            epsilon=self.epsilon,
            theta=self.theta,
            kernel=self.kernel,
            bandwidth=self.bandwidth,
            dbscan_eps=self.dbscan_eps,
            dbscan_min_samples=self.dbscan_min_samples,
            c=self.c,
            history_days=self.history_days,
            horizon_days=self.horizon_days,
        ).validate()

    def fit(self, series: EventSeries, anchor: date | None = None) -> "LachesisV0":
        if not isinstance(series, EventSeries):
            raise InvalidParams("fit expects an EventSeries")
        params = self._params()
        self.anchor_ = _resolve_anchor(series, anchor)
        self.node_id_ = series.node_id
        history, span = _history_window(series, self.anchor_, params.history_days)
        bucketed = bucketize(history, params.tau_minutes, span=span)
        self.slot_values_ = slot_group_values(bucketed, params, self.seed)
        return self

    def predict(self) -> Forecast:
        if not hasattr(self, "slot_values_"):
            raise InvalidParams("predict called before fit")
        params = self._params()
        keys = horizon_keys(self.anchor_, params.tau_minutes, params.horizon_days)
        mode = FORECAST_MODE if params.forecast_mode else UPPER_BOUND_MODE
        values = {
            (day, slot): self.slot_values_.get(TimeBucketKey(day.weekday(), slot), 0.0)
            for day, slot in keys
        }
        return Forecast(self.node_id_, mode, params.tau_minutes, values)


class LachesisV1(BaseEstimator):
    """Drift-refined forecaster layered on LachesisV0.

    fit() runs the V0 chain on the same window and gathers the recent-week
    deviation statistics; predict() applies the refinement and returns
    integer-valued outputs.
    """

    def __init__(
        self,
        tau_minutes: int = 60,
        forecast_mode: bool = False,
        epsilon: float = 0.98,
        theta: int = 100,
        kernel: str = "gaussian",
        bandwidth: float = 0.3,
        dbscan_eps: float = 0.1,
        dbscan_min_samples: int = 15,
        c: float | None = None,
        history_days: int = 35,
        horizon_days: int = 7,
        seed: int = 0,
    ):
        self.tau_minutes = tau_minutes
        self.forecast_mode = forecast_mode
        self.epsilon = epsilon
        self.theta = theta
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.dbscan_eps = dbscan_eps
        self.dbscan_min_samples = dbscan_min_samples
        self.c = c
        self.history_days = history_days
        self.horizon_days = horizon_days
        self.seed = seed

    def fit(self, series: EventSeries, anchor: date | None = None) -> "LachesisV1":
        if not isinstance(series, EventSeries):
            raise InvalidParams("fit expects an EventSeries")
        base = LachesisV0(**self.get_params())
        base.fit(series, anchor)
        self.anchor_ = base.anchor_
        self.node_id_ = series.node_id
        self.prior_ = base.predict()

        params = base._params()
        four_week, last_week = split_history(series, self.anchor_, params.history_days)
        q_span = (
            self.anchor_ - timedelta(days=params.history_days),
            self.anchor_ - timedelta(days=8),
        )
        s_span = (self.anchor_ - timedelta(days=7), self.anchor_ - timedelta(days=1))
        four_week_groups = (
            weekly_totals(bucketize(four_week, params.tau_minutes, span=q_span))
            if len(four_week)
            else {}
        )
        last_week_totals = (
            bucketize(last_week, params.tau_minutes, span=s_span).totals()
            if len(last_week)
            else {}
        )

        keys = tuple(horizon_keys(self.anchor_, params.tau_minutes, params.horizon_days))
        q = np.array(
            [
                float(np.mean(four_week_groups.get(TimeBucketKey(d.weekday(), s), [0])))
                for d, s in keys
            ]
        )
        s = np.array(
            [
                float(last_week_totals.get((d - timedelta(days=7), slot), 0))
                for d, slot in keys
            ]
        )
        self.inputs_ = RefinementInputs(
            node_id=series.node_id,
            tau_minutes=params.tau_minutes,
            keys=keys,
            four_week_mean=q,
            last_week=s,
            prior_forecast=self.prior_.as_vector(),
        )
        return self

    def predict(self) -> Forecast:
        if not hasattr(self, "inputs_"):
            raise InvalidParams("predict called before fit")
        forecast, self.trace_ = refine_forecast(self.inputs_, self.forecast_mode)
        return forecast
