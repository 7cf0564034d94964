"""Version-1 refinement of a version-0 forecast.

The refinement widens the prior prediction by how far the most recent week
drifted from the preceding four weeks, then rescales by a smoothing factor
derived from the prediction error norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import EmptyInput, InvalidParams
from .model import FORECAST_MODE, UPPER_BOUND_MODE, Forecast


@dataclass(frozen=True)
class RefinementInputs:
    """Aligned per-slot series feeding one refinement step.

    ``keys`` lists the horizon's (date, slot) grid chronologically;
    all three vectors follow that order. ``four_week_mean`` averages the
    matching weekday/slot buckets of the four older weeks, ``last_week``
    holds the most recent week's totals, ``prior_forecast`` the version-0
    prediction for the horizon.
    """

    node_id: str
    tau_minutes: int
    keys: tuple[tuple[date, int], ...]
    four_week_mean: np.ndarray
    last_week: np.ndarray
    prior_forecast: np.ndarray

    def __post_init__(self):
        n = len(self.keys)
        for name in ("four_week_mean", "last_week", "prior_forecast"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (n,):
                raise InvalidParams(f"{name} must align with keys ({n} slots)")
            if (vec < 0).any():
                raise InvalidParams(f"{name} must be non-negative")
            object.__setattr__(self, name, vec)


@dataclass(frozen=True)
class RefinementTrace:
    """Intermediate quantities of one refinement, kept for inspection."""

    deviation: np.ndarray
    covariance: float
    trend: np.ndarray
    trend_spread: float
    smoothing: float
    output: np.ndarray


def discrete_derivative(x) -> np.ndarray:
    """Forward differences, last value repeated to preserve length."""
    vec = np.asarray(x, dtype=float).ravel()
    if vec.size == 0:
        raise EmptyInput("cannot differentiate an empty vector")
    if vec.size == 1:
        return np.zeros(1)
    diffs = np.diff(vec)
    return np.append(diffs, diffs[-1])


def _smoothing_factor(last_week: np.ndarray, prior: np.ndarray) -> float:
    gap = float(np.linalg.norm(last_week - prior))
    lo = float(prior.min())
    hi = float(last_week.max())
    if hi == lo:
        return 1.0
    return abs((gap - lo) / (hi - lo))


def _digit_scale(alpha: float) -> float:
    """10 raised to the count of integer digits of alpha."""
    return 10.0 ** (math.floor(math.log10(abs(alpha))) + 1)


def refine_forecast(
    inputs: RefinementInputs, forecast_mode: bool
) -> tuple[Forecast, RefinementTrace]:
    """Refine the prior forecast against recent drift.

    The base output adds a drift radical to the prior prediction, then a
    smoothing multiplier stretches it: in forecast mode by 1 + 1/alpha,
    otherwise by 1 + alpha scaled below its leading digit. Degenerate
    smoothing factors fall back to neutral values rather than erroring.
    """
    recent = inputs.last_week
    prior = inputs.prior_forecast

    deviation = recent - inputs.four_week_mean
    covariance = float(np.cov(inputs.four_week_mean, recent, bias=True)[0, 1])
    trend = 1.0 + discrete_derivative(deviation)
    trend_spread = float(trend.std())

    radical = np.sqrt(np.abs(trend * covariance / (1.0 + trend_spread)))
    base = np.ceil(prior + radical)

    alpha = _smoothing_factor(recent, prior)
    if forecast_mode:
        if alpha == 0.0:
            alpha = 1.0
        output = np.ceil(base * (1.0 + 1.0 / alpha))
    else:
        multiplier = 1.0 if alpha == 0.0 else 1.0 + alpha / _digit_scale(alpha)
        output = np.ceil(base * multiplier)

    mode = FORECAST_MODE if forecast_mode else UPPER_BOUND_MODE
    forecast = Forecast(
        node_id=inputs.node_id,
        mode=mode,
        tau_minutes=inputs.tau_minutes,
        values={key: float(v) for key, v in zip(inputs.keys, output)},
    )
    trace = RefinementTrace(deviation, covariance, trend, trend_spread, alpha, output)
    return forecast, trace
