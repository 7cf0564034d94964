"""Forecasting, characterization, and alerting for per-node event-count telemetry."""

from .alerting import (
    Alert,
    AlertStats,
    ConfusionCounts,
    RegressionMetrics,
    alert_stats,
    classification_metrics,
    generate_alerts,
    match_confusion,
    regression_metrics,
)
from .baselines import (
    BASELINE_KINDS,
    BaselineForecaster,
    linear_forecast,
    phase1_threshold,
    quadratic_forecast,
    seasonal_naive_forecast,
)
from .characterization import (
    TemporalProfile,
    characterize,
    kpss_statistic,
    mean_variance_test,
    periodicity,
    recurrence_score,
    volatility,
    volatility_clusters,
)
from .config import load_config
from .datagen import SynthCorpus, SynthSpec, generate
from .density import DensityModel, density_estimate
from .errors import (
    DegenerateInput,
    EmptyGroup,
    EmptyInput,
    InsufficientData,
    InsufficientHistory,
    InvalidParams,
    InvalidRange,
    LachesisError,
    NoCluster,
    NotFound,
    ValidationFailure,
)
from .forecasters import LachesisV0, LachesisV1, forecast_v0, tune_c
from .model import (
    BucketedSeries,
    EventRecord,
    EventSeries,
    Forecast,
    ForecastParams,
    GroundTruthEvent,
    TimeBucketKey,
    bucketize,
    split_history,
)
from .particles import ParticleSet, draw_particles, particle_predict
from .pipeline import (
    IngestReport,
    RunConfig,
    evaluate_run,
    ingest,
    render_report,
    run_experiment,
)
from .refine import RefinementInputs, RefinementTrace, refine_forecast
from .spectral import (
    power_spectral_density,
    principal_subspace,
    select_cluster,
    significant_frequencies,
    spectral_transform,
)
from .store import FeedbackLabel, Store, canonical_json

__version__ = "0.1.0"

__all__ = [
    "Alert",
    "AlertStats",
    "BASELINE_KINDS",
    "BaselineForecaster",
    "BucketedSeries",
    "ConfusionCounts",
    "DegenerateInput",
    "DensityModel",
    "EmptyGroup",
    "EmptyInput",
    "EventRecord",
    "EventSeries",
    "FeedbackLabel",
    "Forecast",
    "ForecastParams",
    "GroundTruthEvent",
    "IngestReport",
    "InsufficientData",
    "InsufficientHistory",
    "InvalidParams",
    "InvalidRange",
    "LachesisError",
    "LachesisV0",
    "LachesisV1",
    "NoCluster",
    "NotFound",
    "ParticleSet",
    "RefinementInputs",
    "RefinementTrace",
    "RegressionMetrics",
    "RunConfig",
    "Store",
    "SynthCorpus",
    "SynthSpec",
    "TemporalProfile",
    "TimeBucketKey",
    "ValidationFailure",
    "alert_stats",
    "bucketize",
    "canonical_json",
    "characterize",
    "classification_metrics",
    "density_estimate",
    "draw_particles",
    "evaluate_run",
    "forecast_v0",
    "generate",
    "generate_alerts",
    "ingest",
    "kpss_statistic",
    "linear_forecast",
    "load_config",
    "match_confusion",
    "mean_variance_test",
    "particle_predict",
    "periodicity",
    "phase1_threshold",
    "power_spectral_density",
    "principal_subspace",
    "quadratic_forecast",
    "recurrence_score",
    "refine_forecast",
    "regression_metrics",
    "render_report",
    "run_experiment",
    "seasonal_naive_forecast",
    "select_cluster",
    "significant_frequencies",
    "spectral_transform",
    "split_history",
    "tune_c",
    "volatility",
    "volatility_clusters",
]
