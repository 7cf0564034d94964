"""Temporal characterization of nodes: stationarity, volatility, periodicity.

Nodes are labeled along three axes so evaluation can be sliced by behavior
class: a stationarity label combining a KPSS level test with a segmented
mean-variance check, a volatility score clustered into low/medium/high
across the fleet, and a per-slot recurrence score summarizing how
repeatable weekly behavior is.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData
from .model import BucketedSeries, EventSeries, TimeBucketKey, bucketize, slot_sequence

KPSS_CRITICAL_5PCT = 0.463
RECURRENCE_HIGH_THRESHOLD = 0.8
MEAN_SHIFT_FACTOR = 0.5
VARIANCE_RATIO_LIMIT = 4.0
MIN_OBSERVATIONS = 10

VOLATILITY_LABELS = ("low", "medium", "high")


@dataclass(frozen=True)
class TemporalProfile:
    """One node's stationarity, volatility, and periodicity summary."""

    node_id: str
    kpss_stat: float
    kpss_stationary: bool
    mv_stationary: bool
    stationarity_label: str
    volatility: float
    volatility_label: str
    recurrence: dict[TimeBucketKey, float]
    periodicity_label: str


def _as_totals(history, tau_minutes: int = 60) -> np.ndarray:
    if isinstance(history, EventSeries):
        return bucketize(history, tau_minutes).total_vector()
    if isinstance(history, BucketedSeries):
        return history.total_vector()
    return np.asarray(history, dtype=float).ravel()


def kpss_statistic(series, tau_minutes: int = 60) -> tuple[float, bool]:
    """Level-stationarity KPSS statistic and its 5% verdict.

    Uses a Bartlett-window long-run variance with the customary lag
    floor(4 * (n/100)^0.25). A constant series has zero residual energy
    and is stationary by convention (statistic 0).
    """
    x = _as_totals(series, tau_minutes)
    n = x.size
    if n < MIN_OBSERVATIONS:
        raise InsufficientData(f"need >= {MIN_OBSERVATIONS} observations, got {n}")

    residuals = x - x.mean()
    partial = np.cumsum(residuals)
    numerator = float((partial**2).sum()) / n**2

    lag = int(math.floor(4.0 * (n / 100.0) ** 0.25))
    variance = float((residuals**2).sum()) / n
    for j in range(1, lag + 1):
        gamma = float((residuals[j:] * residuals[:-j]).sum()) / n
        variance += 2.0 * (1.0 - j / (lag + 1.0)) * gamma

    if variance <= 0:
        return 0.0, True
    stat = numerator / variance
    return stat, stat < KPSS_CRITICAL_5PCT


def mean_variance_test(series, tau_minutes: int = 60) -> bool:
    """Segmented stability check over five equal slices.

    Passes when no segment mean strays more than half a global standard
    deviation from the global mean and the segment variance spread stays
    within a 4x ratio (with +1 damping for near-zero variances).
    """
    x = _as_totals(series, tau_minutes)
    if x.size < MIN_OBSERVATIONS:
        raise InsufficientData(
            f"need >= {MIN_OBSERVATIONS} observations, got {x.size}"
        )

    segments = np.array_split(x, 5)
    global_mean = x.mean()
    global_std = x.std()
    mean_shift = max(abs(seg.mean() - global_mean) for seg in segments)
    variances = [seg.var() for seg in segments]
    ratio = max(variances) / (min(variances) + 1.0)
    return mean_shift <= MEAN_SHIFT_FACTOR * global_std and ratio <= VARIANCE_RATIO_LIMIT


def volatility(history, tau_minutes: int = 60) -> float:
    """Log-difference volatility score of per-bucket totals.

    Population standard deviation of the forward differences of
    ln(totals + 1), scaled by the square root of the difference count.
    """
    totals = _as_totals(history, tau_minutes)
    if totals.size < 2:
        raise InsufficientData(f"need >= 2 bucket totals, got {totals.size}")
    diffs = np.diff(np.log(totals + 1.0))
    return float(diffs.std() * np.sqrt(diffs.size))


def _kmeans_1d(values: np.ndarray, k: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with deterministic quantile initialization."""
    centroids = np.quantile(values, [(2 * i + 1) / (2 * k) for i in range(k)])
    assignment = np.zeros(values.size, dtype=int)
    for _ in range(100):
        distances = np.abs(values[:, None] - centroids[None, :])
        assignment = distances.argmin(axis=1)
        updated = centroids.copy()
        for i in range(k):
            members = values[assignment == i]
            if members.size:
                updated[i] = members.mean()
        if np.abs(updated - centroids).max() < 1e-9:
            centroids = updated
            break
        centroids = updated
    return centroids, assignment


def volatility_clusters(scores: dict[str, float]) -> dict[str, str]:
    """Cluster volatility scores into low/medium/high across nodes.

    One-dimensional k=3 K-means with quantile initialization; labels
    follow ascending centroid order so the mapping is permutation-stable.
    """
    if len(scores) < 3:
        raise InsufficientData(f"need >= 3 nodes, got {len(scores)}")

    nodes = sorted(scores)
    values = np.array([scores[n] for n in nodes], dtype=float)
    centroids, assignment = _kmeans_1d(values, k=3)
    rank_of_cluster = {
        cluster: rank for rank, cluster in enumerate(np.argsort(centroids, kind="stable"))
    }
    return {
        node: VOLATILITY_LABELS[rank_of_cluster[cluster]]
        for node, cluster in zip(nodes, assignment)
    }


def recurrence_score(spread: float, mode_probability: float) -> float:
    """Recurrence of a slot's behavior: 1 / (1 + 2 * spread * mode probability)."""
    return 1.0 / (1.0 + 2.0 * spread * mode_probability)


def periodicity(bucketed: BucketedSeries) -> dict[TimeBucketKey, float]:
    """Recurrence score per weekday/slot from totals across weeks.

    The mode probability is the relative frequency of the most common
    total in the slot's multiset; the spread is its population standard
    deviation. Slots with no observed buckets score 1 (no evidence of
    variation).
    """
    grouped: dict[TimeBucketKey, list[int]] = {}
    for (day, slot) in bucketed.sorted_keys():
        key = TimeBucketKey(day.weekday(), slot)
        grouped.setdefault(key, []).append(int(bucketed.buckets[(day, slot)].sum()))

    out: dict[TimeBucketKey, float] = {}
    for weekday in range(7):
        for slot in slot_sequence(bucketed.tau_minutes):
            key = TimeBucketKey(weekday, slot)
            members = grouped.get(key)
            if not members:
                out[key] = 1.0
                continue
            counts = Counter(members)
            mode_probability = max(counts.values()) / len(members)
            spread = float(np.asarray(members, dtype=float).std())
            out[key] = recurrence_score(spread, mode_probability)
    return out


def periodicity_label(
    recurrence: dict[TimeBucketKey, float],
    threshold: float = RECURRENCE_HIGH_THRESHOLD,
) -> str:
    """"high" when the median recurrence reaches the threshold (inclusive)."""
    if not recurrence:
        raise InsufficientData("recurrence map is empty")
    median = float(np.median(list(recurrence.values())))
    return "high" if median >= threshold else "other"


def characterize(
    histories: dict[str, EventSeries], tau_minutes: int = 60
) -> dict[str, TemporalProfile]:
    """Assemble the full temporal profile for every node.

    Volatility labels need a fleet-wide clustering; with fewer than 3
    nodes every node is labeled low rather than failing the whole run.
    """
    totals = {}
    bucketed = {}
    for node, series in histories.items():
        b = bucketize(series, tau_minutes)
        bucketed[node] = b
        totals[node] = b.total_vector()

    scores = {node: volatility(vec) for node, vec in totals.items()}
    if len(scores) >= 3:
        labels = volatility_clusters(scores)
    else:
        labels = {node: "low" for node in scores}

    profiles = {}
    for node, series in histories.items():
        stat, kpss_ok = kpss_statistic(totals[node])
        mv_ok = mean_variance_test(totals[node])
        recurrence = periodicity(bucketed[node])
        profiles[node] = TemporalProfile(
            node_id=node,
            kpss_stat=stat,
            kpss_stationary=kpss_ok,
            mv_stationary=mv_ok,
            stationarity_label="high" if (kpss_ok and mv_ok) else "other",
            volatility=scores[node],
            volatility_label=labels[node],
            recurrence=recurrence,
            periodicity_label=periodicity_label(recurrence),
        )
    return profiles
