"""Frequency-domain stage of the version-0 forecaster.

Buckets are moved to the frequency domain, same-weekday same-slot buckets
are collapsed into one significance spectrum, and the dominant frequency
cluster is picked in the (significance, power) plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np
from sklearn.cluster import DBSCAN

from .errors import DegenerateInput, EmptyGroup, NoCluster
from .model import BucketedSeries, TimeBucketKey


@dataclass(frozen=True)
class SpectrumBucket:
    """Frequency coefficients of one bucket's minute counts."""

    key: tuple[date, int]
    coefficients: np.ndarray


@dataclass(frozen=True)
class SignificantSpectrum:
    """Per-frequency significance values for one (weekday, slot) group."""

    key: TimeBucketKey
    values: np.ndarray
    member_count: int


@dataclass(frozen=True)
class PrincipalSubspace:
    """Eigenstructure of the (significance, power) covariance.

    ``center`` is the data centroid shifted by the mean of the
    eigenvalue-scaled eigenvectors; cluster selection measures
    distances against it.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    scaled_vectors: np.ndarray
    center: np.ndarray


@dataclass(frozen=True)
class ClusterSelection:
    """DBSCAN labels plus the indices of the chosen cluster."""

    labels: np.ndarray
    selected_label: int
    selected_indices: np.ndarray


def spectral_transform(bucketed: BucketedSeries) -> list[SpectrumBucket]:
    """Discrete Fourier transform of every bucket's minute-count vector."""
    return [
        SpectrumBucket(key, np.fft.fft(bucketed.buckets[key].astype(float)))
        for key in bucketed.sorted_keys()
    ]


def significant_frequencies(
    spectra: list[SpectrumBucket], c: float
) -> list[SignificantSpectrum]:
    """Collapse same-(weekday, slot) spectra into significance values.

    At each frequency index the group's coefficient magnitudes are reduced
    to sqrt(max) * |mean + 3 std| + sqrt(member count), scaled by c.
    The standard deviation uses the population divisor.
    """
    if not spectra:
        raise EmptyGroup("no spectra to reduce")

    groups: dict[TimeBucketKey, list[np.ndarray]] = {}
    for bucket in spectra:
        day, slot = bucket.key
        key = TimeBucketKey(day.weekday(), slot)
        groups.setdefault(key, []).append(np.abs(bucket.coefficients))

    out = []
    for key in sorted(groups, key=lambda k: (k.weekday, k.slot)):
        mags = np.vstack(groups[key])
        peak = mags.max(axis=0)
        mean = mags.mean(axis=0)
        spread = mags.std(axis=0)
        count = mags.shape[0]
        values = (np.sqrt(peak) * np.abs(mean + 3.0 * spread) + np.sqrt(count)) * c
        out.append(SignificantSpectrum(key, values, count))
    return out


def power_spectral_density(sig: SignificantSpectrum) -> np.ndarray:
    """Power at each frequency: squared significance over vector length."""
    values = np.asarray(sig.values, dtype=float)
    if values.size == 0:
        raise EmptyGroup("significance spectrum is empty")
    return values**2 / values.size


def principal_subspace(sig: SignificantSpectrum, power: np.ndarray) -> PrincipalSubspace:
    """Eigendecompose the 2x2 covariance of (significance, power) pairs."""
    points = np.column_stack([sig.values, power])
    if points.shape[0] < 2:
        raise DegenerateInput("need at least 2 frequency points")

    centroid = points.mean(axis=0)
    cov = np.cov(points, rowvar=False, bias=True)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    scaled = eigenvectors * eigenvalues
    center = centroid + scaled.mean(axis=1)
    return PrincipalSubspace(eigenvalues, eigenvectors, scaled, center)


def _minmax(points: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    safe = np.where(span > 0, span, 1.0)
    scaled = (points - lo) / safe
    return np.where(span > 0, scaled, 0.0)


def select_cluster(
    sig: SignificantSpectrum,
    power: np.ndarray,
    center: np.ndarray,
    eps: float,
    min_samples: int,
) -> ClusterSelection:
    """Cluster (significance, power) points and keep the one nearest ``center``.

    Both axes are min-max normalized to [0, 1] before DBSCAN so ``eps``
    is scale-free; the returned indices refer to the original points.
    """
    points = np.column_stack([sig.values, power])
    lo = points.min(axis=0)
    span = points.max(axis=0) - lo
    normalized = _minmax(points, lo, span)
    target = _minmax(np.asarray(center, dtype=float), lo, span)

    labels = DBSCAN(eps=eps, min_samples=min_samples).fit_predict(normalized)
    candidates = sorted(set(labels) - {-1})
    if not candidates:
        raise NoCluster("every point was labeled noise")

    best_label = -1
    best_distance = np.inf
    for label in candidates:
        cluster_centroid = normalized[labels == label].mean(axis=0)
        distance = float(np.linalg.norm(cluster_centroid - target))
        if distance < best_distance:
            best_distance = distance
            best_label = label

    selected = np.flatnonzero(labels == best_label)
    return ClusterSelection(labels, best_label, selected)


def time_domain_values(sig: SignificantSpectrum, selected: np.ndarray) -> np.ndarray:
    """Zero non-selected frequency bins and return the real inverse transform."""
    masked = np.zeros_like(sig.values, dtype=complex)
    masked[selected] = sig.values[selected]
    return np.fft.ifft(masked).real
