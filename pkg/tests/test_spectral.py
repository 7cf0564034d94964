"""Frequency-domain stage: transform, significance, subspace, cluster pick."""

import math
from datetime import timedelta

import numpy as np
import pytest

from lachesis.errors import DegenerateInput, EmptyGroup, NoCluster
from lachesis.model import TimeBucketKey, bucketize
from lachesis.spectral import (
    SignificantSpectrum,
    SpectrumBucket,
    power_spectral_density,
    principal_subspace,
    select_cluster,
    significant_frequencies,
    spectral_transform,
    time_domain_values,
)
from tests.conftest import MONDAY, series_from_rates


def brute_force_significance(magnitude_rows, c):
    """Straight transcription of the significance reduction, scalar loops only.

    Given a list of per-member magnitude vectors, reduce each frequency
    index independently: sqrt(max) * |mean + 3 * population std| + sqrt(n),
    all scaled by c.
    """
    n = len(magnitude_rows)
    length = len(magnitude_rows[0])
    out = []
    for k in range(length):
        column = [row[k] for row in magnitude_rows]
        peak = max(column)
        mean = sum(column) / n
        var = sum((x - mean) ** 2 for x in column) / n
        std = math.sqrt(var)
        out.append((math.sqrt(peak) * abs(mean + 3.0 * std) + math.sqrt(n)) * c)
    return out


def constant_bucket_series(value, days=5):
    return series_from_rates("n1", MONDAY, days, lambda d, m: value)


def test_transform_of_constant_bucket_concentrates_at_zero():
    bucketed = bucketize(constant_bucket_series(3, days=1), 60)
    spectra = spectral_transform(bucketed)
    assert len(spectra) == 24
    coeffs = spectra[0].coefficients
    assert coeffs[0] == pytest.approx(60 * 3)
    assert np.abs(coeffs[1:]).max() == pytest.approx(0.0, abs=1e-9)


def test_transform_recovers_cosine_frequency():
    k0 = 5
    series = series_from_rates(
        "n1", MONDAY, 1,
        lambda d, m: 10 + round(5 * math.cos(2 * math.pi * k0 * (m % 60) / 60)),
    )
    spectra = spectral_transform(bucketize(series, 60))
    mags = np.abs(spectra[0].coefficients)
    # dominant energy sits at the DC bin and the +/-k0 pair; integer
    # rounding of the cosine leaks only small amounts elsewhere
    assert set(np.flatnonzero(mags > 10.0)) == {0, k0, 60 - k0}


def test_round_trip_returns_input():
    rng = np.random.default_rng(11)
    values = rng.integers(0, 30, size=60).astype(float)
    back = np.fft.ifft(np.fft.fft(values))
    assert np.abs(back - values).max() < 1e-9


def test_significance_matches_brute_force_oracle():
    rng = np.random.default_rng(17)
    for _ in range(50):
        rows = [rng.uniform(0, 50, size=12) for _ in range(5)]
        spectra = [
            SpectrumBucket((MONDAY + timedelta(days=7 * i), 0), row.astype(complex))
            for i, row in enumerate(rows)
        ]
        for c in (1.0, 1.5):
            got = significant_frequencies(spectra, c)
            assert len(got) == 1
            expected = brute_force_significance([np.abs(r) for r in rows], c)
            assert np.abs(got[0].values - np.array(expected)).max() <= 1e-9


def test_significance_groups_by_weekday_and_slot():
    spectra = [
        SpectrumBucket((MONDAY, 0), np.ones(4, dtype=complex)),
        SpectrumBucket((MONDAY + timedelta(days=7), 0), np.ones(4, dtype=complex)),
        SpectrumBucket((MONDAY + timedelta(days=1), 0), np.ones(4, dtype=complex)),
        SpectrumBucket((MONDAY, 60), np.ones(4, dtype=complex)),
    ]
    got = significant_frequencies(spectra, 1.0)
    keys = [(s.key, s.member_count) for s in got]
    assert keys == [
        (TimeBucketKey(0, 0), 2),
        (TimeBucketKey(0, 60), 1),
        (TimeBucketKey(1, 0), 1),
    ]


def test_significance_c_scaling_is_exact():
    rng = np.random.default_rng(23)
    spectra = [
        SpectrumBucket(
            (MONDAY + timedelta(days=7 * i), 0),
            rng.uniform(0, 40, size=16).astype(complex),
        )
        for i in range(5)
    ]
    base = significant_frequencies(spectra, 1.0)[0].values
    scaled = significant_frequencies(spectra, 1.5)[0].values
    assert np.array_equal(scaled, 1.5 * base)


def test_significance_rejects_empty():
    with pytest.raises(EmptyGroup):
        significant_frequencies([], 1.5)


def test_power_is_squared_significance_over_length():
    sig = SignificantSpectrum(TimeBucketKey(0, 0), np.array([2.0, 4.0]), 1)
    assert power_spectral_density(sig).tolist() == [2.0, 8.0]


def test_power_rejects_empty():
    sig = SignificantSpectrum(TimeBucketKey(0, 0), np.array([]), 0)
    with pytest.raises(EmptyGroup):
        power_spectral_density(sig)


def test_principal_subspace_of_isotropic_pair():
    # two points symmetric about the origin: covariance is diagonal
    sig = SignificantSpectrum(TimeBucketKey(0, 0), np.array([1.0, 3.0]), 1)
    power = np.array([2.0, 2.0])
    sub = principal_subspace(sig, power)
    assert sub.eigenvalues == pytest.approx([0.0, 1.0])
    # centroid (2, 2) plus the mean of the scaled eigenvector columns
    expected_center = np.array([2.0, 2.0]) + sub.scaled_vectors.mean(axis=1)
    assert sub.center == pytest.approx(expected_center)


def test_principal_subspace_needs_two_points():
    sig = SignificantSpectrum(TimeBucketKey(0, 0), np.array([1.0]), 1)
    with pytest.raises(DegenerateInput):
        principal_subspace(sig, np.array([1.0]))


def test_select_cluster_prefers_blob_closest_to_center():
    rng = np.random.default_rng(5)
    low = rng.normal(0.0, 0.005, size=(20, 2))
    high = rng.normal(1.0, 0.005, size=(20, 2))
    points = np.vstack([low, high])
    sig = SignificantSpectrum(TimeBucketKey(0, 0), points[:, 0], 1)
    selection = select_cluster(
        sig, points[:, 1], center=np.array([1.0, 1.0]), eps=0.1, min_samples=15
    )
    assert sorted(selection.selected_indices) == list(range(20, 40))

    selection = select_cluster(
        sig, points[:, 1], center=np.array([0.0, 0.0]), eps=0.1, min_samples=15
    )
    assert sorted(selection.selected_indices) == list(range(20))


def test_select_cluster_tie_takes_smallest_label():
    # two identical-distance blobs from a centered target
    xs = np.concatenate([np.zeros(15), np.ones(15)])
    sig = SignificantSpectrum(TimeBucketKey(0, 0), xs, 1)
    selection = select_cluster(
        sig, np.zeros(30), center=np.array([0.5, 0.0]), eps=0.1, min_samples=15
    )
    assert selection.selected_label == 0


def test_select_cluster_all_noise_raises():
    xs = np.linspace(0.0, 1.0, 10)
    sig = SignificantSpectrum(TimeBucketKey(0, 0), xs, 1)
    with pytest.raises(NoCluster):
        select_cluster(
            sig, xs**2, center=np.array([0.5, 0.25]), eps=0.01, min_samples=5
        )


def test_lone_outlier_is_dropped_by_clustering():
    # a tight mass plus one far point: the far point must be labeled noise
    values = np.concatenate([np.full(59, 2.0), [1000.0]])
    sig = SignificantSpectrum(TimeBucketKey(0, 0), values, 5)
    power = power_spectral_density(sig)
    sub = principal_subspace(sig, power)
    selection = select_cluster(sig, power, sub.center, eps=0.1, min_samples=15)
    assert 59 not in selection.selected_indices
    assert len(selection.selected_indices) == 59


def test_time_domain_values_mask_non_selected():
    sig = SignificantSpectrum(
        TimeBucketKey(0, 0), np.array([8.0, 0.0, 4.0, 0.0]), 1
    )
    out = time_domain_values(sig, np.array([0]))
    assert out == pytest.approx([2.0, 2.0, 2.0, 2.0])
    both = time_domain_values(sig, np.array([0, 2]))
    assert both == pytest.approx([3.0, 1.0, 3.0, 1.0])
