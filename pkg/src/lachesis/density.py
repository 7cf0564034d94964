"""Kernel density estimation over time-domain forecast values.

The estimate is the textbook mixture density(x) = (1/(n*bw)) * sum K((x-xi)/bw)
with each kernel normalized to unit area, so the estimate itself integrates
to 1. Implemented directly because downstream weighting needs pointwise
evaluation of this exact formula.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidParams


def _gaussian(u: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * u**2) / np.sqrt(2.0 * np.pi)


def _tophat(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u**2), 0.0)


def _exponential(u: np.ndarray) -> np.ndarray:
    return 0.5 * np.exp(-np.abs(u))


def _linear(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 1.0 - np.abs(u), 0.0)


def _cosine(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, (np.pi / 4.0) * np.cos(np.pi * u / 2.0), 0.0)


KERNELS = {
    "gaussian": _gaussian,
    "tophat": _tophat,
    "epanechnikov": _epanechnikov,
    "exponential": _exponential,
    "linear": _linear,
    "cosine": _cosine,
}


@dataclass(frozen=True)
class DensityModel:
    """Evaluable kernel density over a fixed sample of values."""

    samples: np.ndarray
    kernel: str
    bandwidth: float

    def density(self, x) -> np.ndarray:
        """Density of the mixture at each query point (vectorized)."""
        query = np.atleast_1d(np.asarray(x, dtype=float))
        scaled = (query[:, None] - self.samples[None, :]) / self.bandwidth
        contributions = KERNELS[self.kernel](scaled)
        return contributions.sum(axis=1) / (self.samples.size * self.bandwidth)

    def density_at(self, x: float) -> float:
        return float(self.density(x)[0])


def density_estimate(values, kernel: str = "gaussian", bandwidth: float = 0.3) -> DensityModel:
    """Fit a kernel density model to 1-D values.

    Args:
        values: sample values (non-empty).
        kernel: one of gaussian, tophat, epanechnikov, exponential,
            linear, cosine.
        bandwidth: kernel scale, > 0.

    Returns:
        A DensityModel evaluable at arbitrary points.
    """
    samples = np.asarray(values, dtype=float).ravel()
    if samples.size == 0:
        raise EmptyInput("cannot estimate a density from no values")
    if kernel not in KERNELS:
        raise InvalidParams(
            f"unknown kernel {kernel!r}, expected one of {sorted(KERNELS)}"
        )
    if bandwidth <= 0:
        raise InvalidParams(f"bandwidth must be > 0, got {bandwidth}")
    return DensityModel(samples, kernel, bandwidth)
