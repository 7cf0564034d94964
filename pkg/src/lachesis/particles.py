"""Particle filtering over a kernel density estimate.

Particles are drawn uniformly over the candidate value range, weighted by
relative density, thresholded, and averaged into a single prediction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import DensityModel
from .errors import InvalidParams, InvalidRange


@dataclass(frozen=True)
class ParticleSet:
    """Drawn particles with normalized weights and the retained subset."""

    values: np.ndarray
    weights: np.ndarray
    retained: np.ndarray
    lo: float
    hi: float

    def retained_values(self) -> np.ndarray:
        return self.values[self.retained]


def draw_particles(
    density: DensityModel,
    lo: float,
    hi: float,
    theta: int,
    epsilon: float,
    rng_seed,
) -> ParticleSet:
    """Draw theta uniform particles on [lo, hi] and weight them by density.

    Weights are normalized by the densest drawn particle so the maximum
    weight is exactly 1; particles with weight >= epsilon are retained.
    An all-zero density ties every particle at the maximum, so all are kept.
    """
    if lo > hi:
        raise InvalidRange(f"lo={lo} exceeds hi={hi}")
    if theta < 1:
        raise InvalidParams(f"theta must be >= 1, got {theta}")
    if not 0 < epsilon <= 1:
        raise InvalidParams(f"epsilon must be in (0, 1], got {epsilon}")

    rng = np.random.default_rng(rng_seed)
    values = rng.uniform(lo, hi, size=theta)
    raw = density.density(values)
    peak = raw.max()
    weights = raw / peak if peak > 0 else np.ones_like(raw)

    retained = np.flatnonzero(weights >= epsilon)
    if retained.size == 0:
        retained = np.array([int(np.argmax(weights))])
    return ParticleSet(values, weights, retained, float(lo), float(hi))


def particle_predict(particles: ParticleSet) -> float:
    """Mean of the retained particles, clamped to be non-negative.

    The mean of in-range values lies in [lo, hi] mathematically; clipping
    guards against float accumulation drifting past a bound.
    """
    mean = float(particles.retained_values().mean())
    return max(min(max(mean, particles.lo), particles.hi), 0.0)
