"""Particle draw, weighting, retention, and prediction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lachesis.density import density_estimate
from lachesis.errors import InvalidParams, InvalidRange
from lachesis.particles import draw_particles, particle_predict


def make_density(seed=0):
    rng = np.random.default_rng(seed)
    return density_estimate(rng.normal(5.0, 1.0, size=40).tolist())


def test_weights_normalized_to_peak():
    particles = draw_particles(make_density(), 0.0, 10.0, theta=100, epsilon=0.5, rng_seed=1)
    assert particles.weights.max() == pytest.approx(1.0)
    assert particles.weights.min() >= 0.0


def test_retained_weights_meet_threshold():
    particles = draw_particles(make_density(), 0.0, 10.0, theta=200, epsilon=0.9, rng_seed=2)
    assert len(particles.retained) >= 1
    assert (particles.weights[particles.retained] >= 0.9).all()


def test_retention_never_empty_even_at_epsilon_one():
    particles = draw_particles(make_density(), 0.0, 10.0, theta=50, epsilon=1.0, rng_seed=3)
    assert len(particles.retained) >= 1
    assert particles.weights[particles.retained].max() == pytest.approx(1.0)


def test_prediction_is_mean_of_retained_values():
    particles = draw_particles(make_density(), 0.0, 10.0, theta=100, epsilon=0.8, rng_seed=4)
    expected = float(particles.values[particles.retained].mean())
    assert particle_predict(particles) == pytest.approx(max(expected, 0.0))


def test_prediction_clamped_non_negative():
    density = density_estimate([-5.0, -5.0, -4.0])
    particles = draw_particles(density, -6.0, -3.0, theta=100, epsilon=0.5, rng_seed=5)
    assert particle_predict(particles) == 0.0


def test_degenerate_range_returns_bound():
    particles = draw_particles(make_density(), 4.0, 4.0, theta=10, epsilon=0.98, rng_seed=6)
    assert particle_predict(particles) == 4.0


def test_same_seed_same_particles():
    a = draw_particles(make_density(), 0.0, 10.0, theta=100, epsilon=0.9, rng_seed=7)
    b = draw_particles(make_density(), 0.0, 10.0, theta=100, epsilon=0.9, rng_seed=7)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.retained, b.retained)


def test_generator_instance_accepted():
    rng = np.random.default_rng(8)
    particles = draw_particles(make_density(), 0.0, 10.0, theta=20, epsilon=0.5, rng_seed=rng)
    assert particles.values.size == 20


def test_invalid_range_rejected():
    with pytest.raises(InvalidRange):
        draw_particles(make_density(), 5.0, 4.0, theta=10, epsilon=0.9, rng_seed=0)


@pytest.mark.parametrize("kwargs", [{"theta": 0}, {"epsilon": 0.0}, {"epsilon": 1.1}])
def test_invalid_params_rejected(kwargs):
    args = {"theta": 10, "epsilon": 0.9}
    args.update(kwargs)
    with pytest.raises(InvalidParams):
        draw_particles(make_density(), 0.0, 1.0, rng_seed=0, **args)


@settings(deadline=None, max_examples=40)
@given(
    seed=st.integers(0, 10_000),
    lo=st.floats(-20, 20),
    width=st.floats(0, 30),
    epsilon=st.floats(0.01, 1.0),
)
def test_contract_holds_for_any_seed(seed, lo, width, epsilon):
    hi = lo + width
    particles = draw_particles(
        make_density(), lo, hi, theta=64, epsilon=epsilon, rng_seed=seed
    )
    assert (particles.values >= lo).all() and (particles.values <= hi).all()
    assert len(particles.retained) >= 1
    assert (particles.weights[particles.retained] >= epsilon).all() or (
        particles.weights.max() == 0.0
    )
    prediction = particle_predict(particles)
    assert max(lo, 0.0) <= prediction or prediction == 0.0
    assert prediction <= max(hi, 0.0)
