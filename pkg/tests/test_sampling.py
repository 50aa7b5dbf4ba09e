"""Tests for duration samplers."""

import numpy as np
import pytest

from aoilab.exceptions import SamplerExhaustedError
from aoilab.sampling import ExponentialSampler, SequenceSampler, exponential_samplers, spawn_generators


def draw(sampler, n: int) -> list[float]:
    return [sampler.next() for _ in range(n)]


def test_sequence_sampler_replays_values():
    """Test values come back in order."""
    sampler = SequenceSampler([1.0, 2.5, 0.5], "service")

    assert draw(sampler, 3) == [1.0, 2.5, 0.5]
    assert sampler.consumed == 3


def test_sequence_sampler_exhaustion():
    """Test running past the end raises SamplerExhaustedError."""
    sampler = SequenceSampler([1.0], "transmission")
    sampler.next()

    with pytest.raises(SamplerExhaustedError, match="transmission"):
        sampler.next()


def test_exponential_sampler_same_seed_same_stream():
    """Test a seed fully determines the durations."""
    tx_a, svc_a = exponential_samplers(2.0, 1.0, seed=11)
    tx_b, svc_b = exponential_samplers(2.0, 1.0, seed=11)

    assert draw(tx_a, 1000) == draw(tx_b, 1000)
    assert draw(svc_a, 1000) == draw(svc_b, 1000)


def test_exponential_sampler_different_seeds_differ():
    """Test distinct seeds give distinct streams."""
    tx_a, _ = exponential_samplers(1.0, 1.0, seed=1)
    tx_b, _ = exponential_samplers(1.0, 1.0, seed=2)

    assert draw(tx_a, 10) != draw(tx_b, 10)


def test_substreams_do_not_interfere():
    """Test transmission draws do not depend on how many service draws happened."""
    tx_a, svc_a = exponential_samplers(1.0, 1.0, seed=5)
    tx_b, _ = exponential_samplers(1.0, 1.0, seed=5)
    draw(svc_a, 100_000)

    assert draw(tx_a, 100) == draw(tx_b, 100)


def test_rate_is_shared_across_rates():
    """Test a different rate rescales the same uniforms."""
    tx_fast, _ = exponential_samplers(4.0, 1.0, seed=9)
    tx_slow, _ = exponential_samplers(1.0, 1.0, seed=9)

    np.testing.assert_allclose(np.array(draw(tx_fast, 50)) * 4.0, draw(tx_slow, 50), rtol=1e-12)


def test_exponential_sampler_mean():
    """Test the sample mean is close to 1/rate across refills."""
    gen, _ = spawn_generators(3)
    sampler = ExponentialSampler(2.0, gen)
    values = np.array(draw(sampler, 200_000))

    assert values.min() >= 0.0
    assert values.mean() == pytest.approx(0.5, rel=0.01)
