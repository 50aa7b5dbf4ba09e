"""Tests for sawtooth age integration."""

import numpy as np
import pytest

from aoilab import analytics
from aoilab.age import AgeAccumulator, age_segments, integrate_age, peak_ages
from aoilab.exceptions import InsufficientDataError, TraceInvariantError


def test_accumulator_single_segment():
    """Test a trapezoid from age 1 at t=0 to a reset at t=2."""
    acc = AgeAccumulator()
    assert acc.reset(0.0, 1.0) == 0.0

    area = acc.reset(2.0, 0.5)

    assert area == pytest.approx(4.0)
    assert acc.elapsed == 2.0
    assert acc.average == pytest.approx(2.0)
    assert acc.age_at(3.0) == pytest.approx(1.5)


def test_accumulator_needs_two_resets():
    """Test the average is undefined before a full segment."""
    acc = AgeAccumulator()

    with pytest.raises(InsufficientDataError):
        acc.age_at(1.0)
    acc.reset(0.0, 1.0)
    with pytest.raises(InsufficientDataError):
        _ = acc.average


def test_accumulator_rejects_upward_jump():
    """Test the age can only drop at a reset."""
    acc = AgeAccumulator()
    acc.reset(0.0, 1.0)

    with pytest.raises(TraceInvariantError):
        acc.reset(1.0, 5.0)


def test_accumulator_rejects_time_reversal():
    """Test resets must move forward in time."""
    acc = AgeAccumulator()
    acc.reset(2.0, 1.0)

    with pytest.raises(TraceInvariantError):
        acc.reset(1.0, 0.5)


def test_extend_matches_streaming():
    """Test batch and one-at-a-time resets agree."""
    rng = np.random.default_rng(0)
    times = np.cumsum(rng.exponential(1.0, 200))
    gaps = np.diff(times, prepend=0.0)
    ages = np.minimum(rng.uniform(0.1, 1.0, 200), gaps + 0.1)
    ages[0] = 0.5

    streaming = AgeAccumulator()
    for t, a in zip(times, ages, strict=True):
        streaming.reset(float(t), float(a))
    batch = AgeAccumulator()
    batch.extend(times[:50], ages[:50])
    batch.extend(times[50:], ages[50:])

    assert batch.integral == pytest.approx(streaming.integral, rel=1e-12)
    assert batch.resets == streaming.resets == 200


def test_integrate_age_hand_trace(hand_trace):
    """Test the single segment [3.5, 4.0] averages 3.75."""
    assert integrate_age(hand_trace) == pytest.approx(3.75)


def test_age_segments_hand_trace(hand_trace):
    """Test segment areas and durations."""
    areas, durations = age_segments(hand_trace)

    np.testing.assert_allclose(areas, [1.875])
    np.testing.assert_allclose(durations, [0.5])


def test_peak_ages_hand_trace(hand_trace):
    """Test the peak just before the second delivery."""
    np.testing.assert_allclose(peak_ages(hand_trace), [4.0])


def test_integrate_age_needs_two_records(hand_trace):
    """Test one post-warmup record has no segment."""
    short = hand_trace.model_copy(update={"warmup_count": 1})

    with pytest.raises(InsufficientDataError):
        integrate_age(short)


def test_integrate_age_matches_segments(medium_trace):
    """Test the average equals total area over total time."""
    areas, durations = age_segments(medium_trace)

    assert integrate_age(medium_trace) == pytest.approx(areas.sum() / durations.sum(), rel=1e-12)


def test_integrate_age_close_to_closed_form(medium_trace):
    """Test 50k packets land within 3% of the closed form at rho = 1."""
    expected = analytics.avg_age_replacement(medium_trace.params)

    assert integrate_age(medium_trace) == pytest.approx(expected, rel=0.03)
