"""Sawtooth age process: exact integration between compute completions.

Between deliveries the age grows with slope 1; at each compute completion it
drops to the delivered packet's age, x + t_sys. Each inter-reset segment is a
trapezoid, so the area is exact. The partial segment after the last delivery
and the ramp before the first post-warmup delivery are not counted.
"""

import numpy as np

from aoilab.exceptions import InsufficientDataError, TraceInvariantError
from aoilab.logging import get_logger
from aoilab.models.trace import TRACE_TOLERANCE, SimulationTrace

logger = get_logger(__name__)


class AgeAccumulator:
    """Running integral of the age sample path.

    Single-writer: one accumulator belongs to one integration pass.

    Attributes:
        first_reset_time: Time of the first reset, start of the integration window
        last_reset_time: Time of the most recent reset
        current_age_at_reset: Age right after the most recent reset
        integral: Area under the age curve since the first reset
        resets: Number of resets seen
    """

    def __init__(self) -> None:
        self.first_reset_time: float | None = None
        self.last_reset_time: float | None = None
        self.current_age_at_reset = 0.0
        self.integral = 0.0
        self.resets = 0

    def age_at(self, t: float) -> float:
        """Age at time t, at or after the last reset."""
        if self.last_reset_time is None:
            raise InsufficientDataError("age is undefined before the first reset")
        return self.current_age_at_reset + (t - self.last_reset_time)

    def reset(self, t: float, age: float) -> float:
        """Close the running segment at time t and drop the age to a new value.

        Args:
            t: Reset (compute completion) time
            age: Post-reset age

        Returns:
            Area of the closed segment (0 for the first reset)

        Raises:
            TraceInvariantError: If time runs backwards or the age jumps up
        """
        area = 0.0
        if self.last_reset_time is None:
            self.first_reset_time = t
        else:
            duration = t - self.last_reset_time
            if duration < 0.0:
                raise TraceInvariantError(f"reset at {t!r} precedes previous reset at {self.last_reset_time!r}")
            end_age = self.current_age_at_reset + duration
            if age > end_age + TRACE_TOLERANCE:
                raise TraceInvariantError(f"age jumps up at {t!r}: {end_age!r} -> {age!r}")
            area = 0.5 * (self.current_age_at_reset + end_age) * duration
            self.integral += area
        self.last_reset_time = t
        self.current_age_at_reset = age
        self.resets += 1
        return area

    def extend(self, times: np.ndarray, ages: np.ndarray) -> np.ndarray:
        """Apply a batch of resets at once.

        Args:
            times: Increasing reset times
            ages: Post-reset ages aligned with times

        Returns:
            Areas of the segments closed by these resets
        """
        times = np.asarray(times, dtype=float)
        ages = np.asarray(ages, dtype=float)
        if times.size == 0:
            return np.empty(0)
        if self.last_reset_time is None:
            self.reset(float(times[0]), float(ages[0]))
            times, ages = times[1:], ages[1:]
            if times.size == 0:
                return np.empty(0)
        start_times = np.concatenate(([self.last_reset_time], times[:-1]))
        start_ages = np.concatenate(([self.current_age_at_reset], ages[:-1]))
        durations = times - start_times
        end_ages = start_ages + durations
        if np.any(durations < 0.0):
            raise TraceInvariantError("reset times must be non-decreasing")
        if np.any(ages > end_ages + TRACE_TOLERANCE):
            raise TraceInvariantError("age must drop at every reset")
        areas = 0.5 * (start_ages + end_ages) * durations
        self.integral += float(np.sum(areas))
        self.last_reset_time = float(times[-1])
        self.current_age_at_reset = float(ages[-1])
        self.resets += int(times.size)
        return areas

    @property
    def elapsed(self) -> float:
        """Length of the integration window."""
        if self.first_reset_time is None or self.last_reset_time is None:
            return 0.0
        return self.last_reset_time - self.first_reset_time

    @property
    def average(self) -> float:
        """Time-averaged age over the window."""
        if self.resets < 2 or self.elapsed <= 0.0:
            raise InsufficientDataError("time-averaged age needs at least two resets")
        return self.integral / self.elapsed


def _accumulate(trace: SimulationTrace) -> tuple[AgeAccumulator, np.ndarray, np.ndarray]:
    if trace.post_warmup_count < 2:
        raise InsufficientDataError(
            f"Age integration needs at least 2 post-warmup records, trace has {trace.post_warmup_count}"
        )
    times = np.asarray(trace.column("compute_done"))
    ages = np.asarray(trace.column("x")) + np.asarray(trace.column("t_sys"))
    acc = AgeAccumulator()
    areas = acc.extend(times, ages)
    return acc, areas, np.diff(times)


def integrate_age(trace: SimulationTrace) -> float:
    """Time-averaged age over [first post-warmup delivery, last delivery].

    Raises:
        InsufficientDataError: With fewer than 2 post-warmup records
    """
    acc, _, _ = _accumulate(trace)
    logger.debug(f"Integrated age over {acc.resets} resets, window={acc.elapsed:.6g}")
    return acc.average


def age_segments(trace: SimulationTrace) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment areas and durations between consecutive post-warmup deliveries."""
    _, areas, durations = _accumulate(trace)
    return areas, durations


def peak_ages(trace: SimulationTrace) -> np.ndarray:
    """Age just before each post-warmup reset after the first (the sawtooth peaks)."""
    if trace.post_warmup_count < 2:
        raise InsufficientDataError("peak ages need at least 2 post-warmup records")
    start = np.asarray(trace.column("x"))[:-1] + np.asarray(trace.column("t_sys"))[:-1]
    return start + np.diff(np.asarray(trace.column("compute_done")))
