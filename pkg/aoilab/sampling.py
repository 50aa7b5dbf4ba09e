"""Duration samplers for the transmission and computing stages.

Each run derives two independent substreams from its master seed, one for
transmission durations and one for service durations, so both policies see
the same durations under common random numbers regardless of how their
events interleave.
"""

from collections.abc import Sequence
from typing import Protocol

import numpy as np

from aoilab.exceptions import SamplerExhaustedError

# Uniforms drawn per refill; the stream of values does not depend on it
_BLOCK_SIZE = 65_536

TRANSMISSION_STREAM = 0
SERVICE_STREAM = 1


class DurationSampler(Protocol):
    """Source of successive stage durations."""

    def next(self) -> float: ...


class ExponentialSampler:
    """Exponential durations by inverse transform from a PCG64 substream.

    Attributes:
        rate: Exponential rate
    """

    def __init__(self, rate: float, generator: np.random.Generator):
        """Initialize the sampler.

        Args:
            rate: Exponential rate (1/mean)
            generator: Dedicated numpy generator for this stage
        """
        self.rate = rate
        self._generator = generator
        self._buffer: list[float] = []
        self._pos = 0

    def _refill(self) -> None:
        u = self._generator.random(_BLOCK_SIZE)  # u in [0, 1)
        self._buffer = (-np.log1p(-u) / self.rate).tolist()
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buffer):
            self._refill()
        value = self._buffer[self._pos]
        self._pos += 1
        return value


class SequenceSampler:
    """Replays a fixed sequence of durations (testing only)."""

    def __init__(self, values: Sequence[float], stage: str):
        """Initialize the sampler.

        Args:
            values: Durations in consumption order
            stage: Stage name used in the exhaustion message
        """
        self._values = tuple(float(v) for v in values)
        self._stage = stage
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._values):
            raise SamplerExhaustedError(
                f"{self._stage} override exhausted after {len(self._values)} values"
            )
        value = self._values[self._pos]
        self._pos += 1
        return value

    @property
    def consumed(self) -> int:
        return self._pos


def spawn_generators(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Derive the transmission and service generators from a master seed.

    Args:
        seed: Master 64-bit seed

    Returns:
        (transmission generator, service generator)
    """
    children = np.random.SeedSequence(seed).spawn(2)
    return (
        np.random.Generator(np.random.PCG64(children[TRANSMISSION_STREAM])),
        np.random.Generator(np.random.PCG64(children[SERVICE_STREAM])),
    )


def exponential_samplers(lambda_: float, mu: float, seed: int) -> tuple[ExponentialSampler, ExponentialSampler]:
    """Build the pair of exponential samplers for one run.

    Args:
        lambda_: Transmission rate
        mu: Computing rate
        seed: Master seed

    Returns:
        (transmission sampler, service sampler)
    """
    tx_gen, svc_gen = spawn_generators(seed)
    return ExponentialSampler(lambda_, tx_gen), ExponentialSampler(mu, svc_gen)
