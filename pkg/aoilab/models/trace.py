"""Simulation configuration, per-packet records and traces."""

from enum import StrEnum
from functools import cached_property
from typing import Any, Literal, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from aoilab.models.params import SystemParams

# Absolute tolerance for identities that accumulate rounding over ~1e6 events
TRACE_TOLERANCE = 1e-9

RECORD_DTYPE = np.dtype(
    [
        ("k", np.int64),
        ("gen_time", np.float64),
        ("transmit_done", np.float64),
        ("compute_done", np.float64),
        ("x", np.float64),
        ("y", np.float64),
        ("z", np.float64),
        ("w", np.float64),
        ("s", np.float64),
        ("t_sys", np.float64),
        ("warmup", np.bool_),
    ]
)


class QueuePolicy(StrEnum):
    """Queue discipline in front of the edge server."""

    REPLACEMENT = "replacement"
    FCFS = "fcfs"


class SamplerOverride(BaseModel):
    """Deterministic duration sequences replacing the exponential samplers.

    Attributes:
        transmission: Transmission durations, consumed in generation order
        service: Service durations, consumed in service-start order
    """

    model_config = ConfigDict(frozen=True)

    transmission: tuple[float, ...] = Field(min_length=1)
    service: tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _positive(self) -> Self:
        if any(v <= 0.0 for v in self.transmission + self.service):
            raise ValueError("override durations must be positive")
        return self


class SimConfig(BaseModel):
    """Configuration of a single simulation run.

    Attributes:
        params: Transmission and computing rates
        policy: Queue discipline at the edge server
        target_computed_packets: Stop after this many compute completions
        warmup_computed_packets: Leading records excluded from statistics (None uses settings)
        seed: Master seed for the transmission and service substreams
        sampler_override: Deterministic durations for testing
        record_transmissions: Keep the per-generated-packet log
    """

    model_config = ConfigDict(frozen=True)

    params: SystemParams
    policy: QueuePolicy = QueuePolicy.REPLACEMENT
    target_computed_packets: int = Field(ge=1)
    warmup_computed_packets: int | None = Field(default=None, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    sampler_override: SamplerOverride | None = None
    record_transmissions: bool = False

    @model_validator(mode="after")
    def _warmup_below_target(self) -> Self:
        if self.warmup_computed_packets is not None and self.warmup_computed_packets >= self.target_computed_packets:
            raise ValueError("warmup_computed_packets must be smaller than target_computed_packets")
        return self

    @property
    def warmup_count(self) -> int:
        """Resolved warmup record count."""
        if self.warmup_computed_packets is not None:
            return self.warmup_computed_packets
        from aoilab.config import get_settings

        return int(self.target_computed_packets * get_settings().warmup_fraction)

    @classmethod
    def build(cls, **data: Any) -> "SimConfig":
        """Validate keyword data, raising ParameterError on failure."""
        from aoilab.models import build_model

        return build_model(cls, **data)


class ComputedPacketRecord(BaseModel):
    """Timestamps and intervals of one computed packet.

    y and z are None for the first record; their gaps are undefined there.
    """

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    gen_time: float
    transmit_done: float
    compute_done: float
    x: float
    y: float | None = None
    z: float | None = None
    w: float = Field(ge=0.0)
    s: float = Field(gt=0.0)
    t_sys: float
    warmup: bool = False

    @model_validator(mode="after")
    def _ordering(self) -> Self:
        if not (self.gen_time < self.transmit_done < self.compute_done):
            raise ValueError("expected gen_time < transmit_done < compute_done")
        if self.t_sys != self.w + self.s:
            raise ValueError("t_sys must equal w + s")
        return self


class TransmissionEvent(BaseModel):
    """Fate of one generated packet.

    Attributes:
        gen_time: Generation (transmission start) time
        arrival_time: Arrival time at the edge server
        disposition: computed, replaced, or in flight when the run stopped
        computed_index: Record index k for computed packets
    """

    model_config = ConfigDict(frozen=True)

    gen_time: float
    arrival_time: float
    disposition: Literal["computed", "replaced", "in_flight_at_end"]
    computed_index: int | None = None


class SimulationTrace(BaseModel):
    """Ordered computed-packet records plus run bookkeeping.

    Records are stored column-wise in a numpy structured array; ``records``
    materializes them as ComputedPacketRecord objects.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    params: SystemParams
    policy: QueuePolicy
    seed: int
    data: np.ndarray
    discarded_count: int = Field(ge=0)
    generated_count: int = Field(ge=0)
    warmup_count: int = Field(ge=0)
    total_time: float
    transmissions: tuple[TransmissionEvent, ...] | None = None

    @model_validator(mode="after")
    def _check_dtype(self) -> Self:
        if self.data.dtype != RECORD_DTYPE:
            raise ValueError("trace data must use RECORD_DTYPE")
        return self

    def __len__(self) -> int:
        return int(self.data.shape[0])

    @cached_property
    def records(self) -> list[ComputedPacketRecord]:
        """Materialized per-packet records in compute-completion order."""
        out: list[ComputedPacketRecord] = []
        for row in self.data:
            y = float(row["y"])
            z = float(row["z"])
            out.append(
                ComputedPacketRecord(
                    index=int(row["k"]),
                    gen_time=float(row["gen_time"]),
                    transmit_done=float(row["transmit_done"]),
                    compute_done=float(row["compute_done"]),
                    x=float(row["x"]),
                    y=None if np.isnan(y) else y,
                    z=None if np.isnan(z) else z,
                    w=float(row["w"]),
                    s=float(row["s"]),
                    t_sys=float(row["t_sys"]),
                    warmup=bool(row["warmup"]),
                )
            )
        return out

    def column(self, name: str, include_warmup: bool = False) -> np.ndarray:
        """Return one record field as an array.

        Args:
            name: Field name from RECORD_DTYPE
            include_warmup: Keep the leading warmup records

        Returns:
            Read-only view of the column
        """
        values = self.data[name] if include_warmup else self.data[name][self.warmup_count :]
        view = values.view()
        view.flags.writeable = False
        return view

    @property
    def post_warmup_count(self) -> int:
        """Number of records usable for statistics."""
        return len(self) - self.warmup_count

    @property
    def computed_count(self) -> int:
        return len(self)

    @property
    def in_flight_count(self) -> int:
        """Generated packets neither computed nor discarded when the run stopped."""
        return self.generated_count - self.computed_count - self.discarded_count
