"""Sweep specification models."""

import math
from pathlib import Path
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from aoilab.exceptions import ParameterError
from aoilab.models.trace import QueuePolicy


def parse_rho_grid(text: str) -> list[float]:
    """Parse a single value, a comma list, or a start:stop:step grid.

    Args:
        text: e.g. "1.0", "0.5,1,2" or "0.1:3:0.1" (stop inclusive)

    Returns:
        List of utilization values

    Raises:
        ParameterError: If the text cannot be parsed
    """
    text = text.strip()
    if not text:
        return []
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ParameterError(f"Grid must be start:stop:step, got {text!r}", field="rho")
            start, stop, step = parts
            if step <= 0.0 or stop < start:
                raise ParameterError(f"Grid needs step > 0 and stop >= start, got {text!r}", field="rho")
            count = math.floor((stop - start) / step + 1e-9) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        if isinstance(e, ParameterError):
            raise
        raise ParameterError(f"Cannot parse rho values from {text!r}", field="rho") from e


class SweepSpec(BaseModel):
    """A parameter sweep over utilization for one or both queue policies.

    Attributes:
        mu: Computing rate shared by every point
        rho_values: Strictly increasing positive utilizations
        policies: Policies run at each point, in output order
        packets_per_point: Computed packets simulated per point
        seed: Base seed; point i uses seed + i
        output_path: CSV destination
        warmup_fraction: Override of the settings warmup fraction
        workers: Parallel worker processes (None uses settings)
        timestamp: Write a leading timestamp comment line
    """

    model_config = ConfigDict(frozen=True)

    mu: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    rho_values: list[float]
    policies: list[QueuePolicy] = Field(default_factory=lambda: [QueuePolicy.REPLACEMENT])
    packets_per_point: int = Field(default=1_000_000, ge=100)
    seed: int = Field(default=0, ge=0)
    output_path: Path = Path("sweep.csv")
    warmup_fraction: float | None = Field(default=None, ge=0.0, lt=1.0)
    workers: int | None = Field(default=None, ge=1)
    timestamp: bool = True

    @field_validator("rho_values")
    @classmethod
    def _grid(cls, values: list[float]) -> list[float]:
        if not values:
            raise ValueError("rho_values must not be empty")
        if any(not math.isfinite(v) or v <= 0.0 for v in values):
            raise ValueError("rho_values must be positive and finite")
        if any(b <= a for a, b in zip(values, values[1:], strict=False)):
            raise ValueError("rho_values must be strictly increasing")
        return values

    @field_validator("policies")
    @classmethod
    def _policies(cls, values: list[QueuePolicy]) -> list[QueuePolicy]:
        if not values:
            raise ValueError("at least one policy is required")
        return list(dict.fromkeys(values))

    @model_validator(mode="after")
    def _seed_range(self) -> Self:
        if self.seed + len(self.rho_values) >= 2**64:
            raise ValueError("derived seeds exceed 64 bits")
        return self

    def point_seed(self, index: int) -> int:
        """Seed of the index-th utilization point (shared by both policies)."""
        return self.seed + index

    @classmethod
    def build(cls, **data) -> "SweepSpec":
        """Validate keyword data, raising ParameterError on failure."""
        from aoilab.models import build_model

        return build_model(cls, **data)


class PointTask(BaseModel):
    """One (rho, policy) point of a sweep, as shipped to a worker process."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    rho: float = Field(gt=0.0)
    mu: float = Field(gt=0.0)
    policy: QueuePolicy
    packets: int = Field(ge=1)
    seed: int = Field(ge=0)
    warmup_fraction: float = Field(ge=0.0, lt=1.0)
    num_batches: int = Field(ge=10)


class SweepRow(BaseModel):
    """One output row of a sweep.

    Attributes left as None are written as empty fields: closed forms for FCFS
    points, and simulated values for points that failed.
    """

    rho: float
    mu: float
    policy: QueuePolicy
    analytic_avg_age: float | None = None
    sim_avg_age: float | None = None
    ci_half_width: float | None = None
    mean_x: float | None = None
    mean_y: float | None = None
    mean_y_sq: float | None = None
    mean_ty: float | None = None
    prob_w0_emp: float | None = None
    prob_w0_analytic: float | None = None
    discarded_fraction: float | None = None
    packets: int
    seed: int
    warning: str = ""
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error
