"""System parameters for the two-stage status-update pipeline."""

import math
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from aoilab.exceptions import ParameterError


class SystemParams(BaseModel):
    """Transmission and computing rates of the pipeline.

    Attributes:
        lambda_: Transmission rate (mean transmission time 1/lambda)
        mu: Computing rate (mean computing time 1/mu)
        rho: Utilization lambda/mu, recomputed on construction
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(alias="lambda", description="Transmission rate")
    mu: float = Field(description="Computing rate")
    rho: float = Field(default=0.0, description="Utilization lambda/mu (derived)")

    @field_validator("lambda_", "mu")
    @classmethod
    def _positive_finite(cls, value: float) -> float:
        if not math.isfinite(value) or value <= 0.0:
            raise ValueError("rate must be positive and finite")
        return value

    @model_validator(mode="after")
    def _derive_rho(self) -> Self:
        rho = self.lambda_ / self.mu
        if not math.isfinite(rho):
            raise ValueError(f"utilization lambda/mu overflows: {self.lambda_!r}/{self.mu!r}")
        # Frozen model: bypass __setattr__ to cache the derived ratio
        object.__setattr__(self, "rho", rho)
        return self

    @classmethod
    def from_rho(cls, rho: float, mu: float = 1.0) -> "SystemParams":
        """Build params from a utilization and a computing rate.

        Args:
            rho: Utilization lambda/mu
            mu: Computing rate

        Returns:
            Validated SystemParams with lambda = rho * mu
        """
        if not math.isfinite(mu) or mu <= 0.0:
            raise ParameterError(f"mu must be positive and finite, got {mu!r}", field="mu")
        if not math.isfinite(rho) or rho <= 0.0:
            raise ParameterError(f"rho must be positive and finite, got {rho!r}", field="rho")
        return make_params(rho * mu, mu)


def make_params(lambda_: float, mu: float) -> SystemParams:
    """Validate rates and build SystemParams.

    Args:
        lambda_: Transmission rate
        mu: Computing rate

    Returns:
        SystemParams with rho cached

    Raises:
        ParameterError: If either rate is non-positive or non-finite
    """
    try:
        return SystemParams(lambda_=lambda_, mu=mu)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first["loc"][0] if first["loc"] else None
        if loc is None:
            raise ParameterError(f"Invalid rho: {first['msg']}", field="rho") from e
        field = "lambda" if loc in ("lambda", "lambda_") else str(loc)
        value = lambda_ if field == "lambda" else mu
        raise ParameterError(f"Invalid {field}: {value!r} ({first['msg']})", field=field) from e
