"""Estimate and comparison models produced by the estimators."""

from typing import Literal, Self

from pydantic import BaseModel, Field, model_validator

from aoilab.models.params import SystemParams
from aoilab.models.trace import QueuePolicy


class WaitDistribution(BaseModel):
    """Mixed distribution of the computing-stage waiting time.

    Pr(W=0) = atom_at_zero; for w > 0 the density is
    density_rate_coeff * exp(-density_decay * w).
    """

    atom_at_zero: float = Field(ge=0.0, le=1.0)
    density_rate_coeff: float = Field(gt=0.0)
    density_decay: float = Field(gt=0.0)

    @property
    def continuous_mass(self) -> float:
        return self.density_rate_coeff / self.density_decay


class ReplacementComponents(BaseModel):
    """Closed-form ingredients of the average age under packet replacement."""

    params: SystemParams
    prob_wait_zero: float
    mean_w: float
    mean_x: float
    mean_y: float
    mean_y_sq: float
    mean_wplus_times_y: float
    mean_ty: float
    avg_age: float
    avg_age_min: float


class MomentEstimate(BaseModel):
    """Point estimate with a 95% confidence half-width and its closed-form pairing.

    Attributes:
        name: Quantity identifier
        point_estimate: Simulated value
        half_width: Half-width of the 95% confidence interval
        analytic_value: Closed-form value, None where none exists
        relative_error: |point - analytic| / |analytic|, None without a nonzero pairing
    """

    name: str
    point_estimate: float
    half_width: float = Field(ge=0.0)
    analytic_value: float | None = None
    relative_error: float | None = None

    @classmethod
    def paired(cls, name: str, point: float, half_width: float, analytic: float | None) -> "MomentEstimate":
        """Build an estimate and derive its relative error."""
        rel = None
        if analytic is not None and analytic != 0.0:
            rel = abs(point - analytic) / abs(analytic)
        return cls(
            name=name,
            point_estimate=point,
            half_width=half_width,
            analytic_value=analytic,
            relative_error=rel,
        )


class MomentReport(BaseModel):
    """Simulated moments of one run paired with their closed forms."""

    params: SystemParams
    policy: QueuePolicy
    seed: int
    packets: int = Field(description="Post-warmup computed packets used")
    discarded_fraction: float
    estimates: dict[str, MomentEstimate]
    corr_x_prev_z: float = Field(description="Sample correlation of X_{k-1} and Z_k")

    def __getitem__(self, name: str) -> MomentEstimate:
        return self.estimates[name]

    def failures(self, threshold: float) -> dict[str, float]:
        """Quantities whose relative error exceeds a threshold.

        Args:
            threshold: Maximum tolerated relative error

        Returns:
            Mapping of quantity name to relative error
        """
        return {
            name: est.relative_error
            for name, est in self.estimates.items()
            if est.relative_error is not None and est.relative_error > threshold
        }

    def max_relative_error(self) -> float | None:
        errors = [e.relative_error for e in self.estimates.values() if e.relative_error is not None]
        return max(errors) if errors else None


class DensityComparison(BaseModel):
    """Empirical histogram of a trace quantity against its analytic density.

    Bins are equal-probability under the analytic (conditional) CDF. Heights are
    normalized by the total sample count, so heights times widths sum to the
    empirical continuous mass.
    """

    quantity: Literal["W", "Y"]
    sample_count: int
    bin_edges: list[float]
    heights: list[float]
    grid: list[float] = Field(description="Bin midpoints where the analytic density is evaluated")
    analytic_density: list[float]
    sup_distance: float = Field(ge=0.0, description="Kolmogorov distance between empirical and analytic CDFs")
    atom_mass: float = Field(ge=0.0, le=1.0, description="Empirical mass at zero (W only)")
    continuous_mass: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _shapes(self) -> Self:
        if len(self.bin_edges) != len(self.heights) + 1:
            raise ValueError("bin_edges must have one more entry than heights")
        if len(self.grid) != len(self.heights) or len(self.analytic_density) != len(self.heights):
            raise ValueError("grid and analytic_density must align with heights")
        return self
