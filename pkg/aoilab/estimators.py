"""Statistical estimators over simulation traces.

Confidence intervals use non-overlapping batch means with a normal
approximation. Every estimate is paired with its closed form when the trace
was produced under packet replacement; FCFS traces carry no closed forms.
"""

import math
from typing import Literal

import numpy as np
from scipy import stats

from aoilab import analytics
from aoilab.age import age_segments, integrate_age, peak_ages
from aoilab.config import get_settings
from aoilab.exceptions import InsufficientDataError, ParameterError
from aoilab.logging import get_logger
from aoilab.models import DensityComparison, MomentEstimate, MomentReport, SystemParams
from aoilab.models.trace import QueuePolicy, SimulationTrace
from aoilab.simulator import extract_moments

logger = get_logger(__name__)

MIN_BATCHES = 10
MIN_PER_BATCH = 10
CONFIDENCE = 0.95
ZERO_WAIT_EPS = 1e-12
MIN_DENSITY_BINS = 20
MAX_DENSITY_BINS = 500
MIN_DENSITY_SAMPLES = 100_000
CDF_GRID_POINTS = 4001


def _z_value() -> float:
    return float(stats.norm.ppf(0.5 + CONFIDENCE / 2.0))


def _batch_layout(length: int, num_batches: int) -> int:
    """Batch size for a sequence, after checking there is enough data."""
    if num_batches < MIN_BATCHES:
        raise ParameterError(f"num_batches must be at least {MIN_BATCHES}, got {num_batches}", field="num_batches")
    if length < MIN_PER_BATCH * num_batches:
        raise InsufficientDataError(
            f"{num_batches} batches need at least {MIN_PER_BATCH * num_batches} observations, got {length}"
        )
    batch_size = length // num_batches
    dropped = length - batch_size * num_batches
    if dropped:
        logger.debug(f"Batch means: dropping {dropped} trailing observations")
    return batch_size


def _batched(values: np.ndarray, num_batches: int, batch_size: int) -> np.ndarray:
    return values[: num_batches * batch_size].reshape(num_batches, batch_size)


def batch_means_ci(sequence: np.ndarray, num_batches: int = 20) -> tuple[float, float]:
    """Mean of a sequence with a 95% batch-means confidence half-width.

    The sequence is split into num_batches equal contiguous batches; the
    trailing remainder is dropped.

    Args:
        sequence: Observations in time order
        num_batches: Number of batches, at least 10

    Returns:
        (mean of batch means, half-width)

    Raises:
        ParameterError: If num_batches < 10
        InsufficientDataError: If there are fewer than 10 observations per batch
    """
    values = np.asarray(sequence, dtype=float)
    batch_size = _batch_layout(values.size, num_batches)
    means = _batched(values, num_batches, batch_size).mean(axis=1)
    half_width = _z_value() * float(np.std(means, ddof=1)) / math.sqrt(num_batches)
    return float(means.mean()), half_width


def batch_ratio_ci(numerators: np.ndarray, denominators: np.ndarray, num_batches: int = 20) -> tuple[float, float]:
    """Ratio of sums with a 95% batch-means half-width on the per-batch ratios.

    Args:
        numerators: Per-observation numerators (e.g. sawtooth areas)
        denominators: Per-observation denominators (e.g. segment durations)
        num_batches: Number of batches, at least 10

    Returns:
        (ratio of the retained sums, half-width)
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    if num.shape != den.shape:
        raise ParameterError("numerators and denominators must have the same length")
    batch_size = _batch_layout(num.size, num_batches)
    num_sums = _batched(num, num_batches, batch_size).sum(axis=1)
    den_sums = _batched(den, num_batches, batch_size).sum(axis=1)
    ratios = num_sums / den_sums
    half_width = _z_value() * float(np.std(ratios, ddof=1)) / math.sqrt(num_batches)
    return float(num_sums.sum() / den_sums.sum()), half_width


def sample_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation; NaN when either sequence is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


def _assembled_age(x: np.ndarray, y: np.ndarray, ty: np.ndarray, axis: int | None = None) -> np.ndarray | float:
    ey = y.mean(axis=axis)
    return (x.mean(axis=axis) * ey + ty.mean(axis=axis) + 0.5 * (y * y).mean(axis=axis)) / ey


def _assembled_age_ci(x: np.ndarray, y: np.ndarray, ty: np.ndarray, num_batches: int) -> tuple[float, float]:
    """Average age from sample moments, with a batch half-width."""
    x_aligned = x[1:]
    batch_size = _batch_layout(y.size, num_batches)
    per_batch = _assembled_age(
        _batched(x_aligned, num_batches, batch_size),
        _batched(y, num_batches, batch_size),
        _batched(ty, num_batches, batch_size),
        axis=1,
    )
    half_width = _z_value() * float(np.std(per_batch, ddof=1)) / math.sqrt(num_batches)
    return float(_assembled_age(x, y, ty)), half_width


def build_moment_report(
    trace: SimulationTrace,
    params: SystemParams | None = None,
    num_batches: int | None = None,
) -> MomentReport:
    """Estimate every age ingredient from a trace and pair it with its closed form.

    Args:
        trace: Simulator output
        params: Parameters for the closed forms (defaults to the trace's)
        num_batches: Batch count (defaults to settings.num_batches)

    Returns:
        MomentReport keyed by quantity name

    Raises:
        InsufficientDataError: If the post-warmup records cannot fill the batches
    """
    params = params or trace.params
    num_batches = num_batches or get_settings().num_batches
    m = extract_moments(trace)
    analytic = trace.policy is QueuePolicy.REPLACEMENT

    def closed(fn) -> float | None:
        return fn(params) if analytic else None

    estimates: dict[str, MomentEstimate] = {}

    def add(name: str, sequence: np.ndarray, fn) -> None:
        point, hw = batch_means_ci(sequence, num_batches)
        estimates[name] = MomentEstimate.paired(name, point, hw, closed(fn))

    add("mean_x", m.x, analytics.mean_x)
    add("mean_y", m.y, analytics.mean_y)
    add("mean_y_sq", m.y_sq, analytics.mean_y_sq)
    add("mean_z", m.z, analytics.mean_z)
    add("mean_ty", m.ty, analytics.mean_ty)
    add("mean_wplus_y", m.wplus_y, analytics.mean_wplus_times_y)
    add("mean_w", m.w, analytics.mean_w)
    add("prob_w0", (m.w < ZERO_WAIT_EPS).astype(float), analytics.prob_wait_zero)
    add("mean_peak_age", peak_ages(trace), analytics.mean_peak_age)

    areas, durations = age_segments(trace)
    _, age_hw = batch_ratio_ci(areas, durations, num_batches)
    estimates["avg_age"] = MomentEstimate.paired(
        "avg_age", integrate_age(trace), age_hw, closed(analytics.avg_age_replacement)
    )
    point, hw = _assembled_age_ci(m.x, m.y, m.ty, num_batches)
    estimates["avg_age_assembled"] = MomentEstimate.paired(
        "avg_age_assembled", point, hw, closed(analytics.avg_age_replacement)
    )

    return MomentReport(
        params=params,
        policy=trace.policy,
        seed=trace.seed,
        packets=trace.post_warmup_count,
        discarded_fraction=trace.discarded_count / trace.generated_count,
        estimates=estimates,
        corr_x_prev_z=sample_correlation(m.x_prev, m.z),
    )


def _quantile_edges(grid: np.ndarray, cdf: np.ndarray, num_bins: int, sample_max: float) -> np.ndarray:
    """Bin edges at equal probability steps of a tabulated CDF."""
    cdf = np.maximum.accumulate(cdf)
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    grid, cdf = grid[keep], cdf[keep]
    probs = np.arange(num_bins) / num_bins
    edges = np.interp(probs, cdf, grid)
    last = max(sample_max, float(np.interp(1.0 - 1e-9, cdf, grid)))
    return np.append(edges, last)


def compare_density(
    trace: SimulationTrace,
    quantity: Literal["W", "Y"],
    num_bins: int = 50,
    min_samples: int = MIN_DENSITY_SAMPLES,
) -> DensityComparison:
    """Histogram a trace quantity against its closed-form density.

    For W the zero-wait atom is split off first: bins and the distance cover
    the continuous part, conditioned on W > 0. Heights are normalized by the
    full sample count, so they integrate to the empirical continuous mass.

    Args:
        trace: Replacement-policy trace
        quantity: "W" (waiting time) or "Y" (inter-arrival of computed packets)
        num_bins: Number of equal-probability bins, 20 to 500
        min_samples: Smallest acceptable post-warmup sample

    Returns:
        DensityComparison with heights, analytic density at bin midpoints and the
        Kolmogorov distance

    Raises:
        ParameterError: For an unsupported quantity or bin count
        InsufficientDataError: With fewer than min_samples samples
    """
    quantity = str(quantity).upper()
    if quantity not in ("W", "Y"):
        raise ParameterError(f"quantity must be 'W' or 'Y', got {quantity!r}", field="quantity")
    if not MIN_DENSITY_BINS <= num_bins <= MAX_DENSITY_BINS:
        raise ParameterError(
            f"num_bins must be in [{MIN_DENSITY_BINS}, {MAX_DENSITY_BINS}], got {num_bins}", field="num_bins"
        )
    params = trace.params
    if quantity == "W":
        samples = np.asarray(trace.column("w"))
    else:
        samples = extract_moments(trace).y
    total = samples.size
    if total < min_samples:
        raise InsufficientDataError(f"density comparison needs {min_samples} samples, got {total}")

    if quantity == "W":
        zero = samples < ZERO_WAIT_EPS
        atom_count = int(np.count_nonzero(zero))
        continuous = samples[~zero]
        analytic_mass = 1.0 - analytics.prob_wait_zero(params)

        def density(v: np.ndarray) -> np.ndarray:
            return analytics.pdf_wait(v, params)

        grid, cdf = analytics.tabulate_cdf(
            lambda v: analytics.pdf_wait(v, params) if v > 0.0 else params.lambda_,
            analytics.wait_tail_cutoff(params),
            num_points=CDF_GRID_POINTS,
        )
        cdf = cdf / analytic_mass
    else:
        atom_count = 0
        continuous = samples

        def density(v: np.ndarray) -> np.ndarray:
            return analytics.pdf_y(v, params)

        grid, cdf = analytics.tabulate_cdf(
            lambda v: analytics.pdf_y(v, params),
            analytics.y_tail_cutoff(params),
            num_points=CDF_GRID_POINTS,
        )
    if continuous.size == 0:
        raise InsufficientDataError(f"no positive {quantity} samples to compare")

    edges = _quantile_edges(grid, cdf, num_bins, float(continuous.max()))
    counts, _ = np.histogram(continuous, bins=edges)
    widths = np.diff(edges)
    heights = counts / (total * widths)
    midpoints = 0.5 * (edges[:-1] + edges[1:])

    ks = stats.kstest(continuous, lambda v: np.interp(v, grid, np.minimum(cdf, 1.0)))
    logger.debug(f"Density comparison for {quantity}: n={total}, bins={num_bins}, sup distance={ks.statistic:.4g}")

    atom_mass = atom_count / total
    return DensityComparison(
        quantity=quantity,
        sample_count=total,
        bin_edges=edges.tolist(),
        heights=heights.tolist(),
        grid=midpoints.tolist(),
        analytic_density=np.asarray(density(midpoints)).tolist(),
        sup_distance=float(ks.statistic),
        atom_mass=atom_mass,
        continuous_mass=continuous.size / total,
    )
