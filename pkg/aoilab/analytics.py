"""Closed-form distributions and moments under one-packet-buffer replacement.

Every function is a pure function of SystemParams. Moments are written in the
utilization parameterization (rho = lambda/mu) with the (1+rho)^k groupings kept
intact, which stays numerically stable for large rho.

Degenerate utilizations (rho < 1e-12) make the 1/rho terms overflow; the
moment and age functions return +inf there instead of NaN.
"""

import math
from collections.abc import Callable, Iterable

import numpy as np
from scipy import integrate

from aoilab.exceptions import DomainError
from aoilab.models.params import SystemParams
from aoilab.models.report import ReplacementComponents, WaitDistribution

QUAD_EPSABS = 1e-10
QUAD_LIMIT = 200
TAIL_EPSILON = 1e-16
MIN_RHO = 1e-12

FloatOrArray = float | np.ndarray


def _diverges(params: SystemParams) -> bool:
    return params.rho < MIN_RHO


def _as_float_or_array(value: np.ndarray, scalar: bool) -> FloatOrArray:
    return float(value) if scalar else value


# ---------------------------------------------------------------------------
# Waiting time
# ---------------------------------------------------------------------------


def prob_wait_zero(params: SystemParams) -> float:
    """Probability that a computed packet starts service on arrival.

    No arrival during the predecessor's service time: mu / (lambda + mu).
    """
    return params.mu / (params.lambda_ + params.mu)


def pdf_wait(w: FloatOrArray, params: SystemParams) -> FloatOrArray:
    """Density of the continuous part of the waiting time, lambda * exp(-(lambda+mu) w).

    Args:
        w: Waiting time(s), strictly positive
        params: System parameters

    Returns:
        Density value(s); the continuous mass is lambda / (lambda + mu)

    Raises:
        DomainError: If any w <= 0 (query the atom with prob_wait_zero)
    """
    scalar = np.isscalar(w)
    arr = np.asarray(w, dtype=float)
    if np.any(arr <= 0.0):
        raise DomainError("pdf_wait is defined for w > 0; use prob_wait_zero for the atom")
    out = params.lambda_ * np.exp(-(params.lambda_ + params.mu) * arr)
    return _as_float_or_array(out, scalar)


def wait_distribution(params: SystemParams) -> WaitDistribution:
    """Atom-plus-density description of the waiting time."""
    return WaitDistribution(
        atom_at_zero=prob_wait_zero(params),
        density_rate_coeff=params.lambda_,
        density_decay=params.lambda_ + params.mu,
    )


def mean_w(params: SystemParams) -> float:
    """Mean waiting time, lambda / (lambda + mu)^2."""
    total = params.lambda_ + params.mu
    return params.lambda_ / (total * total)


def cdf_wait(w: float, params: SystemParams) -> float:
    """Pr(W <= w), atom included; the continuous part is integrated numerically."""
    if w < 0.0:
        return 0.0
    atom = prob_wait_zero(params)
    if w == 0.0:
        return atom
    return atom + integrate_density(lambda v: pdf_wait(v, params), 0.0, w)


# ---------------------------------------------------------------------------
# Transmission time of computed packets
# ---------------------------------------------------------------------------


def _check_conditioning(value: float, w: float, s: float, name: str) -> None:
    if value < 0.0 or w < 0.0:
        raise DomainError(f"{name} and w must be non-negative, got {name}={value!r}, w={w!r}")
    if s <= 0.0:
        raise DomainError(f"s must be positive, got {s!r}")


def pdf_x_given_ws(x: float, w: float, s: float, params: SystemParams) -> float:
    """Density of X_k given the predecessor's waiting time w and service time s.

    Branches are tested in order with half-open intervals; ties go to the
    earlier branch. w == 0 collapses to the plain exponential.

    Raises:
        DomainError: If x or w is negative, or s is not positive
    """
    _check_conditioning(x, w, s, "x")
    lam = params.lambda_
    if w == 0.0:
        return lam * math.exp(-lam * x)
    if x <= min(w, s):
        return lam * math.exp(-lam * x) - lam * math.exp(-lam * s)
    if w < x <= s:
        return lam * math.exp(-lam * x)
    if max(w, s) < x <= w + s:
        return lam * math.exp(-lam * s)
    if x > w + s:
        return lam * math.exp(-lam * (x - w))
    return 0.0


def survival_x_given_ws(x: float, w: float, s: float, params: SystemParams) -> float:
    """Pr(X_k > x | W_{k-1} = w, S_{k-1} = s); its negative derivative is pdf_x_given_ws."""
    _check_conditioning(x, w, s, "x")
    lam = params.lambda_
    tail = math.exp(-lam * s)
    if w == 0.0:
        return math.exp(-lam * x)
    if x <= min(w, s):
        return x * lam * tail + math.exp(-lam * x)
    if w < x <= s:
        return w * lam * tail + math.exp(-lam * x)
    if s < x <= w:
        return s * lam * tail + tail
    if x <= w + s:
        return (w + s - x) * lam * tail + tail
    return math.exp(-lam * (x - w))


def conditional_mean_x(w: float, s: float, params: SystemParams) -> float:
    """E[X_k | w, s] by integrating the conditional survival function."""
    kinks = [p for p in (min(w, s), max(w, s), w + s) if p > 0.0]
    upper = w + s + _tail_cutoff([(1.0, params.lambda_)])
    return integrate_density(lambda v: survival_x_given_ws(v, w, s, params), 0.0, upper, kinks)


def mean_x(params: SystemParams) -> float:
    """Mean transmission time of a computed packet."""
    if _diverges(params):
        return math.inf
    rho = params.rho
    return (1.0 / params.mu) * (
        1.0 + 1.0 / (rho * (1.0 + rho)) - rho**3 / (1.0 + rho) ** 4 - rho**2 / (1.0 + rho) ** 2
    )


# ---------------------------------------------------------------------------
# Inter-arrival time of computed packets
# ---------------------------------------------------------------------------


def pdf_y_given_ws(y: float, w: float, s: float, params: SystemParams) -> float:
    """Density of Y_k given the predecessor's waiting time w and service time s.

    Raises:
        DomainError: If y or w is negative, or s is not positive
    """
    _check_conditioning(y, w, s, "y")
    lam = params.lambda_
    if y < w:
        return 0.0
    if y < w + s:
        return lam * math.exp(-lam * (w + s - y))
    return lam * math.exp(-lam * (y - w))


def pdf_y(y: FloatOrArray, params: SystemParams) -> FloatOrArray:
    """Unconditional density of Y_k, a three-term exponential mixture.

    Raises:
        DomainError: If any y < 0
    """
    scalar = np.isscalar(y)
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0.0):
        raise DomainError("pdf_y is defined for y >= 0")
    lam, mu = params.lambda_, params.mu
    total = lam + mu
    a = lam * lam / mu + lam * mu / total
    b = lam * mu * (lam + 2.0 * mu) / (total * total)
    c = lam * lam / mu + 2.0 * lam * mu / total
    out = a * np.exp(-lam * arr) + b * np.exp(-mu * arr) - (c + lam * lam * arr) * np.exp(-total * arr)
    return _as_float_or_array(out, scalar)


def cdf_y(y: float, params: SystemParams) -> float:
    """Pr(Y_k <= y) by quadrature of pdf_y."""
    if y <= 0.0:
        return 0.0
    return integrate_density(lambda v: pdf_y(v, params), 0.0, y)


def mean_y(params: SystemParams) -> float:
    """Mean inter-arrival time of computed packets (equals the mean inter-departure time)."""
    if _diverges(params):
        return math.inf
    rho = params.rho
    return (1.0 / params.mu) * (1.0 + rho + rho * rho) / (rho * (1.0 + rho))


def mean_z(params: SystemParams) -> float:
    """Mean inter-departure time; equal to mean_y over a long horizon."""
    return mean_y(params)


def mean_y_sq(params: SystemParams) -> float:
    """Second moment of Y_k."""
    if _diverges(params):
        return math.inf
    rho = params.rho
    return (2.0 / params.mu**2) * (1.0 + 1.0 / rho**2 - rho * (1.0 + 2.0 * rho) / (1.0 + rho) ** 4)


# ---------------------------------------------------------------------------
# System time coupling
# ---------------------------------------------------------------------------


def mean_wplus_times_y(params: SystemParams) -> float:
    """E[(W_{k-1} + S_{k-1} - Y_k)^+ Y_k], i.e. E[W_k Y_k]."""
    rho = params.rho
    return (1.0 / params.mu**2) * (1.0 / (1.0 + rho) - (1.0 + 2.0 * rho) / (1.0 + rho) ** 4)


def mean_ty(params: SystemParams) -> float:
    """E[T_k Y_k]; equals mean_wplus_times_y + mean_y / mu since S_k and Y_k are independent."""
    if _diverges(params):
        return math.inf
    rho = params.rho
    return (1.0 / params.mu**2) * (1.0 + 1.0 / rho - (1.0 + 2.0 * rho) / (1.0 + rho) ** 4)


# ---------------------------------------------------------------------------
# Average age
# ---------------------------------------------------------------------------


def avg_age_replacement(params: SystemParams) -> float:
    """Closed-form long-run average age with one-packet-buffer replacement."""
    if _diverges(params):
        return math.inf
    rho = params.rho
    return (1.0 / params.mu) * (
        2.0
        + 2.0 / rho
        + (1.0 + 3.0 * rho) / (1.0 + rho) ** 2
        - rho**3 / (1.0 + rho) ** 4
        - 2.0 * (1.0 + rho) / (1.0 + rho + rho * rho)
    )


def avg_age_from_components(params: SystemParams) -> float:
    """Average age assembled from its moments.

    (E[X] E[Y] + E[TY] + E[Y^2] / 2) / E[Y], using E[X_{k-1} Z_k] = E[X] E[Y].
    """
    if _diverges(params):
        return math.inf
    ey = mean_y(params)
    return (mean_x(params) * ey + mean_ty(params) + 0.5 * mean_y_sq(params)) / ey


def mean_peak_age(params: SystemParams) -> float:
    """Mean age just before a delivery: E[X] + E[W] + 1/mu + E[Y].

    The peak before delivery k is X_{k-1} + T_{k-1} + Z_k; linearity gives the sum.
    """
    if _diverges(params):
        return math.inf
    return mean_x(params) + mean_w(params) + 1.0 / params.mu + mean_y(params)


def avg_age_min(mu: float) -> float:
    """Asymptotic minimum average age as rho grows without bound, 2/mu."""
    return 2.0 / mu


def replacement_components(params: SystemParams) -> ReplacementComponents:
    """Every closed-form ingredient of the average age in one model."""
    return ReplacementComponents(
        params=params,
        prob_wait_zero=prob_wait_zero(params),
        mean_w=mean_w(params),
        mean_x=mean_x(params),
        mean_y=mean_y(params),
        mean_y_sq=mean_y_sq(params),
        mean_wplus_times_y=mean_wplus_times_y(params),
        mean_ty=mean_ty(params),
        avg_age=avg_age_replacement(params),
        avg_age_min=avg_age_min(params.mu),
    )


# ---------------------------------------------------------------------------
# Numerical integration
# ---------------------------------------------------------------------------


def _tail_cutoff(terms: Iterable[tuple[float, float]]) -> float:
    """Point beyond which every coeff * exp(-decay * t) envelope is below TAIL_EPSILON.

    Args:
        terms: (coefficient, decay rate) pairs
    """
    cutoff = 0.0
    for coeff, decay in terms:
        cutoff = max(cutoff, math.log(max(abs(coeff), 1.0) / TAIL_EPSILON) / decay)
    return cutoff


def y_tail_cutoff(params: SystemParams) -> float:
    """Truncation point for integrals of pdf_y."""
    lam, mu = params.lambda_, params.mu
    return _tail_cutoff([(lam * lam / mu + lam, lam), (lam + mu, mu), (lam * lam / mu + 2 * lam, lam + mu)])


def wait_tail_cutoff(params: SystemParams) -> float:
    """Truncation point for integrals of pdf_wait."""
    return _tail_cutoff([(params.lambda_, params.lambda_ + params.mu)])


def integrate_density(
    fn: Callable[[float], float],
    lower: float,
    upper: float,
    points: Iterable[float] | None = None,
) -> float:
    """Adaptive quadrature of a scalar function on a finite interval.

    Args:
        fn: Integrand
        lower: Lower limit
        upper: Upper limit (infinite tails are truncated by the caller)
        points: Interior breakpoints where the integrand has kinks

    Returns:
        Integral value at absolute tolerance QUAD_EPSABS
    """
    if upper <= lower:
        return 0.0
    inner = sorted({p for p in (points or ()) if lower < p < upper})
    value, _ = integrate.quad(
        fn,
        lower,
        upper,
        points=inner or None,
        epsabs=QUAD_EPSABS,
        epsrel=1e-10,
        limit=QUAD_LIMIT,
    )
    return float(value)


def tabulate_cdf(
    pdf: Callable[[float], float],
    upper: float,
    num_points: int = 2001,
    offset: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """CDF on a uniform grid by segment-wise quadrature of a density.

    Args:
        pdf: Scalar density
        upper: Right end of the grid
        num_points: Grid size
        offset: Mass already accumulated at the left end (an atom at zero)

    Returns:
        (grid, cdf values) with cdf[0] == offset
    """
    grid = np.linspace(0.0, upper, num_points)
    pieces = [integrate_density(pdf, a, b) for a, b in zip(grid[:-1], grid[1:], strict=True)]
    cdf = offset + np.concatenate(([0.0], np.cumsum(pieces)))
    return grid, cdf


def mixture_over_wait_and_service(
    fn: Callable[[float, float], float],
    params: SystemParams,
    w_points: Iterable[float] = (),
    s_points: Callable[[float], Iterable[float]] | None = None,
) -> float:
    """Expectation of fn(W, S) over the waiting-time mixture and S ~ Exp(mu).

    Args:
        fn: Function of (w, s)
        params: System parameters
        w_points: Kinks of the outer integrand in w
        s_points: Kinks of the inner integrand in s, as a function of w

    Returns:
        Pr(W=0) E[fn(0, S)] + integral over w > 0 of the density-weighted E[fn(w, S)]
    """
    lam, mu = params.lambda_, params.mu
    s_max = _tail_cutoff([(mu, mu)])
    w_max = wait_tail_cutoff(params)

    def over_service(w: float) -> float:
        def integrand(s: float) -> float:
            if s <= 0.0:
                return 0.0
            return fn(w, s) * mu * math.exp(-mu * s)

        kinks = s_points(w) if s_points is not None else ()
        return integrate_density(integrand, 0.0, s_max, kinks)

    atom = prob_wait_zero(params) * over_service(0.0)
    continuous = integrate_density(
        lambda w: lam * math.exp(-(lam + mu) * w) * over_service(w) if w > 0.0 else 0.0,
        0.0,
        w_max,
        w_points,
    )
    return atom + continuous


def mixture_density(
    conditional_pdf: Callable[[float, float, float, SystemParams], float],
    value: float,
    params: SystemParams,
) -> float:
    """Mix a conditional density f(value | w, s) over W and S numerically.

    Used to cross-check pdf_y against pdf_y_given_ws, and the X marginal
    against pdf_x_given_ws.
    """
    return mixture_over_wait_and_service(
        lambda w, s: conditional_pdf(value, w, s, params),
        params,
        w_points=(value,),
        s_points=lambda w: (value, value - w),
    )


def mean_x_by_quadrature(params: SystemParams) -> float:
    """E[X_k] from the conditional survival function, independent of the closed form."""
    return mixture_over_wait_and_service(
        lambda w, s: conditional_mean_x(w, s, params),
        params,
        s_points=lambda w: (w,),
    )
