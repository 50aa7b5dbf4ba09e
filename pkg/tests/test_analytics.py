"""Tests for closed-form distributions and moments."""

import math

import numpy as np
import pytest

from aoilab import analytics
from aoilab.exceptions import DomainError
from aoilab.models import SystemParams


def random_params(count: int, seed: int, low: float = 0.05, high: float = 50.0) -> list[SystemParams]:
    rng = np.random.default_rng(seed)
    rhos = np.exp(rng.uniform(math.log(low), math.log(high), count))
    mus = rng.uniform(0.2, 5.0, count)
    return [SystemParams.from_rho(float(r), float(m)) for r, m in zip(rhos, mus, strict=True)]


def test_avg_age_spot_value_unit_rates(unit_params):
    """Test the average age at lambda = mu = 1."""
    assert analytics.avg_age_replacement(unit_params) == pytest.approx(3.6041666666666665, rel=1e-14)


def test_avg_age_spot_value_high_utilization():
    """Test the average age at rho = 100."""
    params = SystemParams.from_rho(100.0)

    assert analytics.avg_age_replacement(params) == pytest.approx(2.0199, abs=1e-4)


@pytest.mark.parametrize("rho", [0.05, 0.3, 1.0, 2.0, 7.5, 50.0])
def test_avg_age_scales_with_mu(rho):
    """Test the average age is 1/mu times a function of rho."""
    reference = analytics.avg_age_replacement(SystemParams.from_rho(rho, mu=1.0))

    for mu in (0.5, 2.0, 8.0):
        scaled = analytics.avg_age_replacement(SystemParams.from_rho(rho, mu=mu))
        assert scaled * mu == pytest.approx(reference, rel=1e-12, abs=0.0)


def test_assembly_identity_over_random_rho():
    """Test the moment assembly reproduces the closed form for 100 random rho."""
    for params in random_params(100, seed=1):
        direct = analytics.avg_age_replacement(params)
        assembled = analytics.avg_age_from_components(params)
        assert assembled == pytest.approx(direct, rel=1e-12), params.rho


def test_asymptotic_minimum():
    """Test the average age approaches 2/mu as rho grows."""
    params = SystemParams.from_rho(1e4)

    assert abs(analytics.avg_age_replacement(params) - 2.0) < 3e-4
    assert analytics.avg_age_min(1.0) == 2.0
    assert analytics.avg_age_min(4.0) == 0.5


def test_avg_age_decreasing_in_rho():
    """Test the replacement age falls monotonically over a grid."""
    values = [analytics.avg_age_replacement(SystemParams.from_rho(r)) for r in np.arange(0.1, 3.01, 0.1)]

    assert all(b < a for a, b in zip(values, values[1:], strict=False))


def test_degenerate_rho_returns_inf():
    """Test tiny utilizations give +inf instead of NaN."""
    params = SystemParams.from_rho(1e-13)

    assert analytics.avg_age_replacement(params) == math.inf
    assert analytics.mean_y(params) == math.inf
    assert analytics.mean_x(params) == math.inf


def test_prob_wait_zero(unit_params):
    """Test the zero-wait atom."""
    assert analytics.prob_wait_zero(unit_params) == 0.5
    assert analytics.prob_wait_zero(SystemParams.from_rho(3.0)) == pytest.approx(0.25)


def test_pdf_wait_rejects_non_positive(unit_params):
    """Test the density is only defined for w > 0."""
    with pytest.raises(DomainError):
        analytics.pdf_wait(0.0, unit_params)
    with pytest.raises(DomainError):
        analytics.pdf_wait(np.array([1.0, -0.5]), unit_params)


def test_pdf_wait_vectorized(unit_params):
    """Test array input gives array output."""
    w = np.array([0.5, 1.0, 2.0])

    np.testing.assert_allclose(analytics.pdf_wait(w, unit_params), np.exp(-2.0 * w))
    assert isinstance(analytics.pdf_wait(0.5, unit_params), float)


def test_wait_distribution_masses(unit_params):
    """Test atom plus continuous mass is one."""
    dist = analytics.wait_distribution(unit_params)

    assert dist.atom_at_zero + dist.continuous_mass == pytest.approx(1.0)


def test_mean_w(unit_params):
    """Test E[W] = lambda / (lambda + mu)^2."""
    assert analytics.mean_w(unit_params) == 0.25


def test_cdf_wait(unit_params):
    """Test the wait CDF starts at the atom and reaches one."""
    assert analytics.cdf_wait(-1.0, unit_params) == 0.0
    assert analytics.cdf_wait(0.0, unit_params) == 0.5
    assert analytics.cdf_wait(1.0, unit_params) == pytest.approx(0.5 + 0.5 * (1 - math.exp(-2.0)), abs=1e-10)
    assert analytics.cdf_wait(40.0, unit_params) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("y", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_cdf_y_unit_rates(unit_params, y):
    """Test the Y CDF against its antiderivative at lambda = mu = 1."""
    # pdf_y = 2.25 e^-y - (2 + y) e^-2y
    exact = 2.25 * (1.0 - math.exp(-y)) - (1.0 - math.exp(-2.0 * y)) - 0.25 + math.exp(-2.0 * y) * (y / 2.0 + 0.25)

    assert analytics.cdf_y(y, unit_params) == pytest.approx(exact, abs=1e-9)


def test_cdf_y_limits(unit_params):
    """Test the Y CDF is zero at the origin and reaches one in the tail."""
    assert analytics.cdf_y(-1.0, unit_params) == 0.0
    assert analytics.cdf_y(0.0, unit_params) == 0.0
    assert analytics.cdf_y(60.0, unit_params) == pytest.approx(1.0, abs=1e-9)


def test_pdf_y_at_zero(unit_params):
    """Test the Y density at the origin."""
    assert analytics.pdf_y(0.0, unit_params) == pytest.approx(0.25, abs=1e-15)


def test_pdf_y_rejects_negative(unit_params):
    """Test negative y is outside the support."""
    with pytest.raises(DomainError):
        analytics.pdf_y(-0.1, unit_params)


def test_mean_y_unit_rates(unit_params):
    """Test E[Y] = 1.5 at lambda = mu = 1."""
    assert analytics.mean_y(unit_params) == pytest.approx(1.5)
    assert analytics.mean_z(unit_params) == analytics.mean_y(unit_params)


def test_mean_ty_splits_into_wait_and_service():
    """Test E[TY] = E[(W+S-Y)^+ Y] + E[Y]/mu over random draws."""
    for params in random_params(20, seed=2):
        lhs = analytics.mean_ty(params)
        rhs = analytics.mean_wplus_times_y(params) + analytics.mean_y(params) / params.mu
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_moments_match_density_quadrature(unit_params):
    """Test E[Y] and E[Y^2] against integrals of pdf_y."""
    upper = analytics.y_tail_cutoff(unit_params)

    first = analytics.integrate_density(lambda y: y * analytics.pdf_y(y, unit_params), 0.0, upper)
    second = analytics.integrate_density(lambda y: y * y * analytics.pdf_y(y, unit_params), 0.0, upper)

    assert first == pytest.approx(analytics.mean_y(unit_params), rel=1e-9)
    assert second == pytest.approx(analytics.mean_y_sq(unit_params), rel=1e-9)


def test_densities_normalize_over_random_draws():
    """Test every density integrates to its stated mass."""
    rng = np.random.default_rng(3)
    for params in random_params(50, seed=4):
        lam, mu = params.lambda_, params.mu

        y_mass = analytics.integrate_density(
            lambda y, p=params: analytics.pdf_y(y, p), 0.0, analytics.y_tail_cutoff(params)
        )
        assert y_mass == pytest.approx(1.0, abs=1e-8)

        w_mass = analytics.integrate_density(
            lambda w, p=params: analytics.pdf_wait(w, p), 0.0, analytics.wait_tail_cutoff(params)
        )
        assert w_mass == pytest.approx(lam / (lam + mu), abs=1e-8)

        w = float(rng.exponential(1.0 / (lam + mu))) if rng.random() < 0.8 else 0.0
        s = float(rng.exponential(1.0 / mu)) + 1e-6
        upper = w + s + analytics._tail_cutoff([(1.0, lam)])
        kinks = (min(w, s), max(w, s), w + s)

        x_mass = analytics.integrate_density(
            lambda x, w=w, s=s, p=params: analytics.pdf_x_given_ws(x, w, s, p), 0.0, upper, kinks
        )
        assert x_mass == pytest.approx(1.0, abs=1e-8)

        y_cond_mass = analytics.integrate_density(
            lambda y, w=w, s=s, p=params: analytics.pdf_y_given_ws(y, w, s, p), 0.0, upper, (w, w + s)
        )
        assert y_cond_mass == pytest.approx(1.0, abs=1e-8)


def test_pdf_x_given_ws_branches():
    """Test each branch of the conditional X density at lambda = 1."""
    params = SystemParams.from_rho(1.0)
    e = math.exp

    # w < s
    assert analytics.pdf_x_given_ws(0.5, 1.0, 2.0, params) == pytest.approx(e(-0.5) - e(-2.0))
    assert analytics.pdf_x_given_ws(1.5, 1.0, 2.0, params) == pytest.approx(e(-1.5))
    assert analytics.pdf_x_given_ws(2.5, 1.0, 2.0, params) == pytest.approx(e(-2.0))
    assert analytics.pdf_x_given_ws(4.0, 1.0, 2.0, params) == pytest.approx(e(-3.0))
    # s < w: flat zero between s and w
    assert analytics.pdf_x_given_ws(1.5, 2.0, 1.0, params) == 0.0
    # no wait
    assert analytics.pdf_x_given_ws(1.5, 0.0, 1.0, params) == pytest.approx(e(-1.5))


def test_survival_matches_density():
    """Test the survival function's slope is minus the density."""
    params = SystemParams.from_rho(1.3)
    h = 1e-6
    for w, s in [(0.4, 1.1), (1.1, 0.4), (0.0, 0.7)]:
        assert analytics.survival_x_given_ws(0.0, w, s, params) == pytest.approx(1.0)
        for x in (0.2, 0.8, 1.3, 3.0):
            slope = (analytics.survival_x_given_ws(x + h, w, s, params) - analytics.survival_x_given_ws(x - h, w, s, params)) / (2 * h)
            assert -slope == pytest.approx(analytics.pdf_x_given_ws(x, w, s, params), abs=1e-5)


def test_conditioning_domain_errors(unit_params):
    """Test negative values and non-positive service are rejected."""
    with pytest.raises(DomainError):
        analytics.pdf_x_given_ws(-1.0, 0.0, 1.0, unit_params)
    with pytest.raises(DomainError):
        analytics.pdf_y_given_ws(1.0, 0.0, 0.0, unit_params)


def test_tabulate_cdf_reaches_one(unit_params):
    """Test the tabulated Y CDF is monotone and ends at one."""
    grid, cdf = analytics.tabulate_cdf(
        lambda y: analytics.pdf_y(y, unit_params), analytics.y_tail_cutoff(unit_params), num_points=401
    )

    assert grid[0] == 0.0
    assert cdf[0] == 0.0
    assert np.all(np.diff(cdf) >= 0.0)
    assert cdf[-1] == pytest.approx(1.0, abs=1e-9)


def test_replacement_components(unit_params):
    """Test the bundled closed forms."""
    c = analytics.replacement_components(unit_params)

    assert c.prob_wait_zero == 0.5
    assert c.mean_y == pytest.approx(1.5)
    assert c.avg_age == pytest.approx(analytics.avg_age_replacement(unit_params))
    assert c.avg_age_min == 2.0


def test_mean_peak_age_exceeds_average(unit_params):
    """Test the mean peak age sits above the time-average age."""
    assert analytics.mean_peak_age(unit_params) > analytics.avg_age_replacement(unit_params)


@pytest.mark.slow
@pytest.mark.parametrize("rho", [0.3, 1.0, 4.0])
def test_mean_x_by_quadrature(rho):
    """Test the closed-form E[X] against mixing the conditional survival function."""
    params = SystemParams.from_rho(rho)

    assert analytics.mean_x_by_quadrature(params) == pytest.approx(analytics.mean_x(params), rel=1e-7)


@pytest.mark.slow
@pytest.mark.parametrize(("rho", "mu"), [(0.5, 1.0), (1.7, 1.0), (3.0, 2.0)])
def test_pdf_y_matches_mixture(rho, mu):
    """Test the unconditional Y density against mixing the conditional one over [0, 10/mu]."""
    params = SystemParams.from_rho(rho, mu=mu)

    for y in np.linspace(0.0, 10.0 / mu, 21):
        mixed = analytics.mixture_density(analytics.pdf_y_given_ws, float(y), params)
        assert mixed == pytest.approx(analytics.pdf_y(float(y), params), rel=1e-7, abs=1e-9), y


@pytest.mark.slow
def test_mean_wplus_times_y_by_quadrature():
    """Test E[(W+S-Y)^+ Y] by mixing over the conditional Y density."""
    params = SystemParams.from_rho(1.4)
    lam = params.lambda_

    def given_ws(w: float, s: float) -> float:
        upper = w + s
        return analytics.integrate_density(
            lambda y: (upper - y) * y * lam * math.exp(-lam * (upper - y)), w, upper
        )

    value = analytics.mixture_over_wait_and_service(given_ws, params)

    assert value == pytest.approx(analytics.mean_wplus_times_y(params), rel=1e-7)
