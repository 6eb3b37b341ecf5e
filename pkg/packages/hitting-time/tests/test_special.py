import math

import numpy as np
import pytest
from hitting_time import special
from hitting_time.special import (
    bessel_i_log,
    levy_cdf,
    levy_median,
    levy_pdf,
    levy_sf,
    quarter_integrand,
    quarter_quadrature,
    zeta_density,
    zeta_survival,
    zeta_tail,
    zeta_total_mass,
)
from scipy import integrate
from scipy.special import gammaln, iv, ive


@pytest.mark.parametrize("k", [0, 1, 2, 7, 30])
@pytest.mark.parametrize("x", [1e-3, 0.5, 1.0, 3.0, 25.0, 300.0])
def test_bessel_i_log_matches_scipy(k, x):
    """log I_k(x) agrees with the unscaled scipy routine where that one is finite."""
    expected = math.log(iv(k, x))
    assert bessel_i_log(k, x) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_bessel_i_log_large_argument_does_not_overflow():
    """Arguments where I_k itself overflows still give the leading asymptotics."""
    # Arrange
    x = 1.0e6

    # Act
    value = bessel_i_log(3, x)

    # Assert
    assert math.isfinite(value)
    assert value == pytest.approx(x - 0.5 * math.log(2 * math.pi * x), abs=1e-4)


def test_bessel_i_log_at_zero():
    assert bessel_i_log(0, 0.0) == 0.0
    assert bessel_i_log(2, 0.0) == -math.inf


def test_bessel_i_log_series_where_scaled_routine_underflows():
    """For k far above x the leading power-series term dominates."""
    k, x = 500, 1.0
    assert ive(k, x) == 0.0
    leading = k * math.log(x / 2) - gammaln(k + 1)
    assert bessel_i_log(k, x) == pytest.approx(leading, abs=1e-3)


def test_bessel_i_log_vectorised():
    x = np.array([0.0, 1.0, 10.0])
    out = bessel_i_log(1, x)
    assert out.shape == (3,)
    assert out[0] == -math.inf
    assert np.allclose(out[1:], np.log(iv(1, x[1:])), rtol=1e-10)


def test_log_ive_rejects_negative_argument():
    with pytest.raises(ValueError):
        special.log_ive(1, -1.0)


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("u", [0.1, 1.0, 10.0, 100.0, 1e3, 1e5])
def test_zeta_survival_matches_closed_form_for_one_customer(lam, u):
    """Pr(zeta(1) > u) = exp(-x)(I_0(x) + I_1(x)) with x = 2 lam u."""
    x = 2 * lam * u
    closed_form = ive(0, x) + ive(1, x)
    assert zeta_survival(lam, u) == pytest.approx(closed_form, abs=1e-8)


def test_zeta_survival_edges():
    assert zeta_survival(1.0, 0.0) == 1.0
    with pytest.raises(ValueError):
        zeta_survival(0.0, 1.0)
    with pytest.raises(ValueError):
        zeta_survival(1.0, 1.0, k=0)


@pytest.mark.parametrize("k", [1, 2, 5])
@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_zeta_density_integrates_to_one(k, lam):
    assert zeta_total_mass(k, lam) == pytest.approx(1.0, abs=1e-6)


def test_zeta_density_small_u_limit():
    """f_1(u) tends to lam as u decreases to 0, and vanishes for u <= 0."""
    lam = 1.7
    assert zeta_density(1, lam, 1e-9) == pytest.approx(lam, rel=1e-6)
    assert zeta_density(1, lam, 0.0) == 0.0
    assert zeta_density(1, lam, -1.0) == 0.0


def test_zeta_density_rejects_non_positive_rate():
    with pytest.raises(ValueError):
        zeta_density(1, 0.0, 1.0)


def test_zeta_tail_one_customer_expansion():
    """For k = 1 the tail reads (pi lam u)^(-1/2) (1 - 1/(16 lam u))."""
    lam, u = 1.3, 500.0
    expected = (1 - 1 / (16 * lam * u)) / math.sqrt(math.pi * lam * u)
    assert zeta_tail(1, lam, u) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("k", [1, 3])
def test_zeta_tail_agrees_with_quadrature(k):
    lam = 1.0
    u = 300.0 * k * k
    assert zeta_tail(k, lam, u) == pytest.approx(
        zeta_survival(lam, u, k=k), rel=1e-6
    )


def test_levy_cdf_and_sf_are_complementary():
    u = np.logspace(-3, 4, 50)
    assert np.allclose(levy_cdf(u) + levy_sf(u), 1.0, atol=1e-15)
    assert levy_cdf(0.0) == 0.0
    assert levy_sf(-1.0) == 1.0


def test_levy_median():
    assert levy_cdf(levy_median()) == pytest.approx(0.5, abs=1e-12)


def test_levy_pdf_integrates_to_cdf():
    value, _ = integrate.quad(levy_pdf, 0.0, 2.0)
    assert value == pytest.approx(levy_cdf(2.0), abs=1e-10)


@pytest.mark.parametrize("u", [0.0, 1e-6, 0.1, 0.25, 0.4, 0.499999, 0.5])
def test_quarter_integrand_is_linear(u):
    """Composing the Levy tail with the normal quantile gives 1 - 2u."""
    assert quarter_integrand(u) == pytest.approx(1 - 2 * u, abs=1e-12)


def test_quarter_quadrature_is_one_quarter():
    assert quarter_quadrature() == pytest.approx(0.25, abs=1e-9)


def test_bessel_i_log_reference_value():
    assert bessel_i_log(1, 2.0) == pytest.approx(math.log(1.5906368546373291), rel=1e-12)


def test_levy_cdf_reference_value():
    assert levy_cdf(1.0) == pytest.approx(0.31731050786291404, abs=1e-12)


@pytest.mark.parametrize("u", [0.1, 1.0, 10.0])
def test_levy_pdf_is_derivative_of_cdf(u):
    h = 1e-5 * u
    slope = (levy_cdf(u + h) - levy_cdf(u - h)) / (2 * h)
    assert slope == pytest.approx(levy_pdf(u), rel=1e-6)


def test_zeta_density_large_u_asymptotics():
    """f_1(u) u^{3/2} tends to 1 / (2 sqrt(pi lam))."""
    lam, u = 0.8, 1e7
    assert zeta_density(1, lam, u) * u**1.5 == pytest.approx(
        1 / (2 * math.sqrt(math.pi * lam)), rel=1e-5
    )


def test_zeta_survival_large_u_asymptotics():
    """u Fbar(u)^2 tends to 1 / (pi lam)."""
    lam, u = 2.0, 1e7
    assert u * zeta_survival(lam, u) ** 2 == pytest.approx(1 / (math.pi * lam), rel=1e-6)


def test_zeta_survival_is_monotone():
    grid = np.logspace(-2, 4, 40)
    values = [zeta_survival(1.0, u) for u in grid]
    assert all(a >= b for a, b in zip(values, values[1:]))
