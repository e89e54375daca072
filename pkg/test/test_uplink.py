import logging
import pytest
import numpy as np
from scipy import integrate, special
from emfhole.fading import gain_laplace
from emfhole.input_parser import UserLocation
from emfhole.point_process import contact_distance_pdf
from emfhole.uplink import (
    ul_coverage,
    ul_exposure_cdf,
    ul_exposure_cdf_conditional_fading,
    ul_exposure_cdf_curve,
    ul_exposure_laplace,
    ul_exposure_percentile,
    ul_exposure_scale,
    ul_received_power_mean,
    ul_transmit_power,
)


@pytest.fixture
def audible_uplink(worst_case):
    """Uplink threshold low enough for coverage well inside (0, 1)"""
    return worst_case.replace(snr_threshold_ul=1.0e-3)


def test_ul_transmit_power(worst_case):
    assert worst_case.x_max == pytest.approx(560.4, abs=0.1)
    assert ul_transmit_power(100.0, worst_case) == pytest.approx(
        8.0e-6 * 100.0 ** 1.6
    )
    power = ul_transmit_power(np.array([0.0, 600.0, 1.0e4]), worst_case)
    assert np.allclose(power, [0.0, 0.2, 0.2])
    x = np.linspace(1.0, 1000.0, 200)
    assert np.all(np.diff(ul_transmit_power(x, worst_case)) >= 0)
    assert ul_received_power_mean(100.0, worst_case) == pytest.approx(
        8.0e-6 * 100.0 ** 1.6 * 1.0e-4 * 100.0 ** -4.0
    )


@pytest.mark.parametrize("m", [1, 3])
@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_ul_coverage_direct(audible_uplink, m, loc):
    model = audible_uplink.replace(nakagami_m=m)
    ul = model.uplink
    lambda_B = model.effective_bs_density
    R = model.point_process.hole_radius

    def integrand(x):
        g = m * ul.snr_threshold_ul * ul.noise_power_ul / (
            ul_received_power_mean(x, model)
        )
        return special.gammaincc(m, g) * contact_distance_pdf(
            x, lambda_B, R, loc
        )

    v = loc.v(R)
    expected, _ = integrate.quad(
        integrand, v, v + 2000.0, points=[model.x_max], limit=400,
        epsabs=1e-12,
    )
    coverage = ul_coverage(model, loc)
    assert 0.0 < coverage < 1.0
    assert coverage == pytest.approx(expected, abs=1e-6)


def test_ul_coverage_power_control(audible_uplink, caplog):
    caplog.set_level(logging.INFO)
    low = ul_coverage(audible_uplink.replace(epsilon=0.2),
                      UserLocation.OUTSIDE)
    high = ul_coverage(audible_uplink.replace(epsilon=1.0),
                       UserLocation.OUTSIDE)
    assert high > low


@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_ul_exposure_percentile_grows_with_power_control(worst_case, loc):
    percentiles = [
        ul_exposure_percentile(0.95, worst_case.replace(epsilon=eps), loc)
        for eps in (0.2, 0.4, 0.6, 1.0)
    ]
    assert np.all(np.diff(percentiles) > 0)
    # saturated devices bound the exposure
    assert percentiles[-1] < 5.0 * ul_exposure_scale(worst_case) * (
        worst_case.uplink.p_max
    )


def test_ul_exposure_laplace(worst_case):
    for loc in UserLocation:
        assert ul_exposure_laplace(0.0, worst_case, loc) == pytest.approx(1.0)
    s = np.array([1.0, 10.0, 100.0])
    values = ul_exposure_laplace(s, worst_case, UserLocation.OUTSIDE)
    assert values.shape == s.shape
    assert np.all(np.diff(values.real) < 0)


def test_ul_exposure_laplace_saturated(worst_case):
    # X_max = 1 m, every device inside a hole transmits at p_max
    model = worst_case.replace(p_max=worst_case.uplink.pu_coeff)
    assert model.x_max == pytest.approx(1.0)
    s = np.array([0.5, 30.0 - 2.0j])
    expected = gain_laplace(
        s * ul_exposure_scale(model) * model.uplink.p_max, 1
    )
    values = ul_exposure_laplace(s, model, UserLocation.INSIDE)
    assert np.allclose(values, expected, rtol=1e-12)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_ul_exposure_cdf_conditional_fading(worst_case, m, loc):
    model = worst_case.replace(nakagami_m=m)
    w = np.geomspace(1e-4, 5.0, 9)
    inverted = ul_exposure_cdf(w, model, loc)
    conditioned = ul_exposure_cdf_conditional_fading(w, model, loc)
    assert conditioned.shape == w.shape
    assert np.allclose(inverted, conditioned, atol=5e-4)
    assert np.all(np.diff(conditioned) >= 0)


def test_ul_exposure_bounded_power(worst_case):
    # exposure at the body never exceeds the saturated device by much
    w = ul_exposure_scale(worst_case) * worst_case.uplink.p_max * 20.0
    assert ul_exposure_cdf_conditional_fading(w, worst_case,
                                              UserLocation.OUTSIDE) > 0.999
    assert ul_exposure_cdf(w, worst_case, UserLocation.OUTSIDE) == (
        pytest.approx(1.0, abs=1e-3)
    )


@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_ul_exposure_percentile(worst_case, loc):
    percentile = ul_exposure_percentile(0.9, worst_case, loc)
    assert percentile > 0
    assert ul_exposure_cdf_conditional_fading(
        percentile, worst_case, loc
    ) == pytest.approx(0.9, abs=1e-3)

    curve = ul_exposure_cdf_curve(np.geomspace(1e-4, 5.0, 120), worst_case,
                                  loc)
    assert curve.raw_excursion() < 1e-3
    assert curve.percentile(0.9) == pytest.approx(percentile, rel=0.05)
