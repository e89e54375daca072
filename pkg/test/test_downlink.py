import logging
import pytest
import numpy as np
from scipy import integrate, special
from emfhole.input_parser import UserLocation
from emfhole.gilpelaez import BracketFailure
from emfhole.downlink import (
    ComplianceCheck,
    compliance_distance,
    dl_conditional_exposure_cdf,
    dl_conditional_exposure_laplace,
    dl_conditional_exposure_percentile,
    dl_coverage,
    dl_exposure_cdf,
    dl_exposure_compliance,
    dl_exposure_laplace,
    dl_exposure_mean,
    dl_exposure_percentile,
    dl_outage,
    dl_received_power_mean,
)


def _direct_coverage(model, loc):
    dl = model.downlink
    lambda_B = model.effective_bs_density
    v = loc.v(model.point_process.hole_radius)
    unit = dl_received_power_mean(1.0, model)

    def integrand(x):
        g = dl.nakagami_m * dl.snr_threshold_dl * dl.noise_power_dl * (
            x ** dl.alpha / unit
        )
        return (
            special.gammaincc(dl.nakagami_m, g) * 2.0 * np.pi * lambda_B * x
            * np.exp(-lambda_B * np.pi * (x ** 2 - v ** 2))
        )

    value, _ = integrate.quad(integrand, v, v + 1500.0, limit=400,
                              points=[v + 50.0, v + 150.0, v + 400.0],
                              epsabs=1e-12)
    return value


def test_dl_received_power_mean(worst_case):
    dl = worst_case.downlink
    assert dl_received_power_mean(100.0, worst_case) == pytest.approx(
        dl.eirp * dl.user_gain * dl.ref_path_gain * 1.0e-8
    )
    assert dl_received_power_mean(0.0, worst_case) == np.inf


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("hole_radius", [0.0, 50.0])
@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_dl_coverage_direct(worst_case, m, hole_radius, loc):
    model = worst_case.replace(
        nakagami_m=m, hole_radius=hole_radius, snr_threshold_dl=1.0e4
    )
    coverage = dl_coverage(model, loc)
    assert 0.0 <= coverage <= 1.0
    assert coverage == pytest.approx(_direct_coverage(model, loc), abs=1e-6)
    assert dl_outage(model, loc) == pytest.approx(1.0 - coverage)


def test_dl_coverage_ordering(worst_case, caplog):
    caplog.set_level(logging.INFO)
    outside = dl_coverage(worst_case, UserLocation.OUTSIDE)
    inside = dl_coverage(worst_case, UserLocation.INSIDE)
    assert inside < outside
    stricter = dl_coverage(
        worst_case.replace(snr_threshold_dl=10.0 * worst_case.downlink
                           .snr_threshold_dl),
        UserLocation.OUTSIDE,
    )
    assert stricter < outside
    denser = dl_coverage(worst_case.replace(lambda_b=1.0e-4),
                         UserLocation.OUTSIDE)
    assert denser > outside


def test_dl_exposure_laplace(worst_case):
    for loc in UserLocation:
        assert dl_exposure_laplace(0.0, worst_case, loc) == pytest.approx(1.0)
    s = np.array([0.1, 1.0, 10.0, 100.0])
    values = dl_exposure_laplace(s, worst_case, UserLocation.OUTSIDE)
    assert np.all(np.abs(values.imag) < 1e-12)
    assert np.all(np.diff(values.real) < 0)
    # inside a hole the closest BS is farther away
    inside = dl_exposure_laplace(s, worst_case, UserLocation.INSIDE)
    assert np.all(inside.real > values.real)

    conditional = dl_conditional_exposure_laplace(s, 30.0, worst_case)
    assert np.all(np.abs(conditional) <= 1.0)
    with pytest.raises(ValueError):
        dl_conditional_exposure_laplace(s, 0.0, worst_case)


def test_dl_exposure_mean(worst_case):
    assert dl_exposure_mean(worst_case, UserLocation.OUTSIDE) == np.inf
    beta = worst_case.downlink.beta
    expected = (
        worst_case.effective_bs_density * worst_case.eirp
        * 50.0 ** (2.0 - beta) / (2.0 * (beta - 2.0))
    )
    assert dl_exposure_mean(worst_case, UserLocation.INSIDE) == pytest.approx(
        expected
    )


@pytest.mark.parametrize("loc", [UserLocation.OUTSIDE, UserLocation.INSIDE])
def test_dl_exposure_percentile_round_trip(worst_case, loc):
    rho = 0.95
    percentile = dl_exposure_percentile(rho, worst_case, loc)
    assert percentile > 0
    assert dl_exposure_cdf(percentile, worst_case, loc) == pytest.approx(
        rho, abs=1e-3
    )
    w = np.geomspace(1e-4, 1e2, 7)
    cdf = dl_exposure_cdf(w, worst_case, loc)
    assert np.all(np.diff(cdf) >= -1e-4)
    assert cdf[0] < 0.5 < cdf[-1]


def test_dl_conditional_exposure(worst_case):
    x0 = np.array([5.0, 8.0, 12.0])
    cdf = dl_conditional_exposure_cdf(10.0, x0, worst_case)
    assert cdf.shape == (3,)
    assert np.all(np.diff(cdf) > 0)
    near = dl_conditional_exposure_percentile(0.95, 5.0, worst_case)
    far = dl_conditional_exposure_percentile(0.95, 20.0, worst_case)
    assert near > far > 0
    assert float(dl_conditional_exposure_cdf(near, 5.0, worst_case)) == (
        pytest.approx(0.95, abs=1e-3)
    )


def test_compliance_distance(worst_case):
    model = worst_case.replace(lambda_b=1.0e-4, lambda_r=1.0e-6)
    x_com = compliance_distance(model)
    assert x_com == pytest.approx(7.5, abs=1.0)
    assert float(dl_conditional_exposure_cdf(10.0, x_com, model)) >= 0.95
    # a stricter limit pushes the serving BS away
    assert compliance_distance(model, w_max=1.0) > x_com


def test_compliance_distance_edges(worst_case):
    assert compliance_distance(worst_case, w_max=np.inf) == 0.0
    assert compliance_distance(worst_case, w_max=1.0e6) == 0.0
    with pytest.raises(BracketFailure):
        compliance_distance(worst_case, w_max=1.0e-6)


def test_dl_exposure_compliance(worst_case, caplog):
    caplog.set_level(logging.INFO)
    check = dl_exposure_compliance(worst_case, UserLocation.OUTSIDE)
    assert isinstance(check, ComplianceCheck)
    assert check.rho == worst_case.compliance.rho
    assert check.w_max == worst_case.compliance.w_max
    assert check.compliant is bool(check.percentile <= check.w_max)
    assert check.compliant

    strict = worst_case.replace(w_max=1.0e-4)
    assert not dl_exposure_compliance(strict, UserLocation.OUTSIDE).compliant


def test_dl_exposure_far_below_limit_inside_hole(worst_case):
    # 20 BSs/km2 after thinning
    lambda_b = 2.0e-5 * np.exp(worst_case.point_process.lambda_r * 50.0 ** 2)
    model = worst_case.replace(lambda_b=lambda_b)
    assert model.effective_bs_density == pytest.approx(2.0e-5)
    percentile = dl_exposure_percentile(0.95, model, UserLocation.INSIDE)
    assert percentile <= model.compliance.w_max / 100.0
