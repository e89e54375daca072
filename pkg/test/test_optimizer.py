import logging
import math
import warnings
import pytest
import numpy as np
import emfhole.optimizer
from emfhole.downlink import dl_exposure_percentile
from emfhole.input_parser import UserLocation
from emfhole.joint_exposure import Component, ei_percentile
from emfhole.optimizer import (
    Infeasible,
    MonotonicityWarning,
    SearchResult,
    UnimodalityWarning,
    _local_minima,
    golden_section,
    max_density_curve,
    solve_op1,
    solve_op3,
)


def test_golden_section():
    x = golden_section(lambda x: (x - 2.0) ** 2, 0.0, 5.0, 1e-6)
    assert x == pytest.approx(2.0, abs=1e-6)
    x = golden_section(lambda x: abs(x + 1.0), 3.0, -4.0, 1e-5)
    assert x == pytest.approx(-1.0, abs=1e-5)
    assert golden_section(lambda x: x, 1.0, 1.0 + 1e-9, 1e-6) == (
        pytest.approx(1.0)
    )


def test_local_minima():
    assert _local_minima(np.array([3.0, 2.0, 1.0, 2.0, 3.0])) == 1
    assert _local_minima(np.array([1.0, 2.0, 1.0])) == 2
    assert _local_minima(np.array([4.0, 3.0, 2.0])) == 1
    plateau = np.array([1.0, 1.001, 0.6, 0.8, 1.0])
    assert _local_minima(plateau) == 1
    assert _local_minima(plateau, rtol=0.0) == 2
    assert _local_minima(np.array([2.0, 2.0, 2.0])) == 1


def test_solve_op1_optimal_density(worst_case, caplog):
    caplog.set_level(logging.INFO)
    model = worst_case.replace(lambda_r=1.0e-6, hole_radius=200.0)
    result = solve_op1(model, rtol=1e-2)
    assert isinstance(result, SearchResult)
    assert result.parameter == "lambda_b"
    assert not result.unconstrained
    assert result.value == pytest.approx(7.6e-4, rel=0.15)
    assert 0.0 <= result.slack
    assert result.objective <= model.compliance.w_max
    above = dl_exposure_percentile(
        0.95, model.replace(lambda_b=result.value * 1.02),
        UserLocation.OUTSIDE,
    )
    assert above > model.compliance.w_max * 0.98
    assert result.evaluations > 5


def test_solve_op1_edges(worst_case):
    with pytest.raises(Infeasible):
        solve_op1(worst_case, w_max=1.0e-6, hi=1.0e-4)

    result = solve_op1(worst_case, w_max=np.inf, hi=1.0e-4)
    assert result.unconstrained
    assert result.value == 1.0e-4
    assert result.slack == np.inf

    result = solve_op1(worst_case, w_max=1.0e6, lo=1.0e-6, hi=1.0e-4)
    assert result.unconstrained
    assert result.value == 1.0e-4
    assert result.evaluations == 5

    with pytest.raises(ValueError):
        solve_op1(worst_case, lo=1.0e-3, hi=1.0e-4)


def test_max_density_curve(worst_case):
    curve = max_density_curve(
        worst_case, [1.0e-6, 1.0e6], [1.0e-6], lo=1.0e-6, hi=1.0e-4
    )
    assert curve.shape == (1, 2)
    assert np.isnan(curve[0, 0])
    assert curve[0, 1] == 1.0e-4


def test_solve_op1_monotonicity_warning(worst_case, monkeypatch):
    def bumpy(rho, model, loc, quad=None):
        return math.cos(math.log(model.point_process.lambda_b)) + 2.0

    monkeypatch.setattr(emfhole.optimizer, "dl_exposure_percentile", bumpy)
    with pytest.warns(MonotonicityWarning):
        solve_op1(worst_case, w_max=10.0)


def test_solve_op3_unimodal(worst_case, monkeypatch):
    def bowl(rho, model, loc, component, quad=None):
        return (math.log(model.point_process.hole_radius / 100.0)) ** 2 + 1.0

    monkeypatch.setattr(emfhole.optimizer, "ei_percentile", bowl)
    result = solve_op3(worst_case, "hole_radius", 1.0, 400.0, threads=2)
    assert result.parameter == "hole_radius"
    assert result.value == pytest.approx(100.0, rel=0.02)
    assert result.objective == pytest.approx(1.0, abs=1e-3)
    assert not result.flat
    assert result.evaluations > 9
    assert np.isnan(result.slack)


def test_solve_op3_warnings(worst_case, monkeypatch, caplog):
    caplog.set_level(logging.INFO)

    def wavy(rho, model, loc, component, quad=None):
        return math.cos(2.0 * math.log(model.point_process.lambda_b))

    monkeypatch.setattr(emfhole.optimizer, "ei_percentile", wavy)
    with pytest.warns(UnimodalityWarning, match="local minima"):
        result = solve_op3(worst_case, "lambda_b", 1.0e-6, 1.0e-3)
    assert result.evaluations == 9
    assert "local minima" in caplog.text


def test_solve_op3_constant_objective(worst_case):
    model = worst_case.replace(sar_dl=0.0)
    with pytest.warns(UnimodalityWarning, match="constant"):
        result = solve_op3(model, "lambda_b", 1.0e-6, 1.0e-3,
                           component=Component.DL)
    assert result.flat
    assert result.objective == 0.0
    assert result.value == pytest.approx(1.0e-6)


def test_solve_op3_boundary_minimum(worst_case):
    # the uplink term only shrinks as BSs get closer
    hi = 1.0e-3
    result = solve_op3(worst_case, "lambda_b", 1.0e-5, hi,
                       loc=UserLocation.OUTSIDE, component=Component.UL)
    assert result.value == pytest.approx(hi, rel=1e-9)
    assert not result.flat


def test_solve_op3_invalid(worst_case):
    with pytest.raises(ValueError):
        solve_op3(worst_case, "lambda_r", 1.0e-6, 1.0e-3)
    with pytest.raises(ValueError):
        solve_op3(worst_case, "lambda_b", 1.0e-3, 1.0e-6)


def test_solve_op3_density_inside_hole(worst_case):
    lo, hi = 1.0e-6, 1.0e-3
    with warnings.catch_warnings():
        warnings.simplefilter("error", UnimodalityWarning)
        result = solve_op3(worst_case, "lambda_b", lo, hi,
                           loc=UserLocation.INSIDE)
    assert 1.0 / 3.0 < result.value / 10.0 ** -4.5 < 3.0
    assert result.evaluations > 9
    for end in (lo, hi):
        assert result.objective <= ei_percentile(
            0.95, worst_case.replace(lambda_b=end), UserLocation.INSIDE
        )


def test_solve_op3_radius_inside_hole(worst_case):
    model = worst_case.replace(lambda_b=10.0 ** -4.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error", UnimodalityWarning)
        result = solve_op3(model, "hole_radius", 1.0, 400.0,
                           loc=UserLocation.INSIDE)
    assert result.value == pytest.approx(100.0, abs=25.0)
    assert result.evaluations > 9
