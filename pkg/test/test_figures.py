from mpi4py import MPI
import pytest
import numpy as np
from emfhole.downlink import (
    dl_conditional_exposure_percentile,
    dl_coverage,
    dl_exposure_mean,
)
from emfhole.input_parser import Config, Scenario, UserLocation
from emfhole.figures import (
    FIGURES,
    Figure,
    Series,
    _check_series,
    apply_axis,
    evaluate_table,
    figure,
    figure_table,
    metric_names,
    parse_metric,
    sweep,
    table_rows,
)


def test_metric_names():
    names = metric_names()
    for name in ("dl-coverage", "ul-coverage", "op1", "xcom", "dl-cdf",
                 "ei-cdf", "ei-pNN", "dl-cond-pNN"):
        assert name in names
    assert len(names) == len(set(names))


def test_parse_metric():
    assert parse_metric("dl-coverage").needs is None
    assert parse_metric("ul-cdf").needs == "w"
    assert parse_metric("dl-cond-p95").needs == "x0"
    assert parse_metric("ei-ul-p99.9").name == "ei-ul-p99.9"
    for bad in ("dl-p0", "dl-p100", "sinr", "ei-p", "dl-cond-cdf"):
        with pytest.raises(ValueError):
            parse_metric(bad)


def test_parse_metric_evaluates(worst_case):
    metric = parse_metric("dl-cond-p95")
    value = metric.evaluate(worst_case, UserLocation.OUTSIDE, None, x0=5.0)
    assert value == pytest.approx(
        dl_conditional_exposure_percentile(0.95, 5.0, worst_case)
    )
    coverage = parse_metric("dl-coverage").evaluate(
        worst_case, UserLocation.INSIDE, None
    )
    assert coverage == dl_coverage(worst_case, UserLocation.INSIDE)


def test_apply_axis(worst_case):
    model, point = apply_axis(worst_case, "antenna_gain_db", 10.0)
    assert point == {}
    assert model.downlink.antenna_gain == pytest.approx(10.0)

    model, point = apply_axis(worst_case, "w", 1.5)
    assert model is worst_case
    assert point == {"w": 1.5}

    model, _ = apply_axis(worst_case, "nakagami_m", 2.0)
    assert model.downlink.nakagami_m == 2
    assert isinstance(model.downlink.nakagami_m, int)

    model, _ = apply_axis(worst_case, "hole_radius", 120.0)
    assert model.point_process.hole_radius == 120.0

    with pytest.raises(TypeError):
        apply_axis(worst_case, "bogus", 1.0)


def test_check_series():
    axes = {"lambda_b": np.array([1e-5, 1e-4]), "w": np.array([1.0, 2.0])}
    _check_series(axes, [
        Series("a", "dl-coverage", "lambda_b"),
        Series("b", "dl-cdf", "w"),
    ])
    with pytest.raises(ValueError, match="length"):
        _check_series({"lambda_b": np.ones(2), "w": np.ones(3)}, [])
    with pytest.raises(ValueError, match="unknown axis"):
        _check_series(axes, [Series("a", "dl-coverage", "epsilon")])
    with pytest.raises(ValueError, match="needs"):
        _check_series(axes, [Series("a", "dl-cdf", "lambda_b")])
    with pytest.raises(ValueError, match="does not take"):
        _check_series(axes, [Series("a", "dl-coverage", "w")])


def test_sweep_dl_mean(worst_case):
    values = [25.0, 50.0, 100.0]
    header, rows = sweep(worst_case, "hole_radius", values, "dl-mean",
                         UserLocation.INSIDE)
    assert header == ["hole_radius", "dl_mean"]
    assert [row[0] for row in rows] == values
    for R, row in zip(values, rows):
        assert row[1] == pytest.approx(dl_exposure_mean(
            worst_case.replace(hole_radius=R), UserLocation.INSIDE
        ))
    # the serving BS recedes with the hole edge
    assert rows[0][1] > rows[1][1] > rows[2][1]


def test_sweep_threads(worst_case):
    values = np.geomspace(1.0e-6, 1.0e-4, 5)
    header, rows = sweep(worst_case, "lambda_b", values, "dl-coverage",
                         threads=2)
    single_header, single = sweep(worst_case, "lambda_b", values,
                                  "dl-coverage", comm=MPI.COMM_SELF)
    assert header == single_header == ["lambda_b", "dl_coverage"]
    assert rows == single
    assert rows[2][1] == pytest.approx(dl_coverage(
        worst_case.replace(lambda_b=values[2]), UserLocation.OUTSIDE
    ))


@pytest.mark.mpi()
def test_evaluate_table_raises_on_all_ranks(worst_case):
    series = [Series("ul", "ul-coverage", "lambda_b",
                     changes=(("epsilon", 2.0),))]
    with pytest.raises(ValueError):
        evaluate_table(worst_case, {"lambda_b": [1.0e-5]}, series)


def test_table_rows():
    axes = {"x0": np.array([1.0, 2.0]), "w": np.array([3.0, 4.0])}
    series = [Series("a", "dl-cdf", "w"), Series("b", "dl-cond-p95", "x0")]
    header, rows = table_rows(axes, series, np.array([[5.0, 6.0],
                                                      [7.0, 8.0]]))
    assert header == ["x0", "w", "a", "b"]
    assert rows == [[1.0, 3.0, 5.0, 6.0], [2.0, 4.0, 7.0, 8.0]]


@pytest.mark.parametrize("number", FIGURES)
def test_figure_definitions(worst_case, number):
    fig = figure(number, Config(model=worst_case))
    assert fig.number == number
    assert fig.description
    assert len(fig.series) > 0
    axes = {k: np.asarray(v, dtype=np.float64) for k, v in fig.axes.items()}
    _check_series(axes, fig.series)
    columns = [s.column for s in fig.series]
    assert len(columns) == len(set(columns))


def test_figure_special_cases(worst_case, typical_case):
    config = Config(model=worst_case)
    assert figure(8, config).model.downlink.beta == (
        typical_case.downlink.beta
    )
    assert figure(2, config).model is worst_case
    assert all(s.loc is UserLocation.INSIDE for s in figure(13, config).series)
    assert figure(6, config).extras == (("x_com", "xcom",
                                         UserLocation.OUTSIDE),)
    assert figure(6, config).model.point_process.lambda_b == 1.0e-4
    assert figure(6, config).model.point_process.hole_radius == 50.0
    assert figure(7, config).model.point_process.hole_radius == 200.0
    assert figure(7, config).model.point_process.lambda_b == 1.0e-5
    typical_config = Config(model=typical_case, scenario=Scenario.TYPICAL)
    assert figure(8, typical_config).model is typical_case
    with pytest.raises(ValueError):
        figure(15, config)


def test_figure_table(worst_case):
    fig = Figure(
        1, "mean exposure inside", worst_case,
        {"hole_radius": np.array([25.0, 50.0])},
        [Series("dl_mean_in", "dl-mean", "hole_radius", UserLocation.INSIDE)],
        extras=(("mean_in", "dl-mean", UserLocation.INSIDE),),
    )
    header, rows, extra = figure_table(fig, threads=2)
    assert header == ["hole_radius", "dl_mean_in"]
    assert len(rows) == 2
    assert rows[1][1] == pytest.approx(
        dl_exposure_mean(worst_case, UserLocation.INSIDE)
    )
    assert extra["figure"] == 1
    assert extra["description"] == "mean exposure inside"
    assert extra["x_axis"] == "hole_radius"
    assert extra["mean_in"] == pytest.approx(rows[1][1])
