"""Parameter sweeps and the canned curve tables of the analysis

A table is a set of :code:`Series`, each evaluating one metric along one axis
of swept values. All (row, series) points are dealt round-robin over the MPI
ranks and evaluated by a thread pool within each rank, then gathered so that
rows come out in axis order regardless of completion order.
"""
import re
import datetime
import logging
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from typing import Callable, Optional, Tuple
import numpy as np
from mpi4py import MPI
from .downlink import (
    compliance_distance,
    dl_conditional_exposure_percentile,
    dl_coverage,
    dl_exposure_cdf,
    dl_exposure_mean,
    dl_exposure_percentile,
    dl_outage,
)
from .input_parser import (
    Scenario,
    UserLocation,
    db_to_linear,
    default_model,
)
from .joint_exposure import Component, ei_component_cdf, ei_percentile
from .optimizer import Infeasible, solve_op1
from .uplink import ul_coverage, ul_exposure_cdf, ul_exposure_percentile
from .logger import Logger, format_timedelta


R_GRID = np.array([0.0, 50.0, 100.0, 150.0, 200.0, 250.0])
R_FINE_GRID = np.linspace(0.0, 250.0, 11)
LAMBDA_B_GRID = np.geomspace(1.0e-6, 1.0e-3, 13)
LAMBDA_R_GRID = (1.0e-7, 1.0e-6, 1.0e-5)
EPSILON_GRID = (0.2, 0.4, 0.6, 1.0)
X0_GRID = np.linspace(1.0, 30.0, 30)
W_MAX_GRID = np.geomspace(1.0, 100.0, 9)
UL_W_GRID = np.geomspace(1.0e-5, 10.0, 61)
UL_SNR_DB_GRID = np.linspace(-40.0, 80.0, 61)
EI_LAMBDA_B_GRID = (1.0e-5, 10.0 ** -4.5, 1.0e-4)
XCOM_LAMBDA_B = 1.0e-4
OP1_HOLE_RADIUS = 200.0

POINT_AXES = ("w", "x0")
DB_AXES = {
    "antenna_gain_db": "antenna_gain",
    "snr_threshold_dl_db": "snr_threshold_dl",
    "snr_threshold_ul_db": "snr_threshold_ul",
}
FIGURES = tuple(range(2, 15))


@dataclass(frozen=True)
class Metric:
    """A scalar evaluated on a model

    Attributes
    ----------
    name : str
    evaluate : callable
        :code:`evaluate(model, loc, quad, **point)`.
    needs : str, optional
        Point argument the metric requires, :code:`"w"` or :code:`"x0"`.
    """
    name: str
    evaluate: Callable
    needs: Optional[str] = None


def _max_density(model, loc, quad):
    try:
        return solve_op1(model, loc=loc, quad=quad).value
    except Infeasible:
        return np.nan


_SCALAR_METRICS = {
    "dl-coverage": lambda model, loc, quad: dl_coverage(model, loc, quad),
    "dl-outage": lambda model, loc, quad: dl_outage(model, loc, quad),
    "dl-mean": lambda model, loc, quad: dl_exposure_mean(model, loc),
    "ul-coverage": lambda model, loc, quad: ul_coverage(model, loc, quad),
    "xcom": lambda model, loc, quad: compliance_distance(model, quad=quad),
    "op1": _max_density,
}
_CDF_METRICS = {
    "dl-cdf": lambda w, model, loc, quad: dl_exposure_cdf(w, model, loc, quad),
    "ul-cdf": lambda w, model, loc, quad: ul_exposure_cdf(w, model, loc, quad),
    "ei-cdf": lambda w, model, loc, quad: ei_component_cdf(
        w, model, loc, Component.TOTAL, quad),
    "ei-ul-cdf": lambda w, model, loc, quad: ei_component_cdf(
        w, model, loc, Component.UL, quad),
    "ei-dl-cdf": lambda w, model, loc, quad: ei_component_cdf(
        w, model, loc, Component.DL, quad),
}
_PERCENTILE_METRICS = {
    "dl": lambda rho, model, loc, quad: dl_exposure_percentile(
        rho, model, loc, quad),
    "ul": lambda rho, model, loc, quad: ul_exposure_percentile(
        rho, model, loc, quad),
    "ei": lambda rho, model, loc, quad: ei_percentile(
        rho, model, loc, Component.TOTAL, quad),
    "ei-ul": lambda rho, model, loc, quad: ei_percentile(
        rho, model, loc, Component.UL, quad),
    "ei-dl": lambda rho, model, loc, quad: ei_percentile(
        rho, model, loc, Component.DL, quad),
}
_PERCENTILE_RE = re.compile(r"^(dl-cond|dl|ul|ei-ul|ei-dl|ei)-p(\d+(?:\.\d+)?)$")


def metric_names():
    return (
        sorted(_SCALAR_METRICS) + sorted(_CDF_METRICS)
        + [f"{k}-pNN" for k in sorted(_PERCENTILE_METRICS)] + ["dl-cond-pNN"]
    )


def parse_metric(name):
    """Resolve a metric name

    Percentile metrics carry their level in percent, e.g. :code:`ei-p95` or
    :code:`dl-p99.9`.

    Raises
    ------
    ValueError
        If the name is unknown or the level is not in (0, 100).
    """
    if name in _SCALAR_METRICS:
        f = _SCALAR_METRICS[name]
        return Metric(name, lambda model, loc, quad: f(model, loc, quad))
    if name in _CDF_METRICS:
        f = _CDF_METRICS[name]
        return Metric(
            name, lambda model, loc, quad, w: f(w, model, loc, quad), "w"
        )
    match = _PERCENTILE_RE.match(name)
    if match is None:
        raise ValueError(
            f"Unknown metric {repr(name)}, expected one of "
            f"{', '.join(metric_names())}"
        )
    kind, level = match.group(1), float(match.group(2))
    if not 0 < level < 100:
        raise ValueError(f"Percentile level must be in (0, 100), not {level}")
    rho = level / 100.0
    if kind == "dl-cond":
        return Metric(
            name,
            lambda model, loc, quad, x0: dl_conditional_exposure_percentile(
                rho, x0, model, quad
            ),
            "x0",
        )
    f = _PERCENTILE_METRICS[kind]
    return Metric(name, lambda model, loc, quad: f(rho, model, loc, quad))


def _percentile_metric(kind, rho):
    return f"{kind}-p{100.0 * rho:g}"


def apply_axis(model, param, value):
    """Model and point arguments at one swept value

    :code:`param` is a flat model parameter, a dB alias of one, or a point
    argument (:code:`w`, :code:`x0`) passed on to the metric.
    """
    if param in POINT_AXES:
        return model, {param: float(value)}
    if param in DB_AXES:
        return model.replace(**{DB_AXES[param]: float(db_to_linear(value))}), {}
    if param == "nakagami_m":
        value = int(round(value))
    return model.replace(**{param: value}), {}


@dataclass(frozen=True)
class Series:
    """One column of a table

    Attributes
    ----------
    column : str
        Column name in the CSV header.
    metric : str
        Metric name, see :code:`parse_metric`.
    axis : str
        Name of the axis this series is evaluated along.
    loc : UserLocation
    changes : tuple of (str, float)
        Fixed model changes applied before the axis value.
    """
    column: str
    metric: str
    axis: str
    loc: UserLocation = UserLocation.OUTSIDE
    changes: Tuple = ()


@dataclass
class Figure:
    """Canned table reproducing one curve family

    Attributes
    ----------
    number : int
    description : str
    model : NetworkModel
        Base model of all series.
    axes : dict of str to numpy.ndarray
        Swept values, all of one length. The first axis is the x axis.
    series : list of Series
    extras : tuple of (str, str, UserLocation)
        Metrics evaluated once on the base model and recorded as metadata.
    """
    number: int
    description: str
    model: object
    axes: dict
    series: list
    extras: Tuple = ()


def _evaluate_point(model, series, axes, i, quad):
    varied = model.replace(**dict(series.changes)) if series.changes else model
    varied, point = apply_axis(varied, series.axis, axes[series.axis][i])
    return float(parse_metric(series.metric).evaluate(
        varied, series.loc, quad, **point
    ))


def _check_series(axes, series):
    lengths = {len(v) for v in axes.values()}
    if len(lengths) != 1:
        raise ValueError(f"Axes differ in length: {lengths}")
    for s in series:
        if s.axis not in axes:
            raise ValueError(f"Series {s.column} refers to unknown axis {s.axis}")
        needs = parse_metric(s.metric).needs
        if needs is not None and needs != s.axis:
            raise ValueError(
                f"Metric {s.metric} needs a {repr(needs)} axis, not "
                f"{repr(s.axis)}"
            )
        if needs is None and s.axis in POINT_AXES:
            raise ValueError(
                f"Metric {s.metric} does not take a {repr(s.axis)} argument"
            )


def evaluate_table(model, axes, series, quad=None, threads=1,
                   comm=MPI.COMM_WORLD):
    """Evaluate every series at every row of the axes

    Parameters
    ----------
    model : NetworkModel
    axes : dict of str to array_like
    series : list of Series
    quad : QuadratureConfig, optional
    threads : int, optional
        Worker threads per MPI rank.
    comm : mpi4py.Comm, optional
        MPI communicator to use for rank commuication.

    Returns
    -------
    values : numpy.ndarray
        Shape :code:`(rows, len(series))`, identical on all ranks.
    """
    axes = {k: np.asarray(v, dtype=np.float64) for k, v in axes.items()}
    _check_series(axes, series)
    n_rows = len(next(iter(axes.values())))
    tasks = [(i, j) for i in range(n_rows) for j in range(len(series))]
    mine = tasks[comm.Get_rank()::comm.Get_size()]

    def evaluate(task):
        i, j = task
        return i, j, _evaluate_point(model, series[j], axes, i, quad)

    failure = None
    local = []
    try:
        with ThreadPool(processes=threads) as pool:
            local = pool.map(evaluate, mine)
    except Exception as e:
        failure = e
    Logger.all_ranks.log(
        logging.DEBUG, f"evaluated {len(local)} of {len(tasks)} table points"
    )
    gathered = comm.allgather((local, failure))
    for _, e in gathered:
        if e is not None:
            raise e
    values = np.full((n_rows, len(series)), np.nan)
    for part, _ in gathered:
        for i, j, value in part:
            values[i, j] = value
    return values


def table_rows(axes, series, values):
    header = list(axes) + [s.column for s in series]
    rows = [
        [axes[k][i] for k in axes] + list(values[i])
        for i in range(values.shape[0])
    ]
    return header, rows


def sweep(model, param, values, metric, loc=UserLocation.OUTSIDE, quad=None,
          threads=1, comm=MPI.COMM_WORLD):
    """One metric over one swept parameter

    Returns
    -------
    header : list[str]
    rows : list[list]
        One row per swept value, in the order given.
    """
    axes = {param: np.asarray(values, dtype=np.float64)}
    series = [Series(metric.replace("-", "_"), metric, param, UserLocation(loc))]
    start = datetime.datetime.now()
    result = evaluate_table(model, axes, series, quad, threads, comm)
    Logger.rank0.log(
        logging.INFO,
        f"Swept {metric} over {len(axes[param])} values of {param} in "
        f"{format_timedelta(datetime.datetime.now() - start)}",
    )
    return table_rows(axes, series, result)


def _tag(loc):
    return UserLocation(loc).value


def _both(column, metric, axis, **kwargs):
    return [
        Series(f"{column}_{_tag(loc)}", metric, axis, loc, **kwargs)
        for loc in (UserLocation.INSIDE, UserLocation.OUTSIDE)
    ]


def _typical_model(config):
    if config.scenario is Scenario.TYPICAL:
        return config.model
    return default_model(Scenario.TYPICAL)


def figure(number, config):
    """Definition of canned table :code:`number` on the configured model

    Parameters
    ----------
    number : int
        One of :code:`FIGURES`.
    config : Config

    Returns
    -------
    fig : Figure
    """
    model, loc = config.model, config.location
    rho = model.compliance.rho
    dl_p = _percentile_metric("dl", rho)
    ul_p = _percentile_metric("ul", rho)
    p = f"p{100.0 * rho:g}"

    if number == 2:
        return Figure(
            2, "downlink exposure percentile vs exclusion zone radius", model,
            {"hole_radius": R_GRID}, _both(f"dl_{p}", dl_p, "hole_radius"),
        )
    if number == 3:
        return Figure(
            3, "downlink coverage vs exclusion zone radius", model,
            {"hole_radius": R_FINE_GRID},
            _both("dl_coverage", "dl-coverage", "hole_radius"),
        )
    if number in (4, 5):
        metric, column, what = (
            (dl_p, f"dl_{p}", "exposure percentile") if number == 4
            else ("dl-coverage", "dl_coverage", "coverage")
        )
        return Figure(
            number, f"downlink {what} vs baseline density", model,
            {"lambda_b": LAMBDA_B_GRID},
            [
                Series(f"{column}_lr{lr:g}", metric, "lambda_b", loc,
                       (("lambda_r", lr),))
                for lr in LAMBDA_R_GRID
            ],
        )
    if number == 6:
        return Figure(
            6, "conditional downlink exposure percentile vs serving distance",
            model.replace(lambda_b=XCOM_LAMBDA_B), {"x0": X0_GRID},
            [Series(f"dl_cond_{p}", _percentile_metric("dl-cond", rho), "x0")],
            extras=(("x_com", "xcom", loc),),
        )
    if number == 7:
        return Figure(
            7, "maximum baseline density vs permitted power density",
            model.replace(hole_radius=OP1_HOLE_RADIUS), {"w_max": W_MAX_GRID},
            [
                Series(f"lambda_b_opt_lr{lr:g}", "op1", "w_max", loc,
                       (("lambda_r", lr),))
                for lr in LAMBDA_R_GRID
            ],
        )
    if number == 8:
        return Figure(
            8, "typical case downlink exposure and outage vs baseline density",
            _typical_model(config), {"lambda_b": LAMBDA_B_GRID},
            _both(f"dl_{p}", dl_p, "lambda_b")
            + _both("dl_outage", "dl-outage", "lambda_b"),
        )
    if number == 9:
        return Figure(
            9, "uplink exposure CDF and uplink SNR CCDF vs power control "
            "factor", model,
            {"w": UL_W_GRID, "snr_threshold_ul_db": UL_SNR_DB_GRID},
            [
                Series(f"ul_cdf_eps{eps:g}", "ul-cdf", "w", loc,
                       (("epsilon", eps),))
                for eps in EPSILON_GRID
            ] + [
                Series(f"ul_coverage_eps{eps:g}", "ul-coverage",
                       "snr_threshold_ul_db", loc, (("epsilon", eps),))
                for eps in EPSILON_GRID
            ],
        )
    if number == 10:
        return Figure(
            10, "uplink exposure percentile and coverage vs exclusion zone "
            "radius", model, {"hole_radius": R_FINE_GRID},
            _both(f"ul_{p}", ul_p, "hole_radius")
            + _both("ul_coverage", "ul-coverage", "hole_radius"),
        )
    if number in (11, 12):
        metric, column, what = (
            (ul_p, f"ul_{p}", "exposure percentile") if number == 11
            else ("ul-coverage", "ul_coverage", "coverage")
        )
        series = []
        for eps in EPSILON_GRID:
            series += _both(
                f"{column}_eps{eps:g}", metric, "lambda_b",
                changes=(("epsilon", eps),),
            )
        return Figure(
            number, f"uplink {what} vs baseline density", model,
            {"lambda_b": LAMBDA_B_GRID}, series,
        )
    if number == 13:
        series = []
        for lb in EI_LAMBDA_B_GRID:
            for kind in ("ei", "ei-ul", "ei-dl"):
                series.append(Series(
                    f"{kind.replace('-', '_')}_{p}_lb{lb:.3g}",
                    _percentile_metric(kind, rho), "hole_radius",
                    UserLocation.INSIDE, (("lambda_b", lb),),
                ))
        return Figure(
            13, "exposure index percentile vs exclusion zone radius, user "
            "inside", model, {"hole_radius": R_FINE_GRID}, series,
        )
    if number == 14:
        series = []
        for kind in ("ei", "ei-ul", "ei-dl"):
            series += _both(
                f"{kind.replace('-', '_')}_{p}", _percentile_metric(kind, rho),
                "lambda_b",
            )
        return Figure(
            14, "exposure index percentile vs baseline density", model,
            {"lambda_b": LAMBDA_B_GRID}, series,
        )
    raise ValueError(
        f"No figure {number}, choose one of {FIGURES[0]}..{FIGURES[-1]}"
    )


def figure_table(fig, quad=None, threads=1, comm=MPI.COMM_WORLD):
    """Evaluate a canned table

    Returns
    -------
    header : list[str]
    rows : list[list]
    extra : dict
        Axis description and the once-evaluated extras, for the metadata
        block.
    """
    start = datetime.datetime.now()
    Logger.rank0.log(
        logging.INFO,
        f"Figure {fig.number}: {fig.description}, {len(fig.series)} series "
        f"on {len(next(iter(fig.axes.values())))} points",
    )
    values = evaluate_table(fig.model, fig.axes, fig.series, quad, threads,
                            comm)
    extra = {
        "figure": fig.number,
        "description": fig.description,
        "x_axis": next(iter(fig.axes)),
    }
    for key, metric, loc in fig.extras:
        extra[key] = parse_metric(metric).evaluate(fig.model, loc, quad)
    Logger.rank0.log(
        logging.INFO,
        f"Figure {fig.number} done in "
        f"{format_timedelta(datetime.datetime.now() - start)}",
    )
    header, rows = table_rows(fig.axes, fig.series, values)
    return header, rows, extra
