"""Deployment optimization under exposure constraints

:code:`solve_op1` maximizes the downlink coverage subject to the exposure
percentile constraint by raising the baseline density until the constraint
binds. :code:`solve_op3` minimizes a percentile of the exposure index over
either the baseline density or the exclusion zone radius.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
import numpy as np
from .downlink import dl_exposure_percentile
from .input_parser import UserLocation
from .joint_exposure import Component, ei_percentile
from .logger import Logger


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0

MONOTONE_GRID = 5
UNIMODAL_GRID = 9
PLATEAU_RTOL = 1.0e-2


class Infeasible(ValueError):
    """The exposure constraint is violated at the lower end of the bracket"""


class UnimodalityWarning(UserWarning):
    """The objective has several local minima, or none, on the pre-grid"""


class MonotonicityWarning(UserWarning):
    """The constrained percentile is not increasing on the pre-grid"""


@dataclass
class SearchResult:
    """Outcome of a scalar deployment search

    Attributes
    ----------
    parameter : str
        Flat name of the searched model parameter.
    value : float
        Optimal parameter value.
    objective : float
        Percentile at :code:`value`, constrained (OP1) or minimized (OP3).
    slack : float
        :math:`W_{max}` minus the percentile for OP1, :code:`nan` for OP3.
    unconstrained : bool
        The constraint holds on the whole bracket, :code:`value` is its upper
        end.
    flat : bool
        The objective is constant on the pre-grid.
    evaluations : int
        Number of percentile evaluations.
    """
    parameter: str
    value: float
    objective: float
    slack: float = np.nan
    unconstrained: bool = False
    flat: bool = False
    evaluations: int = 0


def _warn(warn_str, category):
    Logger.rank0.log(logging.WARNING, warn_str)
    warnings.warn(warn_str, category)


def solve_op1(model, w_max=None, rho=None, lo=1.0e-6, hi=1.0e-2, rtol=1.0e-3,
              loc=UserLocation.OUTSIDE, quad=None):
    """Largest baseline density meeting the downlink exposure constraint

    Coverage grows with :math:`\\lambda_b`, and so does the exposure
    percentile. The optimum is the largest :math:`\\lambda_b` in
    :code:`[lo, hi]` with :math:`F^{-1}_{W^{DL}}(\\rho) \\le W_{max}`, found
    by bisection of the constraint on a log scale.

    Parameters
    ----------
    model : NetworkModel
    w_max : float, optional
        Permitted power density, :code:`model.compliance.w_max` by default.
    rho : float, optional
        Compliance probability, :code:`model.compliance.rho` by default.
    lo, hi : float, optional
        Bracket of baseline densities per m².
    rtol : float, optional
        Relative width of the final bracket.
    loc : UserLocation, optional
    quad : QuadratureConfig, optional

    Returns
    -------
    result : SearchResult

    Raises
    ------
    Infeasible
        If the constraint is violated already at :code:`lo`.
    """
    w_max = model.compliance.w_max if w_max is None else w_max
    rho = model.compliance.rho if rho is None else rho
    if not 0 < lo < hi or not rtol > 0:
        raise ValueError(
            f"Need 0 < lo < hi and rtol > 0, got [{lo}, {hi}], rtol = {rtol}"
        )
    evaluations = 0

    def percentile(lambda_b):
        nonlocal evaluations
        evaluations += 1
        return dl_exposure_percentile(
            rho, model.replace(lambda_b=lambda_b), loc, quad
        )

    if np.isposinf(w_max):
        return SearchResult(
            parameter="lambda_b", value=hi, objective=percentile(hi),
            slack=np.inf, unconstrained=True, evaluations=evaluations,
        )

    grid = np.geomspace(lo, hi, MONOTONE_GRID)
    values = np.array([percentile(g) for g in grid])
    if np.any(np.diff(values) < 0):
        _warn(
            f"Downlink percentile is not increasing in lambda_b on "
            f"{grid}: {values}", MonotonicityWarning,
        )
    if values[0] > w_max:
        err_str = (
            f"Exposure constraint violated at lambda_b = {lo:g}: "
            f"{100 * rho:g}th percentile {values[0]:.4g} > W_max = {w_max:g}"
        )
        Logger.rank0.log(logging.ERROR, err_str)
        raise Infeasible(err_str)
    if values[-1] <= w_max:
        return SearchResult(
            parameter="lambda_b", value=hi, objective=values[-1],
            slack=w_max - values[-1], unconstrained=True,
            evaluations=evaluations,
        )

    k = int(np.argmax(values > w_max))
    a, b = grid[k - 1], grid[k]
    p_a = values[k - 1]
    while b > a * (1.0 + rtol):
        mid = math.sqrt(a * b)
        p_mid = percentile(mid)
        if p_mid <= w_max:
            a, p_a = mid, p_mid
        else:
            b = mid
    Logger.rank0.log(
        logging.INFO,
        f"OP1: lambda_b* = {a:.5g} per m2 ({100 * rho:g}th percentile "
        f"{p_a:.5g} <= W_max = {w_max:g}) after {evaluations} evaluations",
    )
    return SearchResult(
        parameter="lambda_b", value=a, objective=p_a, slack=w_max - p_a,
        evaluations=evaluations,
    )


def max_density_curve(model, w_max_grid, lambda_r_grid, lo=1.0e-6,
                      hi=1.0e-2, rtol=1.0e-3, loc=UserLocation.OUTSIDE,
                      quad=None):
    """:code:`solve_op1` over a grid of :math:`W_{max}` for several
    :math:`\\lambda_r`

    Returns
    -------
    lambda_b : numpy.ndarray
        Shape :code:`(len(lambda_r_grid), len(w_max_grid))`, :code:`nan`
        where infeasible.
    """
    out = np.full((len(lambda_r_grid), len(w_max_grid)), np.nan)
    for i, lambda_r in enumerate(lambda_r_grid):
        varied = model.replace(lambda_r=lambda_r)
        for j, w_max in enumerate(w_max_grid):
            try:
                out[i, j] = solve_op1(
                    varied, w_max, None, lo, hi, rtol, loc, quad
                ).value
            except Infeasible:
                pass
    return out


def golden_section(f, a, b, tol):
    """Golden-section search for the minimum of a unimodal :code:`f` on
    :code:`[a, b]`

    Returns
    -------
    x : float
        Midpoint of the final interval of width at most :code:`tol`.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        h *= INV_PHI
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)
    if yc < yd:
        return 0.5 * (a + d)
    return 0.5 * (c + b)


def _local_minima(values, rtol=PLATEAU_RTOL):
    """Number of local minima of a sampled objective, end points included

    Neighbours differing by at most :code:`rtol` of the larger magnitude
    count as equal, so quadrature noise on a plateau adds no minimum.
    """
    values = np.asarray(values, dtype=np.float64)
    steps = np.diff(values)
    level = rtol * np.maximum(np.abs(values[:-1]), np.abs(values[1:]))
    signs = np.sign(steps)[np.abs(steps) > level]
    if signs.size == 0:
        return 1
    valleys = int(np.sum((signs[:-1] < 0) & (signs[1:] > 0)))
    return valleys + int(signs[0] > 0) + int(signs[-1] < 0)


def solve_op3(model, parameter="lambda_b", lo=1.0e-6, hi=1.0e-3, rho=None,
              loc=UserLocation.INSIDE, rtol=0.02, quad=None, threads=1,
              component=Component.TOTAL):
    """Minimize a percentile of the exposure index over one deployment
    parameter

    Samples the objective on a 9 point log-spaced pre-grid, then refines
    around the best grid point by golden-section search in the logarithm of
    the parameter.

    Parameters
    ----------
    model : NetworkModel
    parameter : {"lambda_b", "hole_radius"}
        Flat name of the parameter searched, the other is held fixed.
    lo, hi : float
        Positive bracket of the parameter.
    rho : float, optional
        Percentile level, :code:`model.compliance.rho` by default.
    loc : UserLocation, optional
    rtol : float, optional
        Relative tolerance in the parameter.
    quad : QuadratureConfig, optional
    threads : int, optional
        Worker threads evaluating the pre-grid.
    component : Component, optional
        Exposure index term to minimize.

    Returns
    -------
    result : SearchResult

    Warns
    -----
    UnimodalityWarning
        If the pre-grid shows more than one local minimum or a constant
        objective. Grid neighbours within :code:`PLATEAU_RTOL` of each other
        count as equal. The best grid point is returned then.
    """
    if parameter not in ("lambda_b", "hole_radius"):
        raise ValueError(
            f"Can only optimize lambda_b or hole_radius, not {parameter}"
        )
    if not 0 < lo < hi:
        raise ValueError(f"Need 0 < lo < hi, got [{lo}, {hi}]")
    rho = model.compliance.rho if rho is None else rho

    def objective(log_value):
        varied = model.replace(**{parameter: math.exp(log_value)})
        return ei_percentile(rho, varied, loc, component, quad)

    log_grid = np.linspace(math.log(lo), math.log(hi), UNIMODAL_GRID)
    with ThreadPool(processes=threads) as pool:
        values = np.array(pool.map(objective, log_grid))
    evaluations = UNIMODAL_GRID
    best = int(np.argmin(values))

    def grid_result(flat):
        return SearchResult(
            parameter=parameter, value=float(math.exp(log_grid[best])),
            objective=float(values[best]), flat=flat,
            evaluations=evaluations,
        )

    if np.all(values == values[0]):
        _warn(
            f"Objective is constant ({values[0]:.4g}) over {parameter} in "
            f"[{lo:g}, {hi:g}]", UnimodalityWarning,
        )
        return grid_result(flat=True)
    minima = _local_minima(values)
    if minima > 1:
        _warn(
            f"Objective has {minima} local minima over {parameter} in "
            f"[{lo:g}, {hi:g}]: {values}", UnimodalityWarning,
        )
        return grid_result(flat=False)

    a = log_grid[max(best - 1, 0)]
    b = log_grid[min(best + 1, UNIMODAL_GRID - 1)]

    def counted(log_value):
        nonlocal evaluations
        evaluations += 1
        return objective(log_value)

    log_value = golden_section(counted, a, b, math.log1p(rtol))
    value = counted(log_value)
    if value > values[best]:
        return grid_result(flat=False)
    Logger.rank0.log(
        logging.INFO,
        f"OP3: {parameter}* = {math.exp(log_value):.5g}, {100 * rho:g}th "
        f"percentile {value:.5g} after {evaluations} evaluations",
    )
    return SearchResult(
        parameter=parameter, value=float(math.exp(log_value)),
        objective=float(value), evaluations=evaluations,
    )
