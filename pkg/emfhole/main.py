"""Main command driver module
"""
import sys
import datetime
import logging
from mpi4py import MPI
import numpy as np
from .configure_runtime import configure_runtime
from .downlink import (
    compliance_distance,
    dl_coverage,
    dl_exposure_cdf_curve,
    dl_exposure_compliance,
    dl_exposure_mean,
)
from .figures import figure, figure_table, sweep
from .file_io import write_pattern_csv, write_table
from .gilpelaez import BracketFailure, CdfCurve, NonConvergence
from .input_parser import UserLocation
from .joint_exposure import Component, ei_component_cdf, ei_percentile
from .montecarlo import WindowTooSmall, contact_window_radius, validate
from .optimizer import Infeasible, solve_op1, solve_op3
from .point_process import WindowMismatch, realization_stream, sample_php
from .uplink import ul_coverage, ul_exposure_cdf_curve, ul_exposure_percentile
from .logger import Logger, format_timedelta


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    NonConvergence, BracketFailure, Infeasible, WindowTooSmall, WindowMismatch,
)

OP3_BRACKETS = {"lambda_b": (1.0e-6, 1.0e-3), "hole_radius": (1.0, 400.0)}


def _rho(args, config):
    return config.model.compliance.rho if args.rho is None else args.rho


def _cdf_grid(args):
    low, high, points = args.cdf
    if not 0 < low < high or points < 2:
        raise ValueError(
            f"--cdf needs 0 < LOW < HIGH and POINTS >= 2, got {args.cdf}"
        )
    return np.geomspace(low, high, int(points))


def _curve_table(curve):
    extra = {"raw_excursion": curve.raw_excursion()}
    return ("w", "cdf"), zip(curve.grid, curve.repaired), extra


def coverage_dl(args, config, comm):
    model, loc = config.model, config.location
    coverage = dl_coverage(model, loc, config.quadrature)
    pp = model.point_process
    return (
        ("location", "lambda_b", "lambda_r", "hole_radius", "coverage",
         "outage"),
        [(loc, pp.lambda_b, pp.lambda_r, pp.hole_radius, coverage,
          1.0 - coverage)],
        {},
    )


def exposure_dl(args, config, comm):
    model, loc, quad = config.model, config.location, config.quadrature
    if args.cdf is not None:
        return _curve_table(dl_exposure_cdf_curve(_cdf_grid(args), model, loc,
                                                  quad))
    model = model.replace(rho=_rho(args, config))
    check = dl_exposure_compliance(model, loc, quad)
    return (
        ("location", "rho", "percentile", "w_max", "compliant", "mean"),
        [(loc, check.rho, check.percentile, check.w_max, check.compliant,
          dl_exposure_mean(model, loc))],
        {},
    )


def xcom(args, config, comm):
    model = config.model.replace(rho=_rho(args, config))
    if args.w_max is not None:
        model = model.replace(w_max=args.w_max)
    x_com = compliance_distance(model, quad=config.quadrature)
    pp = model.point_process
    return (
        ("w_max", "rho", "x_com", "lambda_b", "lambda_r"),
        [(model.compliance.w_max, model.compliance.rho, x_com, pp.lambda_b,
          pp.lambda_r)],
        {},
    )


def coverage_ul(args, config, comm):
    model, loc = config.model, config.location
    return (
        ("location", "epsilon", "coverage"),
        [(loc, model.uplink.epsilon,
          ul_coverage(model, loc, config.quadrature))],
        {},
    )


def exposure_ul(args, config, comm):
    model, loc, quad = config.model, config.location, config.quadrature
    if args.cdf is not None:
        return _curve_table(ul_exposure_cdf_curve(_cdf_grid(args), model, loc,
                                                  quad))
    rho = _rho(args, config)
    return (
        ("location", "epsilon", "rho", "percentile"),
        [(loc, model.uplink.epsilon, rho,
          ul_exposure_percentile(rho, model, loc, quad))],
        {},
    )


def ei(args, config, comm):
    model, loc, quad = config.model, config.location, config.quadrature
    component = Component(args.component)
    if args.cdf is not None:
        grid = _cdf_grid(args)
        return _curve_table(CdfCurve(
            grid=grid, values=ei_component_cdf(grid, model, loc, component,
                                               quad),
        ))
    rho = _rho(args, config)
    return (
        ("location", "component", "rho", "percentile"),
        [(loc, component, rho,
          ei_percentile(rho, model, loc, component, quad))],
        {},
    )


_RESULT_HEADER = ("parameter", "value", "objective", "slack", "unconstrained",
                  "flat", "evaluations")


def _result_row(result):
    return (result.parameter, result.value, result.objective, result.slack,
            result.unconstrained, result.flat, result.evaluations)


def op1(args, config, comm):
    result = solve_op1(
        config.model, args.w_max, args.rho, args.lo, args.hi, args.rtol,
        config.location, config.quadrature,
    )
    return _RESULT_HEADER, [_result_row(result)], {}


def op3(args, config, comm):
    lo, hi = OP3_BRACKETS[args.param]
    result = solve_op3(
        config.model, args.param,
        lo if args.lo is None else args.lo,
        hi if args.hi is None else args.hi,
        args.rho, config.location, args.rtol, config.quadrature,
        config.montecarlo.threads, Component(args.component),
    )
    return _RESULT_HEADER, [_result_row(result)], {}


def mc_validate(args, config, comm):
    mc = config.montecarlo
    n = mc.n_realizations if args.realizations is None else args.realizations
    rows, retention = validate(
        config.model, n, mc.seed, mc, config.quadrature, comm
    )
    extra = {
        "n_realizations": n,
        "retention_empirical": retention.empirical,
        "retention_standard_error": retention.standard_error,
        "retention_printed": retention.printed,
        "retention_corrected": retention.corrected,
        "retention_matches": retention.matches,
    }
    return (
        ("metric", "analytic", "empirical", "error", "tolerance", "passed"),
        [(r.metric, r.analytic, r.empirical, r.error, r.tolerance, r.passed)
         for r in rows],
        extra,
    )


def sweep_command(args, config, comm):
    if args.points < 1:
        raise ValueError(f"--points must be at least 1, not {args.points}")
    if args.linear:
        values = np.linspace(args.start, args.stop, args.points)
    elif args.start > 0 and args.stop > 0:
        values = np.geomspace(args.start, args.stop, args.points)
    else:
        raise ValueError(
            "Log-spaced sweeps need positive --from and --to, use --linear"
        )
    header, rows = sweep(
        config.model, args.param, values, args.metric, config.location,
        config.quadrature, config.montecarlo.threads, comm,
    )
    return header, rows, {"x_axis": args.param}


def figure_command(args, config, comm):
    return figure_table(
        figure(args.number, config), config.quadrature,
        config.montecarlo.threads, comm,
    )


def dump_pattern(args, config, comm):
    model, mc = config.model, config.montecarlo
    window = args.window
    if window is None:
        window = contact_window_radius(model, mc.window_factor)
    bs, holes = sample_php(
        model.point_process, window, realization_stream(mc.seed, args.index),
        hole_at_origin=config.location is UserLocation.INSIDE,
    )
    write_pattern_csv(
        bs, holes, config, args.out, {"realization": args.index}, comm
    )


COMMANDS = {
    "coverage-dl": coverage_dl,
    "exposure-dl": exposure_dl,
    "xcom": xcom,
    "coverage-ul": coverage_ul,
    "exposure-ul": exposure_ul,
    "ei": ei,
    "op1": op1,
    "op3": op3,
    "mc-validate": mc_validate,
    "sweep": sweep_command,
    "figure": figure_command,
    "dump-pattern": dump_pattern,
}


def _fail(status, e):
    Logger.rank0.log(logging.ERROR, f"{type(e).__name__}: {e}")
    return status


def run(argv=None, comm=MPI.COMM_WORLD):
    """Run one command

    Parameters
    ----------
    argv : list[str], optional
        Command line arguments without the program name,
        :code:`sys.argv[1:]` by default.
    comm : mpi4py.Comm, optional
        MPI communicator to use for rank commuication.

    Returns
    -------
    status : int
        :code:`0` on success, :code:`2` for usage and configuration errors,
        :code:`3` for numerical failures.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    start_time = datetime.datetime.now()
    status = EXIT_OK
    args = config = None
    try:
        args, config = configure_runtime(argv, comm)
    except SystemExit as e:
        status = EXIT_OK if not e.code else EXIT_USAGE
    except (ValueError, TypeError, OSError) as e:
        status = _fail(EXIT_USAGE, e)
    # configuration errors are only raised on the root rank
    status = comm.allreduce(status, op=MPI.MAX)
    if status != EXIT_OK or args is None:
        return status

    try:
        result = COMMANDS[args.command](args, config, comm)
        if result is not None:
            header, rows, extra = result
            write_table(header, rows, config, args.out, extra, comm)
    except NUMERICAL_ERRORS as e:
        return _fail(EXIT_NUMERICAL, e)
    except (ValueError, TypeError, OSError) as e:
        return _fail(EXIT_USAGE, e)

    Logger.rank0.log(
        logging.INFO,
        f"{args.command} done in "
        f"{format_timedelta(datetime.datetime.now() - start_time)}",
    )
    return EXIT_OK


def main():
    """Console entry point"""
    return run(sys.argv[1:])
