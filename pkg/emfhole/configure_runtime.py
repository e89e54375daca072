"""Parses command line arguments to emfhole
"""
from argparse import ArgumentParser
from dataclasses import replace
import os
import atexit
import cProfile
import logging
import pstats
from .logger import Logger
from .input_parser import (
    Config,
    Scenario,
    UserLocation,
    check_config,
    default_model,
    parse_config_toml,
    read_config_toml,
)
from .figures import FIGURES
from .joint_exposure import Component
from .version import __version__


COMMANDS = (
    "coverage-dl", "exposure-dl", "xcom", "coverage-ul", "exposure-ul", "ei",
    "op1", "op3", "mc-validate", "sweep", "figure", "dump-pattern",
)
UPLINK_COMMANDS = (
    "coverage-ul", "exposure-ul", "ei", "op3", "mc-validate", "sweep",
    "figure", "dump-pattern",
)
# flag -> takes a value; none of these change the numbers written
_EXECUTION_FLAGS = {
    "--threads": True, "--out": True, "--logfile": True, "--profile": False,
}


def _common_arguments():
    ap = ArgumentParser(add_help=False)
    ap.add_argument(
        "--config", default=None,
        help="TOML configuration file, the scenario preset if not given",
    )
    ap.add_argument(
        "--out", default=None,
        help="Write the CSV table to this file instead of stdout",
    )
    ap.add_argument(
        "--seed", default=None, type=int,
        help="Root entropy of the Monte Carlo realization streams",
    )
    ap.add_argument(
        "--threads", default=1, type=int,
        help="Worker threads per MPI rank",
    )
    ap.add_argument(
        "--tol-cdf", default=None, type=float,
        help="Target accuracy of CDF values",
    )
    ap.add_argument(
        "--tol-tail", default=None, type=float,
        help="Truncation tolerance of semi-infinite integrals",
    )
    ap.add_argument(
        "--location", default=None, choices=[u.value for u in UserLocation],
        help="Typical user inside or outside an exclusion zone",
    )
    ap.add_argument(
        "--scenario", default=None, choices=[s.value for s in Scenario],
        help="Parameter preset used without --config",
    )
    ap.add_argument(
        "-v", "--verbose", default=0, const=1, type=int, nargs="?",
        help="Increase logging verbosity, 2 for debug messages",
    )
    ap.add_argument(
        "--logfile", default=None,
        help="Redirect event logging to specified file",
    )
    ap.add_argument(
        "--profile", default=False, action="store_true",
        help="Profile program execution with cProfile",
    )
    return ap


def _uplink_arguments():
    ap = ArgumentParser(add_help=False)
    ap.add_argument(
        "--epsilon", default=None, type=float,
        help="Fractional power control factor in [0, 1]",
    )
    ap.add_argument(
        "--pmax", default=None, type=float,
        help="Maximum device transmit power in W",
    )
    ap.add_argument(
        "--u0", default=None, type=float,
        help="Distance between the device and the user's body in m",
    )
    return ap


def _add_rho(ap):
    ap.add_argument(
        "--rho", default=None, type=float,
        help="Percentile level in (0, 1), the configured rho by default",
    )


def _add_cdf(ap):
    ap.add_argument(
        "--cdf", default=None, type=float, nargs=3,
        metavar=("LOW", "HIGH", "POINTS"),
        help="Write the CDF on POINTS log-spaced values instead of the "
             "percentile",
    )


def _add_component(ap):
    ap.add_argument(
        "--component", default=Component.TOTAL.value,
        choices=[c.value for c in Component],
        help="Exposure index term",
    )


def build_parser():
    """Argument parser with one subparser per command"""
    ap = ArgumentParser(
        prog="emfhole",
        description="EMF exposure and coverage of cellular networks with "
                    "exclusion zones",
    )
    ap.add_argument(
        "--version", action="version", version=f"emfhole {__version__}"
    )
    sub = ap.add_subparsers(dest="command", metavar="command")
    sub.required = True
    common, uplink = _common_arguments(), _uplink_arguments()

    def add(name, help):
        parents = [common, uplink] if name in UPLINK_COMMANDS else [common]
        return sub.add_parser(name, parents=parents, help=help)

    add("coverage-dl", "Downlink coverage probability")
    p = add("exposure-dl", "Downlink exposure percentile or CDF")
    _add_rho(p)
    _add_cdf(p)
    p = add("xcom", "Compliance distance of the serving BS")
    _add_rho(p)
    p.add_argument("--w-max", default=None, type=float,
                   help="Permitted power density in W/m2")
    add("coverage-ul", "Uplink coverage probability")
    p = add("exposure-ul", "Uplink exposure percentile or CDF")
    _add_rho(p)
    _add_cdf(p)
    p = add("ei", "Exposure index percentile or CDF")
    _add_rho(p)
    _add_cdf(p)
    _add_component(p)

    p = add("op1", "Maximum baseline density under the exposure constraint")
    _add_rho(p)
    p.add_argument("--w-max", default=None, type=float,
                   help="Permitted power density in W/m2")
    p.add_argument("--lo", default=1.0e-6, type=float,
                   help="Lower end of the density bracket per m2")
    p.add_argument("--hi", default=1.0e-2, type=float,
                   help="Upper end of the density bracket per m2")
    p.add_argument("--rtol", default=1.0e-3, type=float,
                   help="Relative width of the final bracket")

    p = add("op3", "Minimize an exposure index percentile")
    _add_rho(p)
    _add_component(p)
    p.add_argument("--param", default="lambda_b",
                   choices=["lambda_b", "hole_radius"],
                   help="Parameter searched, the other is held fixed")
    p.add_argument("--lo", default=None, type=float,
                   help="Lower end of the bracket")
    p.add_argument("--hi", default=None, type=float,
                   help="Upper end of the bracket")
    p.add_argument("--rtol", default=0.02, type=float,
                   help="Relative tolerance in the parameter")

    p = add("mc-validate", "Analytic results against Monte Carlo")
    p.add_argument("--realizations", default=None, type=int,
                   help="Number of network realizations")

    p = add("sweep", "One metric over one parameter")
    p.add_argument("--param", required=True,
                   help="Flat model parameter, a *_db alias, w or x0")
    p.add_argument("--from", dest="start", required=True, type=float)
    p.add_argument("--to", dest="stop", required=True, type=float)
    p.add_argument("--points", default=11, type=int)
    p.add_argument("--metric", required=True,
                   help="e.g. dl-coverage, ul-p95, ei-p95, dl-cdf, op1")
    p.add_argument("--linear", default=False, action="store_true",
                   help="Linearly instead of logarithmically spaced values")

    p = add("figure", "Canned curve table")
    p.add_argument("number", type=int, choices=FIGURES)

    p = add("dump-pattern", "Write one network realization")
    p.add_argument("--index", default=0, type=int,
                   help="Realization index in the seeded stream family")
    p.add_argument("--window", default=None, type=float,
                   help="Window radius in m")
    return ap


def reproducible_command(argv):
    """Command line without the flags that only affect execution"""
    kept = []
    i = 0
    while i < len(argv):
        token = argv[i]
        name = token.split("=", 1)[0]
        if name in _EXECUTION_FLAGS:
            i += 2 if _EXECUTION_FLAGS[name] and "=" not in token else 1
            continue
        if name in ("-v", "--verbose"):
            i += 1
            if "=" not in token and i < len(argv) and argv[i].isdigit():
                i += 1
            continue
        kept.append(token)
        i += 1
    return " ".join(["emfhole"] + kept)


def _base_config(args, comm):
    if args.config is None:
        scenario = Scenario(args.scenario or Scenario.WORST.value)
        return Config(model=default_model(scenario), scenario=scenario)
    Logger.rank0.log(
        logging.INFO, f"Attempting to parse config file {args.config} as .toml"
    )
    toml_config = read_config_toml(args.config)
    config = parse_config_toml(
        toml_config, file_path=os.path.abspath(args.config), comm=comm
    )
    Logger.rank0.log(
        logging.INFO, f"Successfully parsed {args.config} as .toml file"
    )
    if args.scenario is not None and Scenario(args.scenario) is not config.scenario:
        raise ValueError(
            f"--scenario {args.scenario} conflicts with scenario "
            f"{config.scenario.value} of {args.config}"
        )
    return config


def apply_overrides(config, args):
    """Command line values take precedence over the configuration file"""
    if args.seed is not None:
        config.montecarlo = replace(config.montecarlo, seed=args.seed)
    config.montecarlo = replace(config.montecarlo, threads=args.threads)
    tolerances = {
        k: v for k, v in (("tol_cdf", args.tol_cdf),
                          ("tol_tail", args.tol_tail)) if v is not None
    }
    if tolerances:
        config.quadrature = replace(config.quadrature, **tolerances)
    if args.location is not None:
        config.location = UserLocation(args.location)
    uplink = {
        k: getattr(args, flag, None) for k, flag in (
            ("epsilon", "epsilon"), ("p_max", "pmax"),
            ("device_distance", "u0"),
        )
    }
    uplink = {k: v for k, v in uplink.items() if v is not None}
    if uplink:
        config.model = config.model.replace(**uplink)
    return config


def configure_runtime(argv, comm):
    """Parse command line arguments and configuration file

    Parameters
    ----------
    argv : list[str]
        Command line arguments without the program name.
    comm : mpi4py.Comm
        MPI communicator to use for rank commuication.

    Returns
    -------
    args : argparse.Namespace
        Namespace containing command line arguments.
    config : emfhole.input_parser.Config
        Parsed and validated configuration object.
    """
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        raise ValueError(f"--threads must be at least 1, not {args.threads}")

    # Setup logger
    Logger.setup(
        default_level=logging.INFO,
        log_file=args.logfile,
        verbose=args.verbose,
    )

    if args.profile:
        dest_directory = (
            os.path.dirname(os.path.abspath(args.out)) if args.out
            else os.getcwd()
        )
        prof_file_name = "cpu.txt-%05d-of-%05d" % (comm.rank, comm.size)
        output_file = open(os.path.join(dest_directory, prof_file_name), "w")
        pr = cProfile.Profile()

        def profile_atexit():
            pr.disable()
            # Dump results:
            # - for binary dump
            prof_file_bin = "cpu.prof-%05d-of-%05d" % (comm.rank, comm.size)
            pr.dump_stats(os.path.join(dest_directory, prof_file_bin))
            stats = pstats.Stats(pr, stream=output_file)
            stats.sort_stats("time").print_stats()
            output_file.close()

        atexit.register(profile_atexit)

        pr.enable()

    config = _base_config(args, comm)
    config = apply_overrides(config, args)
    config.command_line_full = reproducible_command(list(argv))
    config = check_config(config, comm=comm)
    Logger.rank0.log(logging.INFO, str(config))
    return args, config
