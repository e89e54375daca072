"""Parses and handles the network model and run configuration
"""
import re
import copy
import enum
import tomli
import datetime
import logging
import warnings
import numpy as np
from mpi4py import MPI
from dataclasses import dataclass, field, fields, replace
from typing import List, Optional
from .logger import Logger


SPEED_OF_LIGHT = 299792458.0  # m s-1


class Scenario(enum.Enum):
    """Named parameter presets"""
    WORST = "worst"
    TYPICAL = "typical"


class UserLocation(enum.Enum):
    """Placement of the typical user relative to the exclusion zones

    A user inside a hole (e.g. at a school or hospital) sees no BS closer than
    the hole radius, a user outside the holes may be arbitrarily close to its
    serving BS.
    """
    INSIDE = "in"
    OUTSIDE = "out"

    def v(self, R):
        """Lower limit of the serving distance, :math:`v(R)`"""
        return float(R) if self is UserLocation.INSIDE else 0.0


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=np.float64) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


def free_space_ref_path_gain(carrier_freq, reference_distance=1.0):
    """Free-space path gain :math:`(c / (4 \\pi f d_0))^2` at the reference
    distance"""
    return (
        SPEED_OF_LIGHT / (4.0 * np.pi * carrier_freq * reference_distance)
    ) ** 2


_DENSITY_UNITS = {"m2": 1.0, "km2": 1.0e-6}
_DENSITY_RE = re.compile(
    r"^\s*([-+0-9.eE]+)\s*(?:/\s*(m2|km2|m\^2|km\^2))?\s*$"
)


def parse_density(value):
    """Interpret a density given in BSs per m² or with an explicit unit suffix

    Parameters
    ----------
    value : float or str
        Plain numbers are taken in units of per m². Strings may carry a
        :code:`"/m2"` or :code:`"/km2"` suffix, e.g. :code:`"20/km2"`.

    Returns
    -------
    density : float
        Density in units of per m².
    """
    if isinstance(value, bool):
        raise TypeError(f"Could not interpret {repr(value)} as a density.")
    if isinstance(value, (int, float)):
        return float(value)
    match = _DENSITY_RE.match(str(value))
    if match is None:
        raise ValueError(f"Could not interpret {repr(value)} as a density.")
    number, unit = match.groups()
    unit = (unit or "m2").replace("^", "")
    return float(number) * _DENSITY_UNITS[unit]


@dataclass(frozen=True)
class PointProcessParams:
    """Baseline BS process, restricted areas, and exclusion zones

    Attributes
    ----------
    lambda_b : float
        Baseline BS density in BSs per m².
    lambda_r : float
        Density of restricted areas (hole centers) per m².
    hole_radius : float
        Exclusion zone radius :math:`R` in meters.
    php_pi_correction : bool
        Insert the factor :math:`\\pi` in the exponent of the effective BS
        density, :math:`\\lambda_b e^{-\\lambda_r \\pi R^2}`.
    """
    lambda_b: float
    lambda_r: float
    hole_radius: float
    php_pi_correction: bool = False

    def __post_init__(self):
        if not self.lambda_b > 0:
            raise ValueError(f"lambda_b must be positive, not {self.lambda_b}")
        if self.lambda_r < 0:
            raise ValueError(
                f"lambda_r must be non-negative, not {self.lambda_r}"
            )
        if self.hole_radius < 0:
            raise ValueError(
                f"hole_radius must be non-negative, not {self.hole_radius}"
            )


@dataclass(frozen=True)
class DownlinkRadioParams:
    """Downlink radio parameters

    Attributes
    ----------
    bs_transmit_power : float
        BS transmit power :math:`P_t` in W.
    antenna_gain : float
        Linear BS antenna gain :math:`G_t`.
    user_gain : float
        Linear user antenna gain :math:`G_u`.
    ref_path_gain : float
        Linear reference path gain :math:`\\eta` at 1 m.
    carrier_freq : float
        Carrier frequency in Hz.
    alpha : float
        Path loss exponent of the SNR.
    beta : float
        Path loss exponent of the power density.
    noise_power_dl : float
        Downlink noise power in W.
    nakagami_m : int
        Nakagami fading parameter.
    snr_threshold_dl : float
        Linear downlink SNR threshold :math:`\\tau`.
    """
    bs_transmit_power: float
    antenna_gain: float
    user_gain: float
    ref_path_gain: float
    carrier_freq: float
    alpha: float
    beta: float
    noise_power_dl: float
    nakagami_m: int
    snr_threshold_dl: float

    def __post_init__(self):
        for name in ("bs_transmit_power", "antenna_gain", "user_gain",
                     "ref_path_gain", "carrier_freq"):
            if not getattr(self, name) > 0:
                raise ValueError(
                    f"{name} must be positive, not {getattr(self, name)}"
                )
        for name in ("alpha", "beta"):
            if not getattr(self, name) > 2:
                raise ValueError(
                    f"{name} must exceed 2 for the aggregate field to be "
                    f"finite, not {getattr(self, name)}"
                )
        if self.noise_power_dl < 0 or self.snr_threshold_dl < 0:
            raise ValueError("noise_power_dl and snr_threshold_dl must be "
                             "non-negative")
        if (isinstance(self.nakagami_m, bool)
                or not isinstance(self.nakagami_m, (int, np.integer))
                or self.nakagami_m < 1):
            raise ValueError(
                f"nakagami_m must be a positive integer, not "
                f"{repr(self.nakagami_m)}"
            )

    @property
    def eirp(self):
        """Effective isotropic radiated power :math:`p = P_t G_t` in W"""
        return self.bs_transmit_power * self.antenna_gain


@dataclass(frozen=True)
class UplinkParams:
    """Uplink fractional power control and device parameters

    Attributes
    ----------
    pu_coeff : float
        Power control coefficient :math:`p_u` in W.
    p_max : float
        Maximum device transmit power in W.
    epsilon : float
        Power control factor in :math:`(0, 1]`.
    device_distance : float
        Distance :math:`u_0` between the device and the user's body in m.
    noise_power_ul : float
        Uplink noise power in W.
    snr_threshold_ul : float
        Linear uplink SNR threshold.
    """
    pu_coeff: float
    p_max: float
    epsilon: float
    device_distance: float
    noise_power_ul: float
    snr_threshold_ul: float

    def __post_init__(self):
        if not self.pu_coeff > 0:
            raise ValueError(f"pu_coeff must be positive, not {self.pu_coeff}")
        if not self.p_max >= self.pu_coeff:
            raise ValueError(
                f"p_max ({self.p_max}) must be at least pu_coeff "
                f"({self.pu_coeff})"
            )
        if not 0 < self.epsilon <= 1:
            raise ValueError(
                f"epsilon must be in (0, 1], not {self.epsilon}"
            )
        if not self.device_distance > 0:
            raise ValueError(
                f"device_distance must be positive, not "
                f"{self.device_distance}"
            )
        if self.noise_power_ul < 0 or self.snr_threshold_ul < 0:
            raise ValueError("noise_power_ul and snr_threshold_ul must be "
                             "non-negative")

    def x_max(self, alpha):
        """Serving distance beyond which the device transmits at full power"""
        return (self.p_max / self.pu_coeff) ** (1.0 / (alpha * self.epsilon))


@dataclass(frozen=True)
class SarParams:
    """Reference specific absorption rates weighting the exposure index

    Attributes
    ----------
    sar_ul : float
        Uplink SAR per transmitted W, (W/kg)/W.
    sar_dl : float
        Downlink SAR per incident power density, (W/kg)/(W/m²).
    """
    sar_ul: float
    sar_dl: float

    def __post_init__(self):
        if self.sar_ul < 0 or self.sar_dl < 0:
            raise ValueError(
                f"SAR values must be non-negative, got sar_ul={self.sar_ul}, "
                f"sar_dl={self.sar_dl}"
            )


@dataclass(frozen=True)
class ComplianceParams:
    w_max: float
    rho: float

    def __post_init__(self):
        if not self.w_max > 0:
            raise ValueError(f"w_max must be positive, not {self.w_max}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must be in (0, 1), not {self.rho}")


@dataclass(frozen=True)
class NetworkModel:
    """Full parameter bundle of the network

    Immutable, derived quantities are recomputed on every read so they always
    satisfy their defining formulas. Use :code:`replace` to obtain modified
    copies addressing any field by its flat name, e.g.
    :code:`model.replace(lambda_b=1e-4, epsilon=0.6)`.

    Attributes
    ----------
    point_process : PointProcessParams
    downlink : DownlinkRadioParams
    uplink : UplinkParams
    sar : SarParams
    compliance : ComplianceParams
    """
    point_process: PointProcessParams
    downlink: DownlinkRadioParams
    uplink: UplinkParams
    sar: SarParams
    compliance: ComplianceParams

    @property
    def eirp(self):
        return self.downlink.eirp

    @property
    def x_max(self):
        return self.uplink.x_max(self.downlink.alpha)

    @property
    def effective_bs_density(self):
        return effective_bs_density(self.point_process)

    @property
    def field_scale(self):
        """Power density per unit fading at unit distance, :math:`p/(4\\pi)`"""
        return self.eirp / (4.0 * np.pi)

    def replace(self, **changes):
        parts = {}
        for key, value in changes.items():
            try:
                owner = _FIELD_OWNER[key]
            except KeyError as e:
                raise TypeError(
                    f"NetworkModel has no parameter {repr(key)}"
                ) from e
            parts.setdefault(owner, {})[key] = value
        return replace(self, **{
            owner: replace(getattr(self, owner), **values)
            for owner, values in parts.items()
        })

    def flat(self):
        """Dictionary of every parameter by its flat name"""
        out = {}
        for owner in _FIELD_OWNERS:
            part = getattr(self, owner)
            for f in fields(part):
                out[f.name] = getattr(part, f.name)
        return out


_FIELD_OWNERS = {
    "point_process": PointProcessParams,
    "downlink": DownlinkRadioParams,
    "uplink": UplinkParams,
    "sar": SarParams,
    "compliance": ComplianceParams,
}
_FIELD_OWNER = {
    f.name: owner
    for owner, cls in _FIELD_OWNERS.items() for f in fields(cls)
}


def effective_bs_density(pp):
    """Density of the PHP approximated as a PPP,
    :math:`\\lambda_B = \\lambda_b e^{-\\lambda_r R^2}`

    With :code:`pp.php_pi_correction` the exponent carries the hole area
    :math:`\\pi R^2` instead.
    """
    area = pp.hole_radius ** 2
    if pp.php_pi_correction:
        area *= np.pi
    return pp.lambda_b * np.exp(-pp.lambda_r * area)


_WORST_CASE = dict(
    lambda_b=1.0e-5,
    lambda_r=1.0e-6,
    hole_radius=50.0,
    php_pi_correction=False,
    bs_transmit_power=200.0,
    antenna_gain=10.0 ** 1.5,
    user_gain=1.0,
    ref_path_gain=1.0e-4,
    carrier_freq=2.6e9,
    alpha=4.0,
    beta=2.5,
    noise_power_dl=1.0e-11,
    nakagami_m=1,
    snr_threshold_dl=1.0e4,
    pu_coeff=8.0e-6,
    p_max=0.2,
    epsilon=0.4,
    device_distance=0.2,
    noise_power_ul=1.0e-12,
    snr_threshold_ul=1.0e3,
    sar_ul=0.0053,
    sar_dl=0.0042,
    w_max=10.0,
    rho=0.95,
)

TYPICAL_POWER_REDUCTION = 0.31
TYPICAL_NOMINAL_POWER = 100.0  # W


def _build_model(params):
    kwargs = {owner: {} for owner in _FIELD_OWNERS}
    for key, value in params.items():
        kwargs[_FIELD_OWNER[key]][key] = value
    return NetworkModel(**{
        owner: _FIELD_OWNERS[owner](**values)
        for owner, values in kwargs.items()
    })


def default_model(scenario=Scenario.WORST, recompute_ref_path_gain=False):
    """Preset network model

    Parameters
    ----------
    scenario : Scenario or str, optional
        :code:`WORST` is the full power worst case, :code:`TYPICAL` applies
        the statistical power reduction factor to a nominal 100 W BS and
        uses :math:`\\alpha = \\beta = 4`.
    recompute_ref_path_gain : bool, optional
        Recompute :math:`\\eta` from the carrier frequency instead of using
        the tabulated -40 dB.

    Returns
    -------
    model : NetworkModel
    """
    scenario = Scenario(scenario)
    params = dict(_WORST_CASE)
    if scenario is Scenario.TYPICAL:
        params.update(
            bs_transmit_power=TYPICAL_NOMINAL_POWER * TYPICAL_POWER_REDUCTION,
            alpha=4.0,
            beta=4.0,
        )
    if recompute_ref_path_gain:
        params["ref_path_gain"] = free_space_ref_path_gain(
            params["carrier_freq"]
        )
    return _build_model(params)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances of the numerical integration and inversion

    Attributes
    ----------
    tol_cdf : float
        Target accuracy of CDF values and percentile inversion.
    tol_tail : float
        Truncation tolerance of semi-infinite integrals.
    max_panels : int
        Maximum number of quadrature panels before giving up.
    t_min_scale : float
        Lower cut of the Gil-Pelaez integral relative to :math:`1/w`.
    nodes : int
        Gauss-Legendre nodes per panel.
    max_bracket_steps : int
        Maximum number of geometric bracket expansions in percentile
        searches.
    max_doublings : int
        Maximum number of doublings of the Gil-Pelaez truncation point.
    """
    tol_cdf: float = 1.0e-4
    tol_tail: float = 1.0e-6
    max_panels: int = 400
    t_min_scale: float = 1.0e-8
    nodes: int = 12
    max_bracket_steps: int = 60
    max_doublings: int = 22

    def __post_init__(self):
        if not 0 < self.tol_tail <= self.tol_cdf < 1:
            raise ValueError(
                f"Tolerances must satisfy 0 < tol_tail <= tol_cdf < 1, got "
                f"tol_tail={self.tol_tail}, tol_cdf={self.tol_cdf}"
            )
        if self.max_panels < 1 or self.nodes < 2:
            raise ValueError("max_panels must be >= 1 and nodes >= 2")
        if not 0 < self.t_min_scale < 1:
            raise ValueError(
                f"t_min_scale must be in (0, 1), not {self.t_min_scale}"
            )


@dataclass(frozen=True)
class MonteCarloConfig:
    """Monte Carlo oracle settings

    Attributes
    ----------
    n_realizations : int
        Number of network realizations.
    seed : int, optional
        Root entropy of the per-realization random streams.
    window_radius : float, optional
        Radius of the simulation disk in meters. Derived from the truncation
        error bounds when not given.
    window_factor : float
        Safety multiple applied to the derived window radius.
    block_size : int
        Realizations per work item handed to a thread.
    threads : int
        Worker threads per MPI rank.
    """
    n_realizations: int = 100_000
    seed: Optional[int] = None
    window_radius: Optional[float] = None
    window_factor: float = 3.0
    block_size: int = 1000
    threads: int = 1


@dataclass
class Config:
    """Configuration object

    Handles and verifies the run configuration specified in the configuration
    file.

    Attributes
    ----------
    model : NetworkModel
        Network parameters.
    quadrature : QuadratureConfig
        Numerical integration tolerances.
    montecarlo : MonteCarloConfig
        Monte Carlo oracle settings.
    scenario : Scenario
        Preset the model parameters were derived from.
    location : UserLocation
        Default placement of the typical user.
    file_name : str, optional
        File path of the parsed configuration file.
    name : str, optional
        Name of the run.
    tags : list[str], optional
        Tags for the run.
    command_line_full : str, optional
        Command line the run was started with, recorded in output headers.
    """
    model: NetworkModel
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    montecarlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    scenario: Scenario = Scenario.WORST
    location: UserLocation = UserLocation.OUTSIDE
    file_name: str = "<config file path unknown>"
    name: str = None
    tags: List[str] = field(default_factory=list)
    command_line_full: str = None

    def __str__(self):
        ret_str = f'\n\n\tConfig: {self.file_name}\n\t{50 * "-"}\n'
        for k, v in self.__dict__.items():
            if k in ("model", "quadrature", "montecarlo"):
                continue
            ret_str += f"\t{k}: {v}\n"
        for k, v in self.model.flat().items():
            ret_str += f"\t{k}: {v}\n"
        ret_str += f"\teirp: {self.model.eirp}\n"
        ret_str += f"\tx_max: {self.model.x_max}\n"
        ret_str += f"\tlambda_B: {self.model.effective_bs_density}\n"
        for part in (self.quadrature, self.montecarlo):
            for f in fields(part):
                ret_str += f"\t{f.name}: {getattr(part, f.name)}\n"
        return ret_str

    def metadata(self):
        """Flat :code:`key = value` snapshot used for output headers

        Execution settings that do not change results (thread count, the
        timestamped default name) are left out, so that reruns produce
        identical headers.
        """
        meta = {
            "scenario": self.scenario.value,
            "location": self.location.value,
        }
        meta.update(self.model.flat())
        for part in (self.quadrature, self.montecarlo):
            for f in fields(part):
                if f.name != "threads":
                    meta[f.name] = getattr(part, f.name)
        return meta


def read_config_toml(file_path):
    with open(file_path, "r") as in_file:
        toml_content = in_file.read()
    return toml_content


_META_KEYS = ("name", "tags", "scenario", "location", "antenna_gain_db",
              "snr_threshold_dl_db", "snr_threshold_ul_db",
              "recompute_ref_path_gain")
_QUADRATURE_KEYS = tuple(f.name for f in fields(QuadratureConfig))
_MONTECARLO_KEYS = ("n_realizations", "seed", "window_radius",
                    "window_factor", "block_size")


def _raise(err_str, exc_type=ValueError, comm=MPI.COMM_WORLD, cause=None):
    Logger.rank0.log(logging.ERROR, err_str)
    if comm.Get_rank() == 0:
        raise exc_type(err_str) from cause


def _warn(warn_str, comm=MPI.COMM_WORLD):
    Logger.rank0.log(logging.WARNING, warn_str)
    if comm.Get_rank() == 0:
        warnings.warn(warn_str)


def _coerce_model_params(params, file_path, comm):
    rho = params.get("rho")
    if rho is not None and 1 < rho < 100:
        _warn(
            f"rho = {rho} in {file_path} looks like a percentage, using "
            f"{rho / 100}", comm=comm,
        )
        params["rho"] = rho / 100
    m = params.get("nakagami_m")
    if isinstance(m, float):
        if m.is_integer():
            _warn(
                f"nakagami_m is a float ({m}), not int, using {int(m)}",
                comm=comm,
            )
            params["nakagami_m"] = int(m)
        else:
            _raise(
                f"nakagami_m must be a positive integer, not {m}. The "
                f"finite-sum coverage expressions are only valid for integer "
                f"m.", comm=comm,
            )
    for k in ("lambda_b", "lambda_r"):
        if k in params:
            try:
                params[k] = parse_density(params[k])
            except (TypeError, ValueError) as e:
                _raise(str(e), exc_type=type(e), comm=comm, cause=e)
    return params


def parse_config_toml(toml_content, file_path=None, comm=MPI.COMM_WORLD):
    parsed_toml = tomli.loads(toml_content)
    config_dict = {}

    # Flatten the .toml dictionary, ignoring the top level [tag] directives (if
    # any).
    for k, v in parsed_toml.items():
        if isinstance(v, dict):
            for nested_k, nested_v in v.items():
                config_dict[nested_k] = nested_v
        else:
            config_dict[k] = v

    unknown = [
        k for k in config_dict
        if k not in _FIELD_OWNER and k not in _META_KEYS
        and k not in _QUADRATURE_KEYS and k not in _MONTECARLO_KEYS
    ]
    if unknown:
        _raise(
            f"Unknown keys {unknown} in config file {file_path}.", comm=comm,
        )

    try:
        scenario = Scenario(config_dict.get("scenario", "worst"))
        location = UserLocation(config_dict.get("location", "out"))
    except ValueError as e:
        _raise(f"Invalid scenario or location in {file_path}: {e}",
               comm=comm, cause=e)

    params = default_model(scenario).flat()
    for db_key, key in (("antenna_gain_db", "antenna_gain"),
                        ("snr_threshold_dl_db", "snr_threshold_dl"),
                        ("snr_threshold_ul_db", "snr_threshold_ul")):
        if db_key in config_dict:
            if key in config_dict:
                _raise(f"Specify only one of {key} and {db_key}.", comm=comm)
            params[key] = float(db_to_linear(config_dict[db_key]))
    params.update({k: v for k, v in config_dict.items() if k in _FIELD_OWNER})
    if (config_dict.get("recompute_ref_path_gain", False)
            and "ref_path_gain" not in config_dict):
        params["ref_path_gain"] = free_space_ref_path_gain(
            params["carrier_freq"]
        )
    params = _coerce_model_params(params, file_path, comm)

    try:
        model = _build_model(params)
        quadrature = QuadratureConfig(**{
            k: config_dict[k] for k in _QUADRATURE_KEYS if k in config_dict
        })
        montecarlo = MonteCarloConfig(**{
            k: config_dict[k] for k in _MONTECARLO_KEYS if k in config_dict
        })
    except (TypeError, ValueError) as e:
        _raise(
            f"Invalid parameters in config file {file_path}: {e}",
            exc_type=type(e), comm=comm, cause=e,
        )

    config = Config(
        model=model,
        quadrature=quadrature,
        montecarlo=montecarlo,
        scenario=scenario,
        location=location,
        name=config_dict.get("name"),
        tags=list(config_dict.get("tags", [])),
    )
    if file_path is not None:
        config.file_name = file_path
    return config


def check_name(config, comm=MPI.COMM_WORLD):
    if config.name is None:
        root_current_time = ""
        if comm.Get_rank() == 0:
            root_current_time = datetime.datetime.now().strftime(
                "%m/%d/%Y, %H:%M:%S"
            )
        current_time = comm.bcast(root_current_time, root=0)
        config.name = "emfhole " + current_time
    return config


def check_seed(config, comm=MPI.COMM_WORLD):
    """Fix the root entropy of all random streams

    If no seed is given, rank 0 draws fresh entropy and broadcasts it so the
    run is reproducible from the recorded value.
    """
    if config.montecarlo.seed is None:
        entropy = None
        if comm.Get_rank() == 0:
            entropy = int(np.random.SeedSequence().entropy % (2 ** 63))
        entropy = comm.bcast(entropy, root=0)
        info_str = f"No seed specified, using entropy {entropy}"
        Logger.rank0.log(logging.INFO, info_str)
        config = copy.deepcopy(config)
        config.montecarlo = replace(config.montecarlo, seed=entropy)
    elif config.montecarlo.seed < 0:
        _raise(f"seed must be non-negative, not {config.montecarlo.seed}",
               comm=comm)
    return config


def check_montecarlo(config, comm=MPI.COMM_WORLD):
    mc = config.montecarlo
    if not isinstance(mc.n_realizations, (int, np.integer)):
        if (isinstance(mc.n_realizations, float)
                and mc.n_realizations.is_integer()):
            config.montecarlo = replace(mc, n_realizations=int(
                mc.n_realizations
            ))
            mc = config.montecarlo
        else:
            _raise(
                f"n_realizations must be an integer, not "
                f"{repr(mc.n_realizations)}", exc_type=TypeError, comm=comm,
            )
    if mc.n_realizations < 1:
        _raise(f"n_realizations must be at least 1, not {mc.n_realizations}",
               comm=comm)
    if mc.block_size < 1 or mc.threads < 1:
        _raise("block_size and threads must be at least 1", comm=comm)
    if mc.window_factor < 1:
        _warn(
            f"window_factor = {mc.window_factor} shrinks the window below the "
            f"truncation bound, using 1.0", comm=comm,
        )
        config.montecarlo = replace(mc, window_factor=1.0)
    if mc.window_radius is not None:
        R = config.model.point_process.hole_radius
        if mc.window_radius <= R:
            _raise(
                f"window_radius ({mc.window_radius}) must exceed the hole "
                f"radius ({R})", comm=comm,
            )
    return config


def check_path_loss(config, comm=MPI.COMM_WORLD):
    beta = config.model.downlink.beta
    if beta < 2.2:
        _warn(
            f"beta = {beta} is close to 2, the aggregate field converges "
            f"slowly and Monte Carlo windows become very large", comm=comm,
        )
    return config


def check_config(config, comm=MPI.COMM_WORLD):
    """Performs various checks on the specfied config to ensure consistency

    Parameters
    ----------
    config : Config
        Configuration object.
    comm : mpi4py.Comm, optional
        MPI communicator, defaults to :code:`mpi4py.COMM_WORLD`.

    Returns
    -------
    config : Config
        Validated configuration object.
    """
    config = check_name(config, comm=comm)
    config = check_seed(config, comm=comm)
    config = check_montecarlo(config, comm=comm)
    config = check_path_loss(config, comm=comm)
    return config
