"""Monte Carlo oracle for the exposure and coverage analytics

Every realization :code:`i` draws from its own stream
:code:`point_process.realization_stream(seed, i)`. Realizations are split in
contiguous ranges over the MPI ranks and in blocks over worker threads within
a rank, and gathered in realization order, so samples are identical for any
number of ranks and threads.
"""
import enum
import logging
from dataclasses import dataclass, field, replace
from multiprocessing.pool import ThreadPool
import numpy as np
from mpi4py import MPI
from scipy import stats
from .downlink import (
    dl_coverage,
    dl_exposure_cdf_curve,
    dl_exposure_mean,
    dl_received_power_mean,
)
from .fading import sample_gain
from .gilpelaez import CdfCurve
from .input_parser import MonteCarloConfig, UserLocation
from .joint_exposure import ei_cdf, ei_laplace
from .point_process import (
    php_retention_ratio,
    realization_stream,
    retention_report,
    sample_contact_distance,
    sample_php,
    sample_ppp,
)
from .uplink import (
    ul_coverage,
    ul_exposure_cdf_curve,
    ul_exposure_scale,
    ul_received_power_mean,
    ul_transmit_power,
)
from .logger import Logger


CONTACT_TRUNCATION = 1.0e-6
TAIL_TOLERANCE = 0.01
REFERENCE_REALIZATIONS = 100_000


class WindowTooSmall(RuntimeError):
    """The field beyond the simulation window is not negligible"""


class Link(enum.Enum):
    DL = "dl"
    UL = "ul"


@dataclass
class SampleSet:
    """Empirical samples of one metric

    Attributes
    ----------
    values : numpy.ndarray
        One nonnegative sample per realization, in realization order.
    metric : str
        Name of the sampled quantity.
    n_realizations : int
    seed : int
        Root entropy of the realization streams.
    window_radius : float
        Simulation disk radius in m, :code:`numpy.nan` if the metric needs no
        window.
    location : UserLocation
    model : dict
        Flat snapshot of the network parameters.
    components : dict of str to numpy.ndarray
        Per-realization terms summing to :code:`values`, if any.
    """
    values: np.ndarray
    metric: str
    n_realizations: int
    seed: int
    window_radius: float
    location: UserLocation
    model: dict
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size == 0:
            raise ValueError("A SampleSet needs at least one sample")
        if np.any(self.values < 0):
            raise ValueError(f"Negative samples in {self.metric}")

    def __len__(self):
        return self.values.size


def realization_range(n, comm=MPI.COMM_WORLD):
    """Contiguous share :code:`first..last-1` of :code:`n` realizations for
    this rank"""
    rank, size = comm.Get_rank(), comm.Get_size()
    return rank * n // size, (rank + 1) * n // size


def _run(simulate_one, n, seed, mc, comm, columns=1):
    if n < 1:
        raise ValueError(f"Need at least one realization, not {n}")
    first, last = realization_range(n, comm)
    blocks = [
        (lo, min(lo + mc.block_size, last))
        for lo in range(first, last, mc.block_size)
    ]

    def run_block(bounds):
        lo, hi = bounds
        return np.array(
            [simulate_one(realization_stream(seed, i)) for i in range(lo, hi)],
            dtype=np.float64,
        ).reshape(hi - lo, columns)

    with ThreadPool(processes=mc.threads) as pool:
        local = pool.map(run_block, blocks)
    local = np.concatenate(local) if local else np.empty((0, columns))
    Logger.all_ranks.log(
        logging.DEBUG,
        f"simulated realizations {first}..{last - 1} in {len(blocks)} blocks",
    )
    return np.concatenate(comm.allgather(local))


def _field_tail_mean(model, radius):
    """Mean power density of a PPP of density :math:`\\lambda_B` beyond
    :code:`radius`"""
    beta = model.downlink.beta
    return (
        2.0 * np.pi * model.effective_bs_density * model.field_scale
        * radius ** (2.0 - beta) / (beta - 2.0)
    )


def _field_tail_std(model, radius):
    beta, m = model.downlink.beta, model.downlink.nakagami_m
    second_moment = 1.0 + 1.0 / m
    return np.sqrt(
        2.0 * np.pi * model.effective_bs_density * model.field_scale ** 2
        * second_moment * radius ** (2.0 - 2.0 * beta) / (2.0 * beta - 2.0)
    )


def contact_window_radius(model, factor=3.0):
    lambda_B = model.effective_bs_density
    return factor * (
        np.sqrt(-np.log(CONTACT_TRUNCATION) / (np.pi * lambda_B))
        + model.point_process.hole_radius
    )


def default_window_radius(model, loc, factor=3.0):
    """Simulation disk radius from the two truncation criteria

    The closest BS must lie in the window except with probability
    :code:`CONTACT_TRUNCATION`, scaled by :code:`factor`, and the standard
    deviation of the field beyond the window must stay below half of
    :code:`TAIL_TOLERANCE` times the median exposure due to the serving BS
    alone.
    """
    lambda_B = model.effective_bs_density
    beta = model.downlink.beta
    v = UserLocation(loc).v(model.point_process.hole_radius)
    x_median = np.sqrt(v ** 2 + np.log(2.0) / (np.pi * lambda_B))
    median = model.field_scale * x_median ** (-beta)
    # tail std at radius r is _field_tail_std(model, 1) * r^(1 - beta)
    tail = (
        _field_tail_std(model, 1.0) / (0.5 * TAIL_TOLERANCE * median)
    ) ** (1.0 / (beta - 1.0))
    return float(max(contact_window_radius(model, factor), tail))


def _check_window(median, tail_std, window, comm=MPI.COMM_WORLD):
    if tail_std > TAIL_TOLERANCE * median:
        err_str = (
            f"Field beyond the window of radius {window:.1f} m has standard "
            f"deviation {tail_std:.3g}, more than {TAIL_TOLERANCE:g} of the "
            f"sample median {median:.3g}; increase window_radius"
        )
        Logger.rank0.log(logging.ERROR, err_str)
        raise WindowTooSmall(err_str)


def _window(model, loc, mc):
    if mc.window_radius is not None:
        return float(mc.window_radius)
    return default_window_radius(model, loc, mc.window_factor)


def _sample_set(values, metric, n, seed, window, loc, model, **components):
    return SampleSet(
        values=values, metric=metric, n_realizations=n, seed=seed,
        window_radius=window, location=UserLocation(loc), model=model.flat(),
        components=components,
    )


def simulate_dl_exposure(model, loc, n, seed, mc=None, comm=MPI.COMM_WORLD):
    """Downlink power density at the typical user in sampled PHP networks

    Each realization carves a PHP on the window, sums
    :math:`p H_i/(4\\pi x_i^\\beta)` over the retained BSs and adds the mean
    field of a PPP of density :math:`\\lambda_B` beyond the window. A user
    inside an exclusion zone is modelled by an extra hole at the origin.

    Parameters
    ----------
    model : NetworkModel
    loc : UserLocation
    n : int
        Number of realizations.
    seed : int
        Root entropy of the realization streams.
    mc : MonteCarloConfig, optional
        Window, block size, and thread settings.
    comm : mpi4py.Comm, optional

    Returns
    -------
    samples : SampleSet

    Raises
    ------
    WindowTooSmall
        If the field beyond the window fluctuates by more than
        :code:`TAIL_TOLERANCE` of the sample median.
    """
    mc = mc or MonteCarloConfig()
    loc = UserLocation(loc)
    window = _window(model, loc, mc)
    pp, dl = model.point_process, model.downlink
    tail = _field_tail_mean(model, window)

    def one(rng):
        bs, _ = sample_php(
            pp, window, rng, hole_at_origin=loc is UserLocation.INSIDE
        )
        gain = sample_gain(dl.nakagami_m, rng, len(bs))
        return model.field_scale * np.sum(
            gain * bs.distances ** (-dl.beta)
        ) + tail

    values = _run(one, n, seed, mc, comm)[:, 0]
    _check_window(np.median(values), _field_tail_std(model, window), window,
                  comm)
    return _sample_set(values, "dl_exposure", n, seed, window, loc, model)


def _conditional_field(model, x0, window, rng):
    # serving BS at x0, PPP of density lambda_B beyond it
    dl = model.downlink
    others = sample_ppp(model.effective_bs_density, window, rng).distances
    others = others[others > x0]
    gain = sample_gain(dl.nakagami_m, rng, others.size + 1)
    return model.field_scale * (
        gain[0] * x0 ** (-dl.beta) + np.sum(gain[1:] * others ** (-dl.beta))
    ) + _field_tail_mean(model, max(window, x0))


def simulate_dl_conditional_exposure(model, x0, n, seed, mc=None,
                                     comm=MPI.COMM_WORLD):
    """Downlink power density with the serving BS pinned at distance
    :code:`x0` and the other BSs a PPP of density :math:`\\lambda_B` beyond
    it"""
    mc = mc or MonteCarloConfig()
    if not x0 > 0:
        raise ValueError(f"x0 must be positive, not {x0}")
    window = max(_window(model, UserLocation.OUTSIDE, mc), 2.0 * x0)

    values = _run(
        lambda rng: _conditional_field(model, x0, window, rng),
        n, seed, mc, comm,
    )[:, 0]
    _check_window(np.median(values), _field_tail_std(model, window), window,
                  comm)
    return _sample_set(
        values, f"dl_exposure_given_{x0:g}m", n, seed, window,
        UserLocation.OUTSIDE, model,
    )


def simulate_ul_exposure(model, loc, n, seed, mc=None, comm=MPI.COMM_WORLD):
    """Uplink power density at the user's body

    Draws the serving distance from its closed-form law, applies fractional
    power control and Nakagami-m fading of the device-to-body link.
    """
    mc = mc or MonteCarloConfig()
    loc = UserLocation(loc)
    scale = ul_exposure_scale(model)
    lambda_B = model.effective_bs_density
    R = model.point_process.hole_radius
    m = model.downlink.nakagami_m

    def one(rng):
        x0 = sample_contact_distance(lambda_B, R, loc, rng)
        return scale * ul_transmit_power(x0, model) * sample_gain(m, rng)

    values = _run(one, n, seed, mc, comm)[:, 0]
    return _sample_set(values, "ul_exposure", n, seed, np.nan, loc, model)


def simulate_ei(model, loc, n, seed, mc=None, comm=MPI.COMM_WORLD):
    """Exposure index samples with their uplink and downlink terms

    The uplink term :math:`\\mathrm{SAR}^{UL} P(x_0)` carries no fading. The
    downlink term is the conditional field given the serving distance
    :math:`x_0`, drawn from its closed-form law.
    """
    mc = mc or MonteCarloConfig()
    loc = UserLocation(loc)
    window = _window(model, loc, mc)
    sar = model.sar
    lambda_B = model.effective_bs_density
    R = model.point_process.hole_radius

    def one(rng):
        x0 = sample_contact_distance(lambda_B, R, loc, rng)
        ul = sar.sar_ul * ul_transmit_power(x0, model)
        dl = sar.sar_dl * _conditional_field(model, x0, window, rng)
        return ul + dl, ul, dl

    samples = _run(one, n, seed, mc, comm, columns=3)
    _check_window(
        np.median(samples[:, 0]),
        sar.sar_dl * _field_tail_std(model, window), window, comm,
    )
    return _sample_set(
        samples[:, 0], "ei", n, seed, window, loc, model,
        ul=samples[:, 1], dl=samples[:, 2],
    )


def simulate_coverage(model, loc, link, n, seed, mc=None,
                      comm=MPI.COMM_WORLD):
    """Fraction of sampled PHP networks in which the link SNR exceeds its
    threshold

    The serving BS is the closest retained BS. A realization without any BS
    in the window counts as not covered.
    """
    mc = mc or MonteCarloConfig()
    loc, link = UserLocation(loc), Link(link)
    window = (
        float(mc.window_radius) if mc.window_radius is not None
        else contact_window_radius(model, mc.window_factor)
    )
    pp, dl, ul = model.point_process, model.downlink, model.uplink
    if link is Link.DL:
        received, noise, tau = (dl_received_power_mean, dl.noise_power_dl,
                                dl.snr_threshold_dl)
    else:
        received, noise, tau = (ul_received_power_mean, ul.noise_power_ul,
                                ul.snr_threshold_ul)

    def one(rng):
        bs, _ = sample_php(
            pp, window, rng, hole_at_origin=loc is UserLocation.INSIDE
        )
        if len(bs) == 0:
            return 0.0
        signal = received(bs.distances.min(), model) * sample_gain(
            dl.nakagami_m, rng
        )
        return float(signal > tau * noise)

    covered = _run(one, n, seed, mc, comm)[:, 0]
    coverage = float(np.mean(covered))
    Logger.rank0.log(
        logging.INFO,
        f"simulated {link.name} coverage ({loc.name}) = {coverage:.4f} over "
        f"{n} realizations",
    )
    return coverage


def empirical_cdf(samples):
    """Right-continuous step CDF of a SampleSet or array of samples"""
    values = np.sort(getattr(samples, "values", samples), axis=None)
    return CdfCurve(
        grid=values, values=np.arange(1, values.size + 1) / values.size,
        step=True,
    )


def empirical_percentile(samples, rho):
    """Order statistic :math:`\\lceil \\rho n \\rceil`"""
    if not 0 < rho <= 1:
        raise ValueError(f"rho must be in (0, 1], not {rho}")
    return empirical_cdf(samples).percentile(rho)


def ks_distance(samples, curve):
    """Kolmogorov-Smirnov distance between samples and a CDF callable"""
    values = getattr(samples, "values", samples)
    return float(stats.kstest(values, curve).statistic)


def _curve_grid(values, points=160):
    lo, hi = np.quantile(values, [1e-3, 1.0 - 1e-3])
    lo = max(lo, 1e-6 * hi)
    return np.geomspace(lo, hi, points)


@dataclass
class ValidationRow:
    metric: str
    analytic: float
    empirical: float
    error: float
    tolerance: float
    passed: bool


def _row(metric, analytic, empirical, tolerance, relative=False, error=None):
    if error is None:
        error = abs(analytic - empirical)
        if relative:
            error /= abs(analytic)
    row = ValidationRow(
        metric=metric, analytic=float(analytic), empirical=float(empirical),
        error=float(error), tolerance=float(tolerance),
        passed=bool(error <= tolerance),
    )
    Logger.rank0.log(
        logging.INFO if row.passed else logging.WARNING,
        f"{metric}: analytic {row.analytic:.6g}, empirical "
        f"{row.empirical:.6g}, error {row.error:.3g} (tolerance "
        f"{row.tolerance:g}) {'passed' if row.passed else 'FAILED'}",
    )
    return row


def scaled_tolerance(tolerance, n):
    """Tolerance stated for :code:`REFERENCE_REALIZATIONS` samples, widened
    by :math:`\\sqrt{n_{ref}/n}` for fewer"""
    return tolerance * max(1.0, np.sqrt(REFERENCE_REALIZATIONS / n))


RETENTION_CHECK = dict(lambda_r=1.0e-6, hole_radius=200.0)
RETENTION_REALIZATIONS = 500


def validate(model, n, seed, mc=None, quad=None, comm=MPI.COMM_WORLD):
    """Analytic results against the Monte Carlo oracle

    Compares, for both user locations, the downlink and uplink coverage, the
    downlink, uplink and exposure index CDFs (by KS distance), the exposure
    index Laplace transform at the inverse sample median, and the downlink
    mean inside an exclusion zone (by Campbell's formula). Tolerances hold
    for :code:`REFERENCE_REALIZATIONS` samples and widen as
    :math:`1/\\sqrt{n}` below, the mean tolerance is at least four standard
    errors. Finally the empirical PHP retention decides between the two
    candidate effective densities.

    Returns
    -------
    rows : list of ValidationRow
        For the distribution rows :code:`analytic` and :code:`empirical` hold
        the 95th percentiles and :code:`error` the KS distance.
    retention : point_process.RetentionReport
    """
    mc = mc or MonteCarloConfig()
    R = model.point_process.hole_radius
    dl_ks_tolerance = scaled_tolerance(0.01 if R == 0 else 0.03, n)
    coverage_tolerance = scaled_tolerance(0.01, n)
    rows = []
    for loc in UserLocation:
        tag = loc.value
        rows.append(_row(
            f"dl_coverage_{tag}", dl_coverage(model, loc, quad),
            simulate_coverage(model, loc, Link.DL, n, seed, mc, comm),
            coverage_tolerance,
        ))
        samples = simulate_dl_exposure(model, loc, n, seed, mc, comm)
        curve = dl_exposure_cdf_curve(
            _curve_grid(samples.values), model, loc, quad
        )
        rows.append(_row(
            f"dl_exposure_{tag}", curve.percentile(0.95),
            empirical_percentile(samples, 0.95), dl_ks_tolerance,
            error=ks_distance(samples, curve),
        ))
        if loc is UserLocation.INSIDE and R > 0:
            mean = dl_exposure_mean(model, loc)
            standard_error = np.std(samples.values) / np.sqrt(n) / mean
            rows.append(_row(
                f"dl_exposure_mean_{tag}", mean, np.mean(samples.values),
                max(scaled_tolerance(0.02, n), 4.0 * standard_error),
                relative=True,
            ))
        rows.append(_row(
            f"ul_coverage_{tag}", ul_coverage(model, loc, quad),
            simulate_coverage(model, loc, Link.UL, n, seed, mc, comm),
            coverage_tolerance,
        ))
        samples = simulate_ul_exposure(model, loc, n, seed, mc, comm)
        curve = ul_exposure_cdf_curve(
            _curve_grid(samples.values), model, loc, quad
        )
        rows.append(_row(
            f"ul_exposure_{tag}", curve.percentile(0.95),
            empirical_percentile(samples, 0.95), scaled_tolerance(0.01, n),
            error=ks_distance(samples, curve),
        ))
        samples = simulate_ei(model, loc, n, seed, mc, comm)
        grid = _curve_grid(samples.values, points=48)
        curve = CdfCurve(grid=grid, values=ei_cdf(grid, model, loc, quad))
        rows.append(_row(
            f"ei_{tag}", curve.percentile(0.95),
            empirical_percentile(samples, 0.95), scaled_tolerance(0.03, n),
            error=ks_distance(samples, curve),
        ))
        s = 1.0 / np.median(samples.values)
        rows.append(_row(
            f"ei_laplace_{tag}", np.real(ei_laplace(s, model, loc, quad)),
            np.mean(np.exp(-s * samples.values)), scaled_tolerance(0.015, n),
            relative=True,
        ))

    pp = replace(model.point_process, **RETENTION_CHECK)
    first, last = realization_range(RETENTION_REALIZATIONS, comm)
    baseline, retained = php_retention_ratio(
        pp, RETENTION_REALIZATIONS, seed, first=first, last=last
    )
    retention = retention_report(
        pp, np.concatenate(comm.allgather(baseline)),
        np.concatenate(comm.allgather(retained)),
        max(10.0 * pp.hole_radius, 1000.0),
    )
    return rows, retention
