"""Sampling of PPP and PHP realizations and the serving distance law
"""
import logging
from dataclasses import dataclass, replace
import numpy as np
from scipy.spatial import cKDTree
from .input_parser import UserLocation, effective_bs_density
from .gilpelaez import semiinfinite_quadrature, log_panel_quadrature
from .logger import Logger


class WindowMismatch(ValueError):
    """The hole window does not cover the baseline window grown by R"""


def realization_stream(seed, index):
    """Independent random stream of realization :code:`index`

    Streams are derived from the counter, not from the worker that consumes
    them, so results do not depend on how realizations are distributed.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(int(index),))
    )


@dataclass
class PointPattern:
    """Finite planar point pattern inside a disk centered at the origin

    Attributes
    ----------
    points : (N, 2) numpy.ndarray
        Point coordinates in meters.
    window_radius : float
        Radius of the observation disk in meters.
    """
    points: np.ndarray
    window_radius: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        radius = np.hypot(self.points[:, 0], self.points[:, 1])
        if np.any(radius > self.window_radius * (1.0 + 1e-12)):
            raise ValueError(
                f"{np.sum(radius > self.window_radius)} points lie outside "
                f"the window of radius {self.window_radius}"
            )

    def __len__(self):
        return self.points.shape[0]

    @property
    def distances(self):
        """Distances of the points to the origin"""
        return np.hypot(self.points[:, 0], self.points[:, 1])


def _uniform_disk(n, radius, rng):
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_ppp(density, window_radius, rng):
    """Homogeneous PPP on a disk

    Parameters
    ----------
    density : float
        Intensity in points per m².
    window_radius : float
        Disk radius in meters.
    rng : numpy.random.Generator
        Random stream.

    Returns
    -------
    pattern : PointPattern
        Poisson(:math:`\\lambda \\pi r^2`) many points, i.i.d. uniform on the
        disk.
    """
    if density < 0 or not window_radius > 0:
        raise ValueError(
            f"density must be >= 0 and window_radius > 0, got {density}, "
            f"{window_radius}"
        )
    n = rng.poisson(density * np.pi * window_radius ** 2)
    return PointPattern(_uniform_disk(n, window_radius, rng), window_radius)


def carve_php(baseline, holes, R):
    """Remove every baseline point within distance :math:`R` of a hole center

    Raises
    ------
    WindowMismatch
        If the hole window is smaller than the baseline window plus R, so
        holes straddling the baseline boundary could be missing.
    """
    if holes.window_radius < baseline.window_radius + R:
        raise WindowMismatch(
            f"Hole window radius {holes.window_radius} does not cover the "
            f"baseline window {baseline.window_radius} + R = {R}"
        )
    if R == 0 or len(holes) == 0 or len(baseline) == 0:
        return PointPattern(baseline.points.copy(), baseline.window_radius)
    distance, _ = cKDTree(holes.points).query(
        baseline.points, k=1, distance_upper_bound=R
    )
    keep = distance >= R
    return PointPattern(baseline.points[keep], baseline.window_radius)


def sample_php(pp, window_radius, rng, hole_at_origin=False):
    """Sample a PHP realization on a disk

    Parameters
    ----------
    pp : PointProcessParams
        Densities and hole radius.
    window_radius : float
        Radius of the BS window. Holes are sampled on a disk larger by
        :code:`pp.hole_radius`.
    rng : numpy.random.Generator
        Random stream.
    hole_at_origin : bool, optional
        Additionally place a hole at the origin, conditioning on a typical
        user inside an exclusion zone.

    Returns
    -------
    bs : PointPattern
        Retained BSs.
    holes : PointPattern
        Hole centers.
    """
    R = pp.hole_radius
    baseline = sample_ppp(pp.lambda_b, window_radius, rng)
    holes = sample_ppp(pp.lambda_r, window_radius + R, rng)
    if hole_at_origin:
        holes = PointPattern(
            np.vstack((np.zeros((1, 2)), holes.points)), holes.window_radius
        )
    return carve_php(baseline, holes, R), holes


def contact_distance_pdf(x, lambda_B, R, loc):
    """Density of the distance to the closest BS, the PHP approximated by a
    PPP of density :code:`lambda_B`

    For a user outside the holes this is the Rayleigh-type law
    :math:`2\\pi\\lambda_B x e^{-\\lambda_B \\pi x^2}`, inside a hole the law
    is shifted to start at :math:`R`,
    :math:`2\\pi\\lambda_B x e^{-\\lambda_B \\pi (x^2 - R^2)}` for
    :math:`x \\ge R`.
    """
    x = np.asarray(x, dtype=np.float64)
    v = UserLocation(loc).v(R)
    inside = x >= v
    exponent = np.where(inside, -lambda_B * np.pi * (x ** 2 - v ** 2), 0.0)
    return np.where(
        inside, 2.0 * np.pi * lambda_B * x * np.exp(exponent), 0.0
    )[()]


def contact_distance_survival(x, lambda_B, R, loc):
    x = np.asarray(x, dtype=np.float64)
    v = UserLocation(loc).v(R)
    return np.where(
        x > v, np.exp(-lambda_B * np.pi * (np.maximum(x, v) ** 2 - v ** 2)),
        1.0,
    )[()]


def contact_distance_cdf(x, lambda_B, R, loc):
    survival = np.asarray(contact_distance_survival(x, lambda_B, R, loc))
    return (1.0 - survival)[()]


def contact_distance_from_uniform(u, lambda_B, R, loc):
    """Inverse transform of the serving distance law for :math:`U \\in (0,
    1]`"""
    v = UserLocation(loc).v(R)
    return np.sqrt(v ** 2 - np.log(u) / (np.pi * lambda_B))


def sample_contact_distance(lambda_B, R, loc, rng, size=None):
    """Draw serving distances, :math:`\\sqrt{v(R)^2 - \\ln U / (\\pi
    \\lambda_B)}`"""
    if not lambda_B > 0:
        raise ValueError(f"lambda_B must be positive, not {lambda_B}")
    u = 1.0 - rng.random(size)
    return contact_distance_from_uniform(u, lambda_B, R, loc)


def contact_distance_expectation(h, lambda_B, R, loc, quad=None, upper=None,
                                 lower=None):
    """:math:`E[h(X_v)\\, 1\\{\\mathrm{lower} \\le X_v < \\mathrm{upper}\\}]`
    over the serving distance

    Integrates in :math:`u = \\pi\\lambda_B (x^2 - v(R)^2)`, in which the
    serving distance law becomes a unit exponential, so every serving
    distance integral has the same well-scaled form
    :math:`\\int_{u_{min}}^{u_{max}} h(x(u)) e^{-u}\\,du`.

    Parameters
    ----------
    h : callable
        Vectorized function of the serving distance. May return extra
        leading batch dimensions.
    lambda_B : float
        Effective BS density.
    R : float
        Hole radius.
    loc : UserLocation
        User placement.
    quad : QuadratureConfig, optional
    upper : float, optional
        Upper limit on the serving distance, infinite by default.
    lower : float, optional
        Lower limit on the serving distance, the support edge by default.
    """
    v = UserLocation(loc).v(R)
    scale = 1.0 / (np.pi * lambda_B)

    def integrand(u):
        return h(np.sqrt(v ** 2 + u * scale)) * np.exp(-u)

    u_lower = 0.0
    if lower is not None and lower > v:
        u_lower = np.pi * lambda_B * (lower ** 2 - v ** 2)
    if upper is None or np.isinf(upper):
        return semiinfinite_quadrature(integrand, u_lower, quad)
    if upper <= max(v, lower or 0.0):
        return 0.0
    u_upper = np.pi * lambda_B * (upper ** 2 - v ** 2)
    return log_panel_quadrature(integrand, u_lower, u_upper, quad)


LAPLACE_CHUNK = 1024


def serving_distance_transform(kernel, s, lambda_B, R, loc, quad=None,
                               upper=None, lower=None):
    """:code:`contact_distance_expectation` of :code:`kernel(s, x)` for every
    entry of :code:`s`

    Transform arguments are processed in chunks of :code:`LAPLACE_CHUNK`,
    each against the full serving distance quadrature.
    """
    s = np.asarray(s, dtype=np.complex128)
    flat = s.reshape(-1)
    out = np.empty(flat.shape, dtype=np.complex128)
    for start in range(0, flat.size, LAPLACE_CHUNK):
        chunk = flat[start:start + LAPLACE_CHUNK, None, None]
        out[start:start + LAPLACE_CHUNK] = contact_distance_expectation(
            lambda x: kernel(chunk, x), lambda_B, R, loc, quad,
            upper=upper, lower=lower,
        )
    return out.reshape(s.shape)[()]


@dataclass
class RetentionReport:
    """Empirical PHP thinning against the two candidate density formulas

    Attributes
    ----------
    empirical : float
        Retained fraction of baseline points pooled over all realizations.
    standard_error : float
        Standard error of :code:`empirical` across realizations.
    printed : float
        :math:`e^{-\\lambda_r R^2}`.
    corrected : float
        :math:`e^{-\\lambda_r \\pi R^2}`.
    n_realizations : int
    window_radius : float
    """
    empirical: float
    standard_error: float
    printed: float
    corrected: float
    n_realizations: int
    window_radius: float

    @property
    def matches(self):
        """Name of the candidate closer to the empirical ratio"""
        if abs(self.empirical - self.corrected) < abs(
            self.empirical - self.printed
        ):
            return "corrected"
        return "printed"

    def z_score(self, candidate):
        value = getattr(self, candidate)
        return (self.empirical - value) / self.standard_error


def php_retention_ratio(pp, n, seed, window_radius=None, first=0, last=None):
    """Fraction of baseline BSs surviving the hole carving

    Parameters
    ----------
    pp : PointProcessParams
        Densities and hole radius.
    n : int
        Number of realizations.
    seed : int
        Root entropy of the realization streams.
    window_radius : float, optional
        BS window radius, :code:`max(10 R, 1000)` by default.
    first, last : int, optional
        Only simulate realizations :code:`first..last-1` and return raw
        counts, for partitioned runs.

    Returns
    -------
    report : RetentionReport or (numpy.ndarray, numpy.ndarray)
        The report, or per-realization (baseline, retained) counts when a
        partial range is requested.
    """
    R = pp.hole_radius
    if window_radius is None:
        window_radius = max(10.0 * R, 1000.0)
    partial = last is not None
    last = n if last is None else last
    baseline_counts = np.zeros(last - first, dtype=np.int64)
    retained_counts = np.zeros(last - first, dtype=np.int64)
    for i in range(first, last):
        rng = realization_stream(seed, i)
        baseline = sample_ppp(pp.lambda_b, window_radius, rng)
        holes = sample_ppp(pp.lambda_r, window_radius + R, rng)
        retained = carve_php(baseline, holes, R)
        baseline_counts[i - first] = len(baseline)
        retained_counts[i - first] = len(retained)
    if partial:
        return baseline_counts, retained_counts
    return retention_report(
        pp, baseline_counts, retained_counts, window_radius
    )


def retention_report(pp, baseline_counts, retained_counts, window_radius):
    total = baseline_counts.sum()
    empirical = retained_counts.sum() / total
    # ratio estimator, linearized across realizations
    mean_baseline = baseline_counts.mean()
    residual = retained_counts - empirical * baseline_counts
    n = baseline_counts.size
    standard_error = np.sqrt(
        np.sum(residual ** 2) / max(n - 1, 1) / n
    ) / mean_baseline
    report = RetentionReport(
        empirical=float(empirical),
        standard_error=float(standard_error),
        printed=float(effective_bs_density(
            _with_correction(pp, False)) / pp.lambda_b),
        corrected=float(effective_bs_density(
            _with_correction(pp, True)) / pp.lambda_b),
        n_realizations=int(n),
        window_radius=float(window_radius),
    )
    Logger.rank0.log(
        logging.INFO,
        f"PHP retention {report.empirical:.4f} +- "
        f"{report.standard_error:.4f}, exp(-lambda_r R^2) = "
        f"{report.printed:.4f}, exp(-lambda_r pi R^2) = "
        f"{report.corrected:.4f}, matches {report.matches}",
    )
    return report


def _with_correction(pp, flag):
    return replace(pp, php_pi_correction=flag)
