"""Downlink coverage, exposure distribution and compliance distance

The typical user at the origin is served by its closest BS. The PHP of BSs
is approximated by a PPP of the effective density :math:`\\lambda_B`, so the
serving distance follows :code:`point_process.contact_distance_pdf` and the
aggregate power density of all BSs beyond a distance :math:`a` has Laplace
transform :math:`\\exp(-2\\pi\\lambda_B I(s, a))`, see
:code:`field.FieldFunctional`.
"""
import logging
from dataclasses import dataclass
import numpy as np
from .fading import gain_laplace, upper_gamma_ratio
from .field import FieldFunctional
from .gilpelaez import (
    BracketFailure,
    cdf_curve_from_laplace,
    cdf_from_laplace,
    percentile_from_laplace,
)
from .input_parser import UserLocation
from .point_process import contact_distance_expectation
from .logger import Logger


COMPLIANCE_RESOLUTION = 0.1  # m
COMPLIANCE_CAP = 1000.0  # m


def dl_received_power_mean(x0, model):
    """Mean received power :math:`p G_u \\eta x_0^{-\\alpha}` from a BS at
    distance :code:`x0` (unit mean fading)"""
    dl = model.downlink
    with np.errstate(divide="ignore"):
        return (
            dl.eirp * dl.user_gain * dl.ref_path_gain
            * np.asarray(x0, dtype=np.float64) ** (-dl.alpha)
        )[()]


def _coverage_gain_threshold(x0, model):
    dl = model.downlink
    with np.errstate(divide="ignore"):
        return (
            dl.nakagami_m * dl.snr_threshold_dl * dl.noise_power_dl
            / dl_received_power_mean(x0, model)
        )


def dl_coverage(model, loc, quad=None):
    """Probability that the downlink SNR exceeds its threshold

    .. math::

        P_c = \\int_{v(R)}^\\infty
            \\frac{\\Gamma_u(m, m\\tau\\sigma^2 x^\\alpha / (p G_u\\eta))}
            {\\Gamma(m)} f_{X_v}(x)\\,dx

    Parameters
    ----------
    model : NetworkModel
    loc : UserLocation
        User inside or outside an exclusion zone.
    quad : QuadratureConfig, optional

    Returns
    -------
    coverage : float
    """
    m = model.downlink.nakagami_m

    def conditional(x):
        return upper_gamma_ratio(m, _coverage_gain_threshold(x, model))

    coverage = float(np.real(contact_distance_expectation(
        conditional, model.effective_bs_density,
        model.point_process.hole_radius, loc, quad,
    )))
    Logger.rank0.log(
        logging.DEBUG, f"downlink coverage ({UserLocation(loc).name}) = "
                       f"{coverage:.6f}"
    )
    return coverage


def dl_outage(model, loc, quad=None):
    return 1.0 - dl_coverage(model, loc, quad)


def _field(model):
    dl = model.downlink
    return FieldFunctional(dl.beta, dl.nakagami_m, model.field_scale)


def dl_exposure_laplace(s, model, loc):
    """Laplace transform of the downlink power density at the typical user

    .. math::

        \\mathcal{L}_{W^{DL}}(s) = \\exp\\left(-2\\pi\\lambda_B
            \\int_{v(R)}^\\infty \\left[1 - \\kappa(x, s)\\right] x\\,dx
            \\right),\\quad
        \\kappa(x, s) = \\left(1 + \\frac{s p x^{-\\beta}}{4\\pi m}
            \\right)^{-m}

    Parameters
    ----------
    s : complex or numpy.ndarray
        Transform arguments with :math:`\\Re(s) \\ge 0`.
    model : NetworkModel
    loc : UserLocation

    Returns
    -------
    laplace : complex or numpy.ndarray
    """
    v = UserLocation(loc).v(model.point_process.hole_radius)
    lambda_B = model.effective_bs_density
    return np.exp(-2.0 * np.pi * lambda_B * _field(model)(s, v))


def dl_exposure_cdf(w, model, loc, quad=None):
    return cdf_from_laplace(
        lambda s: dl_exposure_laplace(s, model, loc), w, quad
    )


def dl_exposure_cdf_curve(grid, model, loc, quad=None):
    """Downlink exposure CDF tabulated on :code:`grid` with monotone repair"""
    return cdf_curve_from_laplace(
        lambda s: dl_exposure_laplace(s, model, loc), grid, quad
    )


def _nearest_quantile_distance(rho, model, loc):
    v = UserLocation(loc).v(model.point_process.hole_radius)
    return np.sqrt(v ** 2 - np.log(rho) / (np.pi * model.effective_bs_density))


def dl_exposure_percentile(rho, model, loc, quad=None):
    """Downlink power density not exceeded with probability :code:`rho`

    The bracket search starts from the unit-fading power density of the
    serving BS at the distance it exceeds with probability :code:`rho`.
    """
    x_q = _nearest_quantile_distance(rho, model, loc)
    hint = model.field_scale * x_q ** (-model.downlink.beta)
    return percentile_from_laplace(
        lambda s: dl_exposure_laplace(s, model, loc), rho, hint, quad
    )


def dl_conditional_exposure_laplace(s, x0, model):
    """Laplace transform of the downlink power density given the serving BS
    at distance :code:`x0`

    The serving BS contributes :math:`\\kappa(x_0, s)` and every other BS lies
    beyond :math:`x_0`,

    .. math::

        \\mathcal{L}_{W^{DL}|x_0}(s) = \\kappa(x_0, s)\\exp\\left(
            -2\\pi\\lambda_B \\int_{x_0}^\\infty [1 - \\kappa(x, s)]
            x\\,dx\\right).
    """
    dl = model.downlink
    s, x0 = np.broadcast_arrays(
        np.asarray(s, dtype=np.complex128), np.asarray(x0, dtype=np.float64)
    )
    if np.any(x0 <= 0):
        raise ValueError("The serving distance x0 must be positive.")
    serving = gain_laplace(
        s * model.field_scale * x0 ** (-dl.beta), dl.nakagami_m
    )
    others = np.exp(
        -2.0 * np.pi * model.effective_bs_density * _field(model)(s, x0)
    )
    return (serving * others)[()]


def dl_conditional_exposure_cdf(w, x0, model, quad=None):
    """Downlink exposure CDF given the serving distance

    :code:`w` and :code:`x0` broadcast against each other, all pairs are
    inverted in one vectorized pass.
    """
    w, x0 = np.broadcast_arrays(
        np.asarray(w, dtype=np.float64), np.asarray(x0, dtype=np.float64)
    )
    return cdf_from_laplace(
        lambda s, x: dl_conditional_exposure_laplace(s, x, model),
        w, quad, batch=(x0,),
    )


def dl_conditional_exposure_percentile(rho, x0, model, quad=None):
    hint = model.field_scale * x0 ** (-model.downlink.beta)
    return percentile_from_laplace(
        lambda s: dl_conditional_exposure_laplace(s, x0, model),
        rho, hint, quad,
    )


def compliance_distance(model, w_max=None, rho=None, quad=None,
                        cap=COMPLIANCE_CAP, resolution=COMPLIANCE_RESOLUTION):
    """Smallest serving distance at which the exposure complies

    Bisects for the smallest :math:`x_0` with
    :math:`F_{W^{DL}|x_0}(W_{max}) \\ge \\rho`. The conditional CDF grows
    with :math:`x_0` since the serving BS moves away.

    Parameters
    ----------
    model : NetworkModel
    w_max : float, optional
        Permitted power density, :code:`model.compliance.w_max` by default.
    rho : float, optional
        Compliance probability, :code:`model.compliance.rho` by default.
    quad : QuadratureConfig, optional
    cap : float, optional
        Largest serving distance searched, in m.
    resolution : float, optional
        Bisection resolution in m.

    Returns
    -------
    x_com : float
        Compliance distance in m, 0 if the exposure complies at any serving
        distance down to :code:`resolution`.

    Raises
    ------
    BracketFailure
        If even a serving distance of :code:`cap` does not comply.
    """
    w_max = model.compliance.w_max if w_max is None else w_max
    rho = model.compliance.rho if rho is None else rho
    if np.isposinf(w_max):
        return 0.0

    def complies(x0):
        return float(dl_conditional_exposure_cdf(w_max, x0, model, quad)) >= rho

    lo, hi = resolution, cap
    if complies(lo):
        return 0.0
    if not complies(hi):
        err_str = (
            f"Exposure does not comply (W_max = {w_max}, rho = {rho}) even "
            f"at a serving distance of {cap} m"
        )
        Logger.rank0.log(logging.ERROR, err_str)
        raise BracketFailure(err_str)
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if complies(mid):
            hi = mid
        else:
            lo = mid
    Logger.rank0.log(
        logging.DEBUG, f"compliance distance in [{lo:.3f}, {hi:.3f}] m"
    )
    return hi


def dl_exposure_mean(model, loc):
    """Campbell mean of the downlink power density,
    :math:`\\lambda_B p v(R)^{2-\\beta}/(2(\\beta - 2))`, infinite for a user
    outside the holes"""
    v = UserLocation(loc).v(model.point_process.hole_radius)
    if v == 0:
        return np.inf
    beta = model.downlink.beta
    return (
        model.effective_bs_density * model.eirp * v ** (2.0 - beta)
        / (2.0 * (beta - 2.0))
    )


@dataclass
class ComplianceCheck:
    """Outcome of the percentile exposure constraint
    :math:`F^{-1}_{W^{DL}}(\\rho) \\le W_{max}`"""
    percentile: float
    w_max: float
    rho: float
    compliant: bool


def dl_exposure_compliance(model, loc, quad=None):
    rho, w_max = model.compliance.rho, model.compliance.w_max
    percentile = dl_exposure_percentile(rho, model, loc, quad)
    check = ComplianceCheck(
        percentile=float(percentile), w_max=w_max, rho=rho,
        compliant=bool(percentile <= w_max),
    )
    Logger.rank0.log(
        logging.INFO,
        f"downlink {100 * rho:g}th percentile {check.percentile:.4g} W/m2, "
        f"W_max = {w_max:g} W/m2, compliant: {check.compliant}",
    )
    return check
