"""Uplink fractional power control, coverage and exposure

The user's own device transmits to the serving BS at distance :math:`X` with
:math:`P(X) = \\min(p_u X^{\\alpha\\epsilon}, p_{max})` and irradiates the
user's body from the fixed distance :math:`u_0`. Every expectation over
:math:`X` is split at :math:`X_{max}`, where the device saturates.
"""
import logging
import numpy as np
from .fading import gain_cdf, gain_laplace, upper_gamma_ratio
from .gilpelaez import (
    cdf_curve_from_laplace,
    cdf_from_laplace,
    percentile_from_laplace,
)
from .input_parser import UserLocation
from .point_process import (
    contact_distance_expectation,
    contact_distance_survival,
    serving_distance_transform,
)
from .logger import Logger


def ul_transmit_power(x0, model):
    """Device transmit power :math:`p_u x_0^{\\alpha\\epsilon}` below
    :math:`X_{max}`, :math:`p_{max}` beyond"""
    ul = model.uplink
    x_max = model.x_max
    x0 = np.asarray(x0, dtype=np.float64)
    exponent = model.downlink.alpha * ul.epsilon
    return np.where(
        x0 < x_max, ul.pu_coeff * np.minimum(x0, x_max) ** exponent, ul.p_max
    )[()]


def ul_received_power_mean(x0, model):
    with np.errstate(divide="ignore", invalid="ignore"):
        return (
            ul_transmit_power(x0, model) * model.downlink.ref_path_gain
            * np.asarray(x0, dtype=np.float64) ** (-model.downlink.alpha)
        )[()]


def ul_coverage(model, loc, quad=None):
    """Probability that the uplink SNR at the serving BS exceeds its
    threshold

    Below :math:`X_{max}` the mean received power is
    :math:`p_u\\eta x^{\\alpha(\\epsilon - 1)}`, beyond it
    :math:`p_{max}\\eta x^{-\\alpha}`. The two pieces are integrated
    separately against the serving distance law.
    """
    ul = model.uplink
    m = model.downlink.nakagami_m

    def conditional(x):
        with np.errstate(divide="ignore"):
            g = (
                m * ul.snr_threshold_ul * ul.noise_power_ul
                / ul_received_power_mean(x, model)
            )
        return upper_gamma_ratio(m, g)

    args = (model.effective_bs_density, model.point_process.hole_radius, loc,
            quad)
    below = contact_distance_expectation(conditional, *args, upper=model.x_max)
    beyond = contact_distance_expectation(conditional, *args, lower=model.x_max)
    coverage = float(np.real(below + beyond))
    Logger.rank0.log(
        logging.DEBUG,
        f"uplink coverage ({UserLocation(loc).name}) = {coverage:.6f} "
        f"(below X_max {float(np.real(below)):.6f})",
    )
    return coverage


def ul_exposure_scale(model):
    """Power density per transmitted W at the user's body,
    :math:`1/(4\\pi u_0^\\beta)`"""
    return 1.0 / (
        4.0 * np.pi * model.uplink.device_distance ** model.downlink.beta
    )


def ul_exposure_laplace(s, model, loc, quad=None):
    """Laplace transform of the uplink power density at the user's body

    .. math::

        \\mathcal{L}_{W^{UL}}(s) = \\int_{v(R)}^{X_{max}}
            \\kappa_1(x, s) f_{X_v}(x)\\,dx
            + \\kappa_2(s)\\,P(X_v \\ge X_{max})

    with :math:`\\kappa_1` the Nakagami-m kernel of the power controlled
    device and :math:`\\kappa_2` that of a saturated device. The survival
    probability beyond :math:`X_{max}` is taken in closed form.

    Parameters
    ----------
    s : complex or numpy.ndarray
        Transform arguments with :math:`\\Re(s) \\ge 0`.
    model : NetworkModel
    loc : UserLocation
    quad : QuadratureConfig, optional

    Returns
    -------
    laplace : complex or numpy.ndarray
    """
    m = model.downlink.nakagami_m
    scale = ul_exposure_scale(model)
    lambda_B = model.effective_bs_density
    R = model.point_process.hole_radius

    def kernel(s, x):
        return gain_laplace(s * scale * ul_transmit_power(x, model), m)

    below = serving_distance_transform(
        kernel, s, lambda_B, R, loc, quad, upper=model.x_max
    )
    saturated = gain_laplace(
        np.asarray(s, dtype=np.complex128) * scale * model.uplink.p_max, m
    )
    return below + saturated * contact_distance_survival(
        model.x_max, lambda_B, R, loc
    )


def ul_exposure_cdf(w, model, loc, quad=None):
    return cdf_from_laplace(
        lambda s: ul_exposure_laplace(s, model, loc, quad), w, quad
    )


def ul_exposure_cdf_curve(grid, model, loc, quad=None):
    return cdf_curve_from_laplace(
        lambda s: ul_exposure_laplace(s, model, loc, quad), grid, quad
    )


def ul_exposure_percentile(rho, model, loc, quad=None):
    """Uplink power density not exceeded with probability :code:`rho`,
    bracketed from the unit-fading exposure at the serving distance's
    :code:`rho` quantile"""
    v = UserLocation(loc).v(model.point_process.hole_radius)
    x_q = np.sqrt(
        v ** 2 - np.log1p(-rho) / (np.pi * model.effective_bs_density)
    )
    hint = ul_exposure_scale(model) * ul_transmit_power(x_q, model)
    return percentile_from_laplace(
        lambda s: ul_exposure_laplace(s, model, loc, quad), rho, hint, quad
    )


def ul_exposure_cdf_conditional_fading(w, model, loc, quad=None):
    """Uplink exposure CDF by conditioning on the serving distance

    .. math::

        F_{W^{UL}}(w) = E_X\\left[F_H\\left(\\frac{4\\pi u_0^\\beta w}
            {P(X)}\\right)\\right]

    with :math:`F_H` the Nakagami-m power gain CDF. Does not involve a
    transform inversion.
    """
    m = model.downlink.nakagami_m
    scale = ul_exposure_scale(model)
    lambda_B = model.effective_bs_density
    R = model.point_process.hole_radius
    w = np.asarray(w, dtype=np.float64)

    def conditional(x):
        with np.errstate(divide="ignore"):
            omega = w[..., None, None] / (scale * ul_transmit_power(x, model))
        return gain_cdf(omega, m)

    below = contact_distance_expectation(
        conditional, lambda_B, R, loc, quad, upper=model.x_max
    )
    saturated = gain_cdf(w / (scale * model.uplink.p_max), m)
    survival = contact_distance_survival(model.x_max, lambda_B, R, loc)
    return np.clip(below + saturated * survival, 0.0, 1.0)[()]
