"""Exposure index combining the uplink and downlink exposure

.. math::

    EI = \\mathrm{SAR}^{UL} P(X) + \\mathrm{SAR}^{DL} W^{DL}

The uplink term is the deterministic transmit power of the user's device at
serving distance :math:`X`, the downlink term the power density of all BSs
with the serving one at :math:`X`. Both terms share :math:`X`.
"""
import enum
import logging
import numpy as np
from .downlink import (
    dl_conditional_exposure_cdf,
    dl_conditional_exposure_laplace,
    dl_exposure_cdf,
    dl_exposure_laplace,
    dl_exposure_percentile,
)
from .gilpelaez import invert_monotone
from .input_parser import QuadratureConfig, UserLocation
from .point_process import (
    contact_distance_cdf,
    contact_distance_expectation,
    serving_distance_transform,
)
from .uplink import ul_transmit_power
from .logger import Logger


class Component(enum.Enum):
    TOTAL = "total"
    UL = "ul"
    DL = "dl"


def ei_conditional_laplace(s, x0, model):
    """Laplace transform of the exposure index given the serving distance

    .. math::

        \\mathcal{L}_{EI|x_0}(s) = e^{-s\\,\\mathrm{SAR}^{UL} P(x_0)}
            \\mathcal{L}_{W^{DL}|x_0}(s\\,\\mathrm{SAR}^{DL})
    """
    sar = model.sar
    s, x0 = np.broadcast_arrays(
        np.asarray(s, dtype=np.complex128), np.asarray(x0, dtype=np.float64)
    )
    uplink = np.exp(-s * sar.sar_ul * ul_transmit_power(x0, model))
    return (
        uplink * dl_conditional_exposure_laplace(s * sar.sar_dl, x0, model)
    )[()]


def ei_laplace(s, model, loc, quad=None):
    """Unconditional Laplace transform of the exposure index, the
    conditional transform averaged over the serving distance

    Inverting it with :code:`gilpelaez.cdf_from_laplace` gives
    :code:`ei_cdf` by a second route. The transform does not factor into
    :code:`ei_ul_laplace` times :code:`ei_dl_laplace`, both terms share the
    serving distance.
    """
    return serving_distance_transform(
        lambda s, x: ei_conditional_laplace(s, x, model), s,
        model.effective_bs_density, model.point_process.hole_radius, loc,
        quad,
    )


def ei_ul_laplace(s, model, loc, quad=None):
    sar_ul = model.sar.sar_ul
    return serving_distance_transform(
        lambda s, x: np.exp(-s * sar_ul * ul_transmit_power(x, model)), s,
        model.effective_bs_density, model.point_process.hole_radius, loc,
        quad,
    )


def ei_dl_laplace(s, model, loc):
    """Laplace transform of :math:`\\mathrm{SAR}^{DL} W^{DL}`"""
    return dl_exposure_laplace(
        np.asarray(s, dtype=np.complex128) * model.sar.sar_dl, model, loc
    )


def _ul_component_cdf(e, model, loc):
    # P(SAR_UL P(X) <= e), P increasing in X up to p_max
    e = np.asarray(e, dtype=np.float64)
    ul, sar_ul = model.uplink, model.sar.sar_ul
    if sar_ul == 0:
        return np.where(e >= 0, 1.0, 0.0)[()]
    power = np.clip(e / sar_ul, 0.0, None)
    with np.errstate(divide="ignore"):
        x_e = (power / ul.pu_coeff) ** (
            1.0 / (model.downlink.alpha * ul.epsilon)
        )
    below = contact_distance_cdf(
        x_e, model.effective_bs_density, model.point_process.hole_radius, loc
    )
    return np.where(
        e < 0, 0.0, np.where(power >= ul.p_max, 1.0, below)
    )[()]


def _dl_component_cdf(e, model, loc, quad):
    e = np.asarray(e, dtype=np.float64)
    sar_dl = model.sar.sar_dl
    if sar_dl == 0:
        return np.where(e >= 0, 1.0, 0.0)[()]
    return dl_exposure_cdf(e / sar_dl, model, loc, quad)


def _total_cdf(e, model, loc, quad):
    sar = model.sar
    if sar.sar_dl == 0:
        return _ul_component_cdf(e, model, loc)
    e = np.asarray(e, dtype=np.float64)

    def conditional(x):
        uplink = sar.sar_ul * ul_transmit_power(x, model)
        w, x = np.broadcast_arrays(
            (e[..., None, None] - uplink) / sar.sar_dl, x
        )
        return dl_conditional_exposure_cdf(w, x, model, quad)

    args = (model.effective_bs_density, model.point_process.hole_radius, loc,
            quad)
    below = contact_distance_expectation(conditional, *args, upper=model.x_max)
    beyond = contact_distance_expectation(conditional, *args, lower=model.x_max)
    return np.clip(np.real(below + beyond), 0.0, 1.0)[()]


def ei_component_cdf(e, model, loc, component=Component.TOTAL, quad=None):
    """CDF of the exposure index or one of its two terms

    Parameters
    ----------
    e : float or numpy.ndarray
        Exposure index values in W/kg.
    model : NetworkModel
    loc : UserLocation
    component : Component or str, optional
        :code:`total` for EI, :code:`ul` for the uplink term, an exact
        transform of the serving distance law, :code:`dl` for the downlink
        term.
    quad : QuadratureConfig, optional

    Returns
    -------
    cdf : float or numpy.ndarray

    Notes
    -----
    The total is evaluated as

    .. math::

        F_{EI}(e) = E_X\\left[F_{W^{DL}|X}\\left(\\frac{e -
            \\mathrm{SAR}^{UL} P(X)}{\\mathrm{SAR}^{DL}}\\right)\\right],

    i.e. the transform inversion of the conditional downlink law inside the
    serving distance integral, split at :math:`X_{max}`.
    """
    component = Component(component)
    if component is Component.UL:
        return _ul_component_cdf(e, model, loc)
    if component is Component.DL:
        return _dl_component_cdf(e, model, loc, quad)
    return _total_cdf(e, model, loc, quad)


def ei_cdf(e_val, model, loc, quad=None):
    return ei_component_cdf(e_val, model, loc, Component.TOTAL, quad)


def _ul_component_percentile(rho, model, loc):
    ul, sar_ul = model.uplink, model.sar.sar_ul
    v = UserLocation(loc).v(model.point_process.hole_radius)
    x_q = np.sqrt(
        v ** 2 - np.log1p(-rho) / (np.pi * model.effective_bs_density)
    )
    return float(sar_ul * ul_transmit_power(x_q, model))


def ei_percentile(rho, model, loc, component=Component.TOTAL, quad=None):
    """Exposure index value not exceeded with probability :code:`rho`

    The uplink term is inverted in closed form, the downlink term is the
    scaled downlink exposure percentile. The total is found by bracketing and
    Brent refinement on :code:`ei_cdf`, starting from the larger of the two
    term percentiles, a lower bound since both terms are nonnegative.
    """
    if not 0 < rho < 1:
        raise ValueError(f"rho must be in (0, 1), not {rho}")
    component = Component(component)
    sar = model.sar
    if component is Component.UL or (
        component is Component.TOTAL and sar.sar_dl == 0
    ):
        return _ul_component_percentile(rho, model, loc)
    if sar.sar_dl == 0:
        return 0.0
    dl = sar.sar_dl * dl_exposure_percentile(rho, model, loc, quad)
    if component is Component.DL:
        return dl
    hint = max(dl, _ul_component_percentile(rho, model, loc))
    percentile = invert_monotone(
        lambda e: _total_cdf(e, model, loc, quad), rho, hint,
        (quad or QuadratureConfig()).max_bracket_steps,
    )
    Logger.rank0.log(
        logging.DEBUG,
        f"EI {100 * rho:g}th percentile {percentile:.6g} W/kg "
        f"({UserLocation(loc).name}, lambda_b = "
        f"{model.point_process.lambda_b:.4g}, R = "
        f"{model.point_process.hole_radius:g})",
    )
    return percentile
