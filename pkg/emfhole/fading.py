"""Nakagami-m small-scale fading of the power gain
"""
import numpy as np
from scipy import special, stats


def _check_m(m):
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"Nakagami m must be a positive integer, not {m}")
    return int(m)


def nakagami_gain_pdf(omega, m):
    """Density of the power gain under Nakagami-m fading

    The power gain :math:`H` of a Nakagami-m amplitude with unit spread is
    Gamma distributed with shape :math:`m` and scale :math:`1/m`,

    .. math::

        f_H(\\omega) = \\frac{m^m \\omega^{m-1}}{\\Gamma(m)} e^{-m\\omega}.

    Parameters
    ----------
    omega : float or numpy.ndarray
        Power gain values.
    m : int
        Nakagami fading parameter.

    Returns
    -------
    pdf : float or numpy.ndarray
    """
    m = _check_m(m)
    return stats.gamma.pdf(omega, a=m, scale=1.0 / m)


def gain_cdf(omega, m):
    m = _check_m(m)
    return stats.gamma.cdf(omega, a=m, scale=1.0 / m)


def upper_gamma_ratio(m, g):
    """Regularized upper incomplete gamma function for integer :math:`m`

    Equals :math:`e^{-g} \\sum_{k=0}^{m-1} g^k / k!`, the probability that a
    unit-mean Gamma(:math:`m`) power gain exceeds :math:`g/m`.
    """
    m = _check_m(m)
    return special.gammaincc(m, np.asarray(g, dtype=np.float64))


def gain_laplace(z, m):
    """Laplace transform of the power gain, :math:`E[e^{-zH}] =
    (1 + z/m)^{-m}`, for complex :code:`z`"""
    return (1.0 + np.asarray(z) / m) ** (-m)


def one_minus_gain_laplace(z, m):
    """:math:`1 - (1 + z/m)^{-m}` without cancellation for small :math:`|z|`

    Expands :math:`(1+y)^m - 1` binomially with :math:`y = z/m` where
    :math:`|y| < 1`.
    """
    m = _check_m(m)
    y = np.asarray(z) / m
    small = np.abs(y) < 1
    y_small = np.where(small, y, 0.0)
    numerator = np.zeros(np.shape(y), dtype=np.result_type(y, np.float64))
    y_pow = np.ones_like(numerator)
    for k in range(1, m + 1):
        y_pow = y_pow * y_small
        numerator = numerator + special.comb(m, k, exact=True) * y_pow
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        direct = 1.0 - (1.0 + y) ** (-m)
    return np.where(small, numerator / (1.0 + y_small) ** m, direct)[()]


def sample_gain(m, rng, size=None):
    """Draw unit-mean Nakagami-m power gains

    Parameters
    ----------
    m : int
        Nakagami fading parameter.
    rng : numpy.random.Generator
        Random stream.
    size : int or tuple of int, optional
        Output shape.

    Returns
    -------
    gain : float or numpy.ndarray
        For :code:`m = 1` an exponential draw :math:`-\\ln U`, otherwise the
        mean of :code:`m` such draws.
    """
    m = _check_m(m)
    if m == 1:
        return rng.standard_exponential(size)
    shape = (m,) if size is None else (m,) + tuple(np.atleast_1d(size))
    return rng.standard_exponential(shape).sum(axis=0) / m
