"""Laplace functional of the aggregate power density of a PPP of BSs
"""
import functools
import logging
import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline
from .fading import one_minus_gain_laplace
from .gilpelaez import gauss_legendre
from .logger import Logger


TABLE_LOW = -25.0
TABLE_HIGH = 10.0
TABLE_STEP = 0.005
TABLE_NODES = 8
PHASE_DECIMALS = 12


def field_integral_at_origin(phase, m, beta):
    """:math:`\\int_{-\\infty}^{\\infty} g(\\zeta)\\,d\\zeta`
    :math:`= \\frac{1}{2}\\varphi^{\\delta}\\Gamma(1-\\delta)
    \\Gamma(m+\\delta)/\\Gamma(m)`, :math:`\\delta = 2/\\beta`"""
    delta = 2.0 / beta
    return (
        0.5 * np.asarray(phase, dtype=np.complex128) ** delta
        * special.gamma(1.0 - delta)
        * np.exp(special.gammaln(m + delta) - special.gammaln(m))
    )


class _PhaseTable:
    """Tabulated :math:`J(\\zeta) = \\int_\\zeta^\\infty g(\\zeta')d\\zeta'`
    with :math:`g(\\zeta) = [1 - (1 + \\varphi e^{-\\beta\\zeta})^{-m}]
    e^{2\\zeta}` for one phase :math:`\\varphi`"""

    def __init__(self, phase, m, beta):
        self.phase = complex(phase)
        self.m = int(m)
        self.beta = float(beta)
        self.at_origin = complex(field_integral_at_origin(phase, m, beta))

        n_cells = int(round((TABLE_HIGH - TABLE_LOW) / TABLE_STEP))
        grid = np.linspace(TABLE_LOW, TABLE_HIGH, n_cells + 1)
        nodes, weights = gauss_legendre(TABLE_NODES)
        half = 0.5 * (grid[1] - grid[0])
        zeta = grid[:-1, None] + half * (np.asarray(nodes) + 1.0)
        cells = half * np.sum(weights * self.integrand(zeta), axis=-1)
        upper = self.series_tail(TABLE_HIGH)
        values = np.empty(n_cells + 1, dtype=np.complex128)
        values[-1] = upper
        values[:-1] = upper + np.cumsum(cells[::-1])[::-1]
        slopes = -self.integrand(grid)
        self.spline = CubicHermiteSpline(
            grid,
            np.column_stack((values.real, values.imag)),
            np.column_stack((slopes.real, slopes.imag)),
        )
        Logger.rank0.log(
            logging.DEBUG,
            f"field table phase={self.phase:.6g} m={self.m} beta={self.beta}:"
            f" J(low)={values[0]:.10g}, closed form {self.at_origin:.10g}",
        )

    def integrand(self, zeta):
        y = self.phase * np.exp(-self.beta * zeta)
        return one_minus_gain_laplace(self.m * y, self.m) * np.exp(2.0 * zeta)

    def series_tail(self, zeta):
        """Two leading terms of the expansion in :math:`\\varphi
        e^{-\\beta\\zeta}`, accurate for large :math:`\\zeta`"""
        m, beta, phase = self.m, self.beta, self.phase
        return (
            m * phase * np.exp((2.0 - beta) * zeta) / (beta - 2.0)
            - 0.5 * m * (m + 1) * phase ** 2
            * np.exp((2.0 - 2.0 * beta) * zeta) / (2.0 * beta - 2.0)
        )

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=np.float64)
        inside = np.clip(zeta, TABLE_LOW, TABLE_HIGH)
        tabulated = self.spline(inside)
        value = tabulated[..., 0] + 1j * tabulated[..., 1]
        with np.errstate(over="ignore", under="ignore"):
            low = self.at_origin - 0.5 * np.exp(2.0 * np.minimum(zeta, 0.0))
            high = self.series_tail(np.maximum(zeta, TABLE_HIGH))
        return np.where(
            zeta < TABLE_LOW, low, np.where(zeta > TABLE_HIGH, high, value)
        )


@functools.lru_cache(maxsize=256)
def _phase_table(phase_real, phase_imag, m, beta):
    return _PhaseTable(complex(phase_real, phase_imag), m, beta)


class FieldFunctional:
    """Aggregate field functional of a PPP beyond distance :math:`a`

    .. math::

        I(s, a) = \\int_a^\\infty \\left[1 - \\left(1 + \\frac{s c
            x^{-\\beta}}{m}\\right)^{-m}\\right] x\\,dx,

    so that the Laplace transform of the power density received from a PPP
    of density :math:`\\lambda` outside the disk of radius :math:`a` is
    :math:`\\exp(-2\\pi\\lambda I(s, a))`.

    With :math:`x_c = (|s|c/m)^{1/\\beta}` and :math:`\\varphi = s/|s|`,
    :math:`I = x_c^2 J_\\varphi(\\ln(a/x_c))` where :math:`J_\\varphi` does
    not depend on :math:`|s|`. :math:`J_\\varphi` is tabulated once per
    phase and interpolated by cubic Hermite splines with exact derivatives.
    The value at :math:`a = 0` is the closed form.

    Parameters
    ----------
    beta : float
        Path loss exponent of the power density, :math:`\\beta > 2`.
    m : int
        Nakagami fading parameter.
    c : float
        Power density per unit fading at unit distance, :math:`p/(4\\pi)`
        for the downlink.
    """

    def __init__(self, beta, m, c):
        if not beta > 2:
            raise ValueError(f"beta must exceed 2, not {beta}")
        self.beta = float(beta)
        self.m = int(m)
        self.c = float(c)

    def __call__(self, s, a):
        s, a = np.broadcast_arrays(
            np.asarray(s, dtype=np.complex128), np.asarray(a, dtype=np.float64)
        )
        out = np.zeros(s.shape, dtype=np.complex128)
        nonzero = s != 0
        if not np.any(nonzero):
            return out[()]
        s_nz, a_nz = s[nonzero], a[nonzero]
        magnitude = np.abs(s_nz)
        phase = np.round(s_nz / magnitude, PHASE_DECIMALS)
        x_c = (magnitude * self.c / self.m) ** (1.0 / self.beta)
        with np.errstate(divide="ignore"):
            zeta = np.log(a_nz / x_c)
        if np.all(phase == phase[0]):
            table = _phase_table(phase[0].real, phase[0].imag, self.m, self.beta)
            out[nonzero] = x_c ** 2 * table(zeta)
            return out[()]
        values = np.empty(s_nz.shape, dtype=np.complex128)
        unique, inverse = np.unique(phase, return_inverse=True)
        inverse = inverse.reshape(phase.shape)
        for i, p in enumerate(unique):
            sel = inverse == i
            values[sel] = _phase_table(p.real, p.imag, self.m, self.beta)(
                zeta[sel]
            )
        out[nonzero] = x_c ** 2 * values
        return out[()]
