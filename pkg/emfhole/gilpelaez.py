"""Numerical integration and Laplace transform inversion

All integrals here run on logarithmic panels of Gauss-Legendre nodes. The
integrands of the exposure analytics decay algebraically, so on a log scale
consecutive panels shrink geometrically and the remainder is extrapolated in
closed form.
"""
import functools
import logging
from dataclasses import dataclass
from typing import Callable
import numpy as np
from scipy import optimize, special
from .input_parser import QuadratureConfig
from .logger import Logger


LaplaceTransform = Callable[[np.ndarray], np.ndarray]


class NonConvergence(RuntimeError):
    """A quadrature or transform inversion did not reach its tolerance"""


class BracketFailure(RuntimeError):
    """No bracket enclosing the requested root was found"""


LOG_HEAD = -20.0
PANEL_WIDTH = 0.25
PANEL_BLOCK = 32
MIN_PANELS = 4
ZERO_SPAN = 60.0

OSCILLATION_WIDTH = 0.5
SUBPANEL_WIDTH = np.pi
PHASE_STEP = 1.0e-3
RAW_EXCURSION = 0.02
NODE_BUDGET = 2 ** 21


@functools.lru_cache(maxsize=None)
def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on :math:`[-1, 1]`"""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _sum_with_tail(panels, head, tol):
    total = head[..., None] + np.cumsum(panels, axis=-1)
    n = panels.shape[-1]
    ok = np.zeros(total.shape, dtype=bool)
    tail = np.zeros(total.shape, dtype=total.dtype)
    if n > MIN_PANELS:
        prev2, prev, cur = panels[..., :-2], panels[..., 1:-1], panels[..., 2:]
        size = np.abs(cur)
        abs_total = np.abs(total[..., 2:])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = cur / prev
            r_prev = prev / prev2
            r_abs = np.abs(r)
            small = (
                (size <= tol * abs_total)
                & (np.abs(prev) <= tol * abs_total)
                & (abs_total > 0)
            )
            geometric = (
                (cur != 0)
                & np.isfinite(r) & np.isfinite(r_prev)
                & (r_abs < 1) & (np.abs(r_prev) < 1)
                & (np.abs(r - r_prev) * size
                   <= tol * abs_total * (1.0 - r_abs) ** 2)
            )
            tail[..., 2:] = np.where(geometric, cur * r / (1.0 - r), 0.0)
        ok[..., 2:] = small | geometric
        ok[..., :MIN_PANELS] = False
    if n * PANEL_WIDTH >= ZERO_SPAN:
        ok[..., -1] |= np.all(panels == 0, axis=-1)
    idx = np.argmax(ok, axis=-1)[..., None]
    converged = np.take_along_axis(ok, idx, axis=-1)[..., 0]
    value = np.take_along_axis(total + tail, idx, axis=-1)[..., 0]
    return value, converged


def semiinfinite_quadrature(f, lower=0.0, quad=None, scale=1.0):
    """Integrate :math:`\\int_{a}^{\\infty} f(x)\\,dx` for :math:`a \\ge 0`

    The integral is mapped to :math:`\\zeta = \\ln(x/\\mathrm{scale})` and
    summed panel by panel. A row stops once the last panels are negligible
    against the running total, or once the panel sequence has settled into a
    geometric progression, whose remainder is then added in closed form.
    Lower limits of zero start at :math:`x = \\mathrm{scale}\\, e^{-20}`
    with a single-point estimate of the skipped head.

    Parameters
    ----------
    f : callable
        Vectorized integrand. Called with :code:`x` of shape
        :code:`batch + (panels, nodes)` where :code:`batch` is the shape of
        :code:`lower`. It may return any shape broadcasting against that,
        e.g. an additional leading batch of transform arguments.
    lower : float or numpy.ndarray
        Lower integration limits.
    quad : QuadratureConfig, optional
        Tolerances, :code:`tol_tail` is the relative truncation tolerance.
    scale : float or numpy.ndarray, optional
        Characteristic scale of the integrand.

    Returns
    -------
    value : float, complex, or numpy.ndarray
        Integral per batch entry.

    Raises
    ------
    NonConvergence
        If some row has not converged after :code:`quad.max_panels` panels.
    """
    quad = quad or QuadratureConfig()
    lower, scale = np.broadcast_arrays(
        np.asarray(lower, dtype=np.float64), np.asarray(scale, dtype=np.float64)
    )
    if np.any(lower < 0) or not np.all(scale > 0):
        raise ValueError("Lower limits must be >= 0 and scales positive.")

    at_zero = lower == 0
    zeta0 = np.where(
        at_zero, LOG_HEAD, np.log(np.where(at_zero, scale, lower) / scale)
    )
    head = np.zeros(lower.shape)
    if np.any(at_zero):
        x_head = (scale * np.exp(LOG_HEAD))[..., None, None]
        head = np.where(at_zero, (x_head * f(x_head))[..., 0, 0], 0.0)

    nodes, weights = gauss_legendre(quad.nodes)
    half = 0.5 * PANEL_WIDTH
    offsets = half * (np.asarray(nodes) + 1.0)
    blocks = []
    for start in range(0, quad.max_panels, PANEL_BLOCK):
        k = np.arange(start, min(start + PANEL_BLOCK, quad.max_panels))
        zeta = zeta0[..., None, None] + (k * PANEL_WIDTH)[:, None] + offsets
        x = scale[..., None, None] * np.exp(zeta)
        blocks.append(half * np.sum(weights * f(x) * x, axis=-1))
        panels = np.concatenate(blocks, axis=-1)
        value, converged = _sum_with_tail(
            panels, np.broadcast_to(head, panels.shape[:-1]), quad.tol_tail
        )
        if np.all(converged):
            Logger.rank0.log(
                logging.DEBUG,
                f"semi-infinite quadrature converged within "
                f"{panels.shape[-1]} panels",
            )
            return value[()]
    err_str = (
        f"Semi-infinite quadrature did not converge within {quad.max_panels} "
        f"panels (tol_tail = {quad.tol_tail})"
    )
    Logger.rank0.log(logging.DEBUG, err_str)
    raise NonConvergence(err_str)


def log_panel_quadrature(f, lower, upper, quad=None, scale=1.0):
    """Integrate :math:`\\int_a^b f(x)\\,dx` for :math:`0 \\le a` and finite
    :math:`b` on logarithmic panels

    Every row uses the same number of panels, sized so that none exceeds the
    panel width of :code:`semiinfinite_quadrature`. Rows with
    :math:`b \\le a` integrate to zero.
    """
    quad = quad or QuadratureConfig()
    lower, upper, scale = np.broadcast_arrays(
        np.asarray(lower, dtype=np.float64),
        np.asarray(upper, dtype=np.float64),
        np.asarray(scale, dtype=np.float64),
    )
    if not np.all(np.isfinite(upper)):
        raise ValueError("Upper limits must be finite.")
    at_zero = lower == 0
    x_head = scale * np.exp(LOG_HEAD)
    zeta0 = np.where(
        at_zero, LOG_HEAD, np.log(np.where(at_zero, scale, lower) / scale)
    )
    zeta1 = np.log(np.maximum(upper, x_head) / scale)
    span = np.clip(zeta1 - zeta0, 0.0, None)
    n_panels = max(int(np.ceil(np.max(span, initial=0.0) / PANEL_WIDTH)), 1)
    if n_panels > quad.max_panels:
        raise NonConvergence(
            f"Finite log-panel quadrature needs {n_panels} panels, more than "
            f"max_panels = {quad.max_panels}"
        )
    width = span / n_panels
    nodes, weights = gauss_legendre(quad.nodes)
    position = np.arange(n_panels)[:, None] + 0.5 * (np.asarray(nodes) + 1.0)
    zeta = zeta0[..., None, None] + position * width[..., None, None]
    x = scale[..., None, None] * np.exp(zeta)
    value = np.sum(
        0.5 * width[..., None, None] * weights * f(x) * x, axis=(-2, -1)
    )
    head = 0.0
    if np.any(at_zero):
        head = np.where(
            at_zero & (upper > x_head),
            (x_head[..., None, None] * f(x_head[..., None, None]))[..., 0, 0],
            0.0,
        )
    return np.where(upper > lower, value + head, 0.0)[()]


def _phase_integrand(lt, w, y, batch=()):
    s = -1j * y[None, :] / w[:, None]
    return np.exp(-1j * y)[None, :] * lt(s, *(b[:, None] for b in batch))


def _oscillatory_tail(lt, w, y_end, batch=()):
    """Closed-form remainder :math:`\\int_Y^\\infty \\Im\\{g(y)\\}/y\\,dy`

    :math:`g(y) = e^{-jy} L(-jy/w)` is treated as a pure phase of the local
    angular frequency, which makes the remainder an exponential integral.
    """
    y = np.array([y_end, y_end + PHASE_STEP])
    g = _phase_integrand(lt, w, y, batch)
    g_end = g[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = -np.angle(g[:, 1] / g_end) / PHASE_STEP
        tail = np.imag(
            g_end * np.exp(1j * omega * y_end)
            * special.exp1(1j * omega * y_end)
        )
    usable = np.isfinite(tail) & (g_end != 0) & (omega != 0)
    return np.where(usable, tail, 0.0), np.abs(g_end)


def _gil_pelaez(lt, w, quad, batch=()):
    nodes, weights = gauss_legendre(quad.nodes)
    nodes, weights = np.asarray(nodes), np.asarray(weights)

    # log y in [ln t_min_scale, 0]
    log_lo = np.log(quad.t_min_scale)
    n_a = int(np.ceil(-log_lo / OSCILLATION_WIDTH))
    h_a = -log_lo / n_a
    zeta = log_lo + (np.arange(n_a)[:, None] + 0.5 * (nodes + 1.0)) * h_a
    g = _phase_integrand(lt, w, np.exp(zeta).ravel(), batch)
    near = 0.5 * h_a * np.sum(np.imag(g) * np.tile(weights, n_a), axis=-1)

    # y in [2^k, 2^(k+1)], panels of width <= pi
    result = np.full(w.shape, np.nan)
    active = np.arange(w.size)
    accumulated = np.zeros(w.size)
    previous = np.full(w.size, np.nan)
    max_doublings = quad.max_doublings
    for k in range(max_doublings):
        y_lo, y_hi = 2.0 ** k, 2.0 ** (k + 1)
        n_sub = int(np.ceil((y_hi - y_lo) / SUBPANEL_WIDTH))
        width = (y_hi - y_lo) / n_sub
        chunk = max(1, NODE_BUDGET // (quad.nodes * max(active.size, 1)))
        panel = np.zeros(active.size)
        for c0 in range(0, n_sub, chunk):
            left = y_lo + width * np.arange(c0, min(c0 + chunk, n_sub))
            y = (left[:, None] + 0.5 * width * (nodes + 1.0)).ravel()
            g = _phase_integrand(
                lt, w[active], y, [b[active] for b in batch]
            )
            panel += 0.5 * width * np.sum(
                np.imag(g) / y * np.tile(weights, left.size), axis=-1
            )
        accumulated[active] += panel
        tail, amplitude = _oscillatory_tail(
            lt, w[active], y_hi, [b[active] for b in batch]
        )
        corrected = accumulated[active] + tail
        done = (
            (np.abs(corrected - previous[active]) <= quad.tol_tail)
            & (amplitude / y_hi ** 2 <= quad.tol_tail)
        )
        previous[active] = corrected
        result[active[done]] = corrected[done]
        active = active[~done]
        if active.size == 0:
            Logger.rank0.log(
                logging.DEBUG,
                f"Gil-Pelaez inversion truncated at y = {y_hi:g} "
                f"({k + 1} doublings)",
            )
            break
    else:
        err_str = (
            f"Gil-Pelaez inversion did not converge for w = "
            f"{w[active][:5]} after {max_doublings} panel doublings "
            f"(tol_tail = {quad.tol_tail})"
        )
        Logger.rank0.log(logging.DEBUG, err_str)
        raise NonConvergence(err_str)
    return 0.5 - (near + result) / np.pi


def _cdf_raw(lt, w, quad, batch=()):
    w = np.asarray(w, dtype=np.float64)
    batch = [np.broadcast_to(np.asarray(b), w.shape) for b in batch]
    raw = np.where(np.isposinf(w), 1.0, 0.0)
    active = (w > 0) & np.isfinite(w)
    if np.any(active):
        values = _gil_pelaez(
            lt, np.atleast_1d(w[active]), quad,
            [np.atleast_1d(b[active]) for b in batch],
        )
        raw = raw.copy()
        raw[active] = values
        excursion = (values < -RAW_EXCURSION) | (values > 1 + RAW_EXCURSION)
        if np.any(excursion):
            err_str = (
                f"Gil-Pelaez CDF values {values[excursion][:5]} at w = "
                f"{np.atleast_1d(w[active])[excursion][:5]} fall outside "
                f"[{-RAW_EXCURSION}, {1 + RAW_EXCURSION}]"
            )
            Logger.rank0.log(logging.DEBUG, err_str)
            raise NonConvergence(err_str)
    return raw


def cdf_from_laplace(lt, w, quad=None, batch=()):
    """CDF of a nonnegative random variable from its Laplace transform

    Evaluates the single-sided Gil-Pelaez formula

    .. math::

        F(w) = \\frac{1}{2} - \\frac{1}{\\pi} \\int_0^\\infty
            \\frac{1}{t} \\Im\\left\\{e^{-jtw} \\mathcal{L}(-jt)\\right\\}dt

    in the variable :math:`y = wt`. The interval :math:`[t_{min}w, 1]` is
    integrated on logarithmic panels, beyond it on doubling intervals split
    into panels no wider than :math:`\\pi`. Doubling stops once the
    tail-corrected integral changes by less than :code:`quad.tol_tail` and
    the transform magnitude has decayed below it.

    Parameters
    ----------
    lt : callable
        Laplace transform, vectorized over complex arguments of any shape.
    w : float or numpy.ndarray
        Abscissae. Values :math:`\\le 0` give 0 and :math:`+\\infty` gives 1.
    quad : QuadratureConfig, optional
    batch : sequence of numpy.ndarray, optional
        Extra arrays broadcasting against :code:`w`, passed row by row to
        :code:`lt` as additional arguments, so one call can invert a family
        of transforms.

    Returns
    -------
    cdf : float or numpy.ndarray
        Probabilities clamped to :math:`[0, 1]`.

    Raises
    ------
    NonConvergence
        If the truncation criterion is not met within
        :code:`quad.max_doublings` doublings, or a raw value leaves
        :math:`[-0.02, 1.02]`.
    """
    quad = quad or QuadratureConfig()
    return np.clip(_cdf_raw(lt, w, quad, batch), 0.0, 1.0)[()]


@dataclass
class CdfCurve:
    """Tabulated CDF

    Attributes
    ----------
    grid : numpy.ndarray
        Ascending abscissae.
    values : numpy.ndarray
        CDF values before clamping and monotone repair.
    step : bool
        Evaluate as a right-continuous step function (empirical CDFs) instead
        of by linear interpolation.
    """
    grid: np.ndarray
    values: np.ndarray
    step: bool = False

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be 1-d and of equal size")
        if np.any(np.diff(self.grid) < 0):
            raise ValueError("grid must be ascending")

    @property
    def repaired(self):
        """Values clamped to :math:`[0, 1]` and made nondecreasing by a
        running maximum"""
        return np.maximum.accumulate(np.clip(self.values, 0.0, 1.0))

    def raw_excursion(self):
        return float(max(
            0.0, -np.min(self.values), np.max(self.values) - 1.0
        ))

    def __call__(self, w):
        w = np.asarray(w, dtype=np.float64)
        repaired = self.repaired
        if self.step:
            idx = np.searchsorted(self.grid, w, side="right")
            return np.where(idx > 0, repaired[np.maximum(idx - 1, 0)], 0.0)[()]
        return np.interp(w, self.grid, repaired)[()]

    def percentile(self, rho):
        """Smallest abscissa at which the repaired CDF reaches :code:`rho`"""
        repaired = self.repaired
        if rho > repaired[-1]:
            raise BracketFailure(
                f"CDF curve tops out at {repaired[-1]} < rho = {rho}"
            )
        idx = int(np.argmax(repaired >= rho))
        if self.step or idx == 0:
            return float(self.grid[idx])
        f0, f1 = repaired[idx - 1], repaired[idx]
        w0, w1 = self.grid[idx - 1], self.grid[idx]
        return float(w0 + (rho - f0) * (w1 - w0) / (f1 - f0))


def cdf_curve_from_laplace(lt, grid, quad=None):
    quad = quad or QuadratureConfig()
    grid = np.asarray(grid, dtype=np.float64)
    return CdfCurve(grid=grid, values=_cdf_raw(lt, grid, quad))


def invert_monotone(cdf, rho, bracket_hint, max_steps=60, rtol=1.0e-6):
    """Smallest :math:`w` with :code:`cdf(w) >= rho` for a nondecreasing
    scalar :code:`cdf`

    Expands a geometric bracket from :code:`bracket_hint` by factors of two
    until it encloses :code:`rho`, then refines with Brent's method.

    Raises
    ------
    BracketFailure
        If no bracket is found within :code:`max_steps` expansions.
    """
    if not 0 < rho < 1:
        raise ValueError(f"rho must be in (0, 1), not {rho}")
    if not bracket_hint > 0:
        raise ValueError(f"bracket_hint must be positive, not {bracket_hint}")

    def excess(w):
        return float(cdf(w)) - rho

    lo = hi = float(bracket_hint)
    f_lo = f_hi = excess(hi)
    for _ in range(max_steps):
        if f_hi < 0:
            lo, f_lo = hi, f_hi
            hi *= 2.0
            f_hi = excess(hi)
        else:
            hi, f_hi = lo, f_lo
            lo *= 0.5
            f_lo = excess(lo)
        if f_hi >= 0 and f_lo < 0:
            break
    else:
        err_str = (
            f"No bracket for rho = {rho} within {max_steps} expansions of "
            f"{bracket_hint} (reached [{lo:g}, {hi:g}])"
        )
        Logger.rank0.log(logging.DEBUG, err_str)
        raise BracketFailure(err_str)
    if f_hi == 0:
        return hi
    Logger.rank0.log(
        logging.DEBUG, f"percentile {rho} bracketed in [{lo:g}, {hi:g}]"
    )
    return optimize.brentq(excess, lo, hi, xtol=1e-12 * hi, rtol=rtol)


def percentile_from_laplace(lt, rho, bracket_hint, quad=None):
    """Invert a Laplace transform CDF at probability :code:`rho`

    Brackets and refines the clamped CDF of :code:`cdf_from_laplace` with
    :code:`invert_monotone`.

    Raises
    ------
    BracketFailure
        If no bracket is found within :code:`quad.max_bracket_steps`
        expansions.
    """
    quad = quad or QuadratureConfig()
    return invert_monotone(
        lambda w: cdf_from_laplace(lt, w, quad), rho, bracket_hint,
        quad.max_bracket_steps,
    )
