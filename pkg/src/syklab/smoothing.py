"""Fejer-kernel smoothing: kernel evaluation, derivatives, convolution.

K_lam(x) = (lam / 2 pi) * (sin(lam x / 2) / (lam x / 2))**2 is a
nonnegative approximate identity.  Convolving a bounded tabulated
function with it yields a real-analytic smoothing whose derivatives obey
|f_lam^(k)| <= 2 lam**k sup|f|.  Tails of every integral are handled in
closed form through the sine integral, so only a finite oscillatory core
is done by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import sici

from .errors import NumericValidationError
from .spectrum import Tabulated

DERIVATIVE_ORDER_CAP = 6
_QUAD_KW = dict(epsabs=1e-11, epsrel=1e-11, limit=400)
# kinks of piecewise-linear tabulated functions cap the achievable accuracy
_CONV_QUAD_KW = dict(epsabs=1e-8, epsrel=1e-8, limit=1500)


@dataclass(frozen=True)
class FejerKernel:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("bandwidth must be positive")

    def __call__(self, x):
        return fejer_eval(self, x)


def fejer_eval(kernel: FejerKernel, x):
    """Kernel value; the x = 0 singularity is removable (value lam/2pi)."""
    lam = kernel.lam
    s = np.sinc(lam * np.asarray(x, dtype=float) / (2.0 * math.pi))
    out = lam / (2.0 * math.pi) * s * s
    return float(out) if np.isscalar(x) else out


def fejer_cdf(kernel: FejerKernel, u):
    """Exact integral of the kernel over (-inf, u], via the sine integral:
    1/2 + (Si(lam u) - sin^2(lam u / 2) / (lam u / 2)) / pi."""
    v = kernel.lam * np.asarray(u, dtype=float)
    si, _ = sici(v)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = np.where(v != 0.0, np.sin(v / 2.0) ** 2 / (v / 2.0), 0.0)
    out = 0.5 + (si - corr) / math.pi
    return float(out) if np.isscalar(u) else out


def fejer_mass(kernel: FejerKernel, core_halfwidth: float | None = None) -> float:
    """Total integral of the kernel: adaptive quadrature on a finite core
    plus exact sine-integral tails.  Equals 1 to quadrature accuracy."""
    lam = kernel.lam
    X = core_halfwidth if core_halfwidth is not None else 200.0 / lam
    core, _ = quad(lambda y: fejer_eval(kernel, y), -X, X, **_QUAD_KW)
    return core + fejer_cdf(kernel, -X) + (1.0 - fejer_cdf(kernel, X))


def fejer_derivative(kernel: FejerKernel, order: int, x: float) -> float:
    """k-th derivative via the spectral representation
    (1/2pi) int_{-lam}^{lam} (1 - |xi|/lam) (i xi)^k e^{i xi x} dxi,
    reduced to a real cos/sin quadrature."""
    if order < 0 or order > DERIVATIVE_ORDER_CAP:
        raise ValueError(f"derivative order must lie in 0..{DERIVATIVE_ORDER_CAP}")
    lam = kernel.lam
    x = float(x)

    def envelope(xi):
        return (1.0 - xi / lam) * xi**order

    if order % 2 == 0:
        sign = (-1.0) ** (order // 2)
        val, _ = quad(envelope, 0.0, lam, weight="cos", wvar=x, **_QUAD_KW)
    else:
        sign = (-1.0) ** ((order + 1) // 2)
        val, _ = quad(envelope, 0.0, lam, weight="sin", wvar=x, **_QUAD_KW)
    return sign * val / math.pi


def fejer_derivative_bound(kernel: FejerKernel, order: int, x: float) -> float:
    """The certified envelope lam**(k+1)/(2 pi) * max(1, lam |x| / 3)**-2."""
    lam = kernel.lam
    return lam ** (order + 1) / (2.0 * math.pi) * max(1.0, lam * abs(x) / 3.0) ** -2


def smooth(f: Tabulated, lam: float, grid: np.ndarray) -> Tabulated:
    """Convolve a clamped tabulated function with the kernel, evaluated at
    the given uniform grid.

    The constant extensions of f outside its grid hull integrate in
    closed form against the kernel CDF; only the hull is quadratured.
    The sup-norm and first-derivative envelopes (2 lam**k sup|f|) are
    spot-checked on the result.
    """
    kernel = FejerKernel(lam)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2:
        raise ValueError("grid must be a 1-d array with at least 2 points")
    h = float(grid[1] - grid[0])
    if h * lam > math.pi:
        raise NumericValidationError(
            f"grid spacing {h:g} too coarse for bandwidth {lam:g} (need h*lam <= pi)"
        )
    lo, hi = float(f.xs[0]), float(f.xs[-1])
    # interpolation kinks are declared as breakpoints so the adaptive rule
    # only ever sees smooth pieces
    nodes = f.xs[1:-1]
    kw = dict(_CONV_QUAD_KW, limit=max(_CONV_QUAD_KW["limit"], 10 * len(f.xs)))
    vals = np.empty(len(grid))
    for i, x in enumerate(grid):
        core, _ = quad(lambda t: f(t) * fejer_eval(kernel, x - t), lo, hi, points=nodes, **kw)
        vals[i] = (
            core
            + f.ys[0] * (1.0 - fejer_cdf(kernel, x - lo))
            + f.ys[-1] * fejer_cdf(kernel, x - hi)
        )
    sup_f = f.sup_norm
    slack = 1e-8 * max(sup_f, 1.0)
    if np.max(np.abs(vals)) > 2.0 * sup_f + slack:
        raise NumericValidationError("smoothed values violate the sup-norm envelope")
    if np.max(np.abs(np.diff(vals))) > 2.0 * lam * sup_f * h + slack:
        raise NumericValidationError("smoothed increments violate the derivative envelope")
    return Tabulated(grid, vals, lipschitz=min(f.lipschitz, 2.0 * lam * sup_f))


def sup_distance_on_grid(f, g, grid: np.ndarray) -> float:
    grid = np.asarray(grid, dtype=float)
    return float(np.max(np.abs(f(grid) - g(grid))))


def uniform_error_bound(sup_norm: float, lipschitz: float, lam: float) -> float:
    """Bound on sup |f - f_lam| for f with modulus of continuity
    omega(a) <= min(2 sup|f|, lipschitz * |a|):
    (2/pi) int_0^inf min(2 sup|f|, 2 lipschitz y / lam) (sin y / y)^2 dy."""
    if lipschitz <= 0:
        return 0.0
    ystar = sup_norm * lam / lipschitz
    core, _ = quad(lambda y: np.sin(y) ** 2 / max(y, 1e-300), 0.0, ystar, **_QUAD_KW)
    si, _ = sici(2.0 * ystar)
    tail = math.pi / 2.0 - (si - math.sin(ystar) ** 2 / ystar) if ystar > 0 else math.pi / 2.0
    return (2.0 / math.pi) * ((2.0 * lipschitz / lam) * core + 2.0 * sup_norm * tail)
