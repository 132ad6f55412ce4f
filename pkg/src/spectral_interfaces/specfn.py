"""Special functions and quadrature used throughout the package.

Airy, Bessel, normal-CDF and log-Gamma values come from :mod:`scipy.special`.
The exponentially weighted Laguerre and Hermite recurrences, the weighted Airy
contour integral and the composite Gauss-Legendre driver are implemented here
because they need overflow control or contours that SciPy does not offer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sc

from .errors import DomainError, IntegerOverflowError, NumericalError

__all__ = [
    "ContourSpec",
    "airy_ai",
    "airy_ai_prime",
    "airy_ai_asymptotic",
    "airy_weighted",
    "laguerre_weighted",
    "laguerre_weighted_table",
    "laguerre_weighted_log",
    "laguerre_contour",
    "hermite_functions",
    "hermite_phi",
    "gauss_cdf",
    "bessel_j",
    "log_gamma",
    "composition_count",
    "gauss_legendre",
]

_GL_ORDER = 32
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)

# Mantissas are renormalised once they leave this window.
_BIG = 1e200
_SMALL = 1e-200


# ---------------------------------------------------------------------------
# quadrature


def _composite(f: Callable, a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return np.sum(weights * f(nodes))


def gauss_legendre(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-12,
    panels: int = 4,
    max_panels: int = 1 << 14,
):
    """Composite 32-point Gauss-Legendre rule with dyadic panel refinement.

    ``f`` must accept a 1-D array of nodes. Refinement stops once doubling the
    panel count moves the result by less than ``tol`` in absolute terms, or
    relative to the result when that is larger than one.

    Raises:
        NumericalError: if ``max_panels`` is reached without meeting ``tol``.
    """
    if a == b:
        return 0.0
    prev = _composite(f, a, b, panels)
    n = panels
    while n < max_panels:
        n *= 2
        cur = _composite(f, a, b, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise NumericalError(
        "Gauss-Legendre refinement did not converge",
        {"interval": (a, b), "panels": n, "last_change": abs(cur - prev)},
    )


# ---------------------------------------------------------------------------
# Airy


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite argument: {v!r}")


def airy_ai(s):
    """Airy function Ai(s) for real ``s`` (scalar or array)."""
    _check_finite(s)
    return sc.airy(s)[0]


def airy_ai_prime(s):
    """Derivative Ai'(s)."""
    _check_finite(s)
    return sc.airy(s)[1]


def airy_ai_asymptotic(s):
    """Leading large-``s`` term exp(-2/3 s^{3/2}) / (2 sqrt(pi) s^{1/4})."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("the decaying asymptotic form needs s > 0")
    return np.exp(-2.0 / 3.0 * s**1.5) / (2.0 * math.sqrt(math.pi) * s**0.25)


@dataclass(frozen=True)
class ContourSpec:
    """Two straight rays leaving a base point at angles ``±ray_angle``.

    ``truncation_radius=None`` lets :func:`airy_weighted` pick the radius where
    the integrand has dropped below ``1e-18`` of its peak.
    """

    ray_angle: float = math.pi / 3
    truncation_radius: float | None = None
    panel_count: int = 8

    def __post_init__(self):
        if not (math.pi / 6 < self.ray_angle < math.pi / 2):
            raise DomainError("ray_angle must lie in (pi/6, pi/2)")
        if self.truncation_radius is not None and self.truncation_radius <= 0:
            raise DomainError("truncation_radius must be positive")
        if self.panel_count < 1:
            raise DomainError("panel_count must be a positive integer")


def _weighted_airy_integrand(kappa: float, s: float, base: float, angle: float):
    direction = complex(math.cos(angle), math.sin(angle))

    def g(r):
        t = base + r * direction
        # principal branch of T**kappa; the contour stays in Re T > 0
        return np.exp(kappa * np.log(t) + t**3 / 3.0 - t * s) * direction

    return g


def airy_weighted(kappa: float, s: float, spec: ContourSpec | None = None, tol: float = 1e-13) -> float:
    """Weighted Airy function: contour integral of T^kappa exp(T^3/3 - T s) / (2 pi i).

    The contour is a pair of conjugate rays through ``max(sqrt(s), 0.5)``, which
    keeps it away from the branch point at T = 0. By conjugate symmetry the integral equals
    ``Im(upper-ray integral) / pi``. ``kappa = 0`` gives ``Ai(s)``, and
    ``d/ds Ai_kappa = -Ai_{kappa+1}``.
    """
    _check_finite(kappa, s)
    spec = spec or ContourSpec()
    base = max(math.sqrt(s), 0.5) if s > 0 else 0.5
    g = _weighted_airy_integrand(kappa, s, base, spec.ray_angle)

    radius = spec.truncation_radius
    if radius is None:
        r = np.arange(0.0, 60.0, 0.05)
        mag = np.abs(g(r))
        peak = mag.max()
        past = np.nonzero((mag < 1e-18 * peak) & (r > r[np.argmax(mag)]))[0]
        if past.size == 0:
            raise NumericalError("weighted Airy integrand did not decay", {"kappa": kappa, "s": s})
        radius = float(r[past[0]])

    def f(r):
        return g(r).imag

    scale = float(np.max(np.abs(g(np.linspace(0.0, radius, 64)))))
    try:
        val = gauss_legendre(f, 0.0, radius, tol=tol * max(scale, 1e-300), panels=spec.panel_count)
    except NumericalError as exc:
        exc.diagnostics.update(kappa=kappa, s=s, radius=radius)
        raise
    return float(val / math.pi)


# ---------------------------------------------------------------------------
# Laguerre


def _laguerre_log(n: int, alpha: float, x: float) -> tuple[float, float]:
    """(sign, log|exp(-x/2) L_n^{(alpha)}(x)|) by the rescaled three-term recurrence."""
    a, b = 1.0, 1.0 + alpha - x
    log_scale = -0.5 * x
    if n == 0:
        return 1.0, log_scale
    for k in range(1, n):
        a, b = b, ((2 * k + 1 + alpha - x) * b - (k + alpha) * a) / (k + 1)
        m = abs(b)
        if m > _BIG or (0.0 < m < _SMALL):
            a /= m
            b /= m
            log_scale += math.log(m)
    if b == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, b), log_scale + math.log(abs(b))


def _laguerre_scalar(n: int, alpha: float, x: float) -> float:
    sign, lg = _laguerre_log(n, alpha, x)
    if lg < -745.0:
        return 0.0
    return sign * math.exp(lg)


def laguerre_weighted_log(n: int, alpha: float, x: float) -> tuple[float, float]:
    """Sign and natural log of |exp(-x/2) L_n^{(alpha)}(x)|, for values below the double range."""
    if alpha <= -1:
        raise DomainError("alpha must exceed -1")
    if n < 0 or int(n) != n or n > 10**6:
        raise DomainError("n must be an integer in [0, 10**6]")
    if not (math.isfinite(x) and x >= 0):
        raise DomainError("x must be finite and nonnegative")
    return _laguerre_log(int(n), float(alpha), float(x))


def laguerre_weighted(n: int, alpha: float, x):
    """Return exp(-x/2) L_n^{(alpha)}(x).

    The exponential weight is folded into the starting values and the
    three-term recurrence carries a separate logarithmic scale, so nothing
    overflows for ``n`` up to ``10**6`` and ``x`` up to ``10**5``.
    """
    if alpha <= -1:
        raise DomainError("alpha must exceed -1")
    if n < 0 or int(n) != n:
        raise DomainError("n must be a nonnegative integer")
    if n > 10**6:
        raise DomainError("n above 10**6 is outside the supported range")
    x_arr = np.asarray(x, dtype=float)
    _check_finite(x_arr)
    if np.any(x_arr < 0):
        raise DomainError("x must be nonnegative")
    if x_arr.ndim == 0:
        return _laguerre_scalar(int(n), float(alpha), float(x_arr))
    return laguerre_weighted_table(int(n), alpha, x_arr)[-1]


def laguerre_weighted_table(nmax: int, alpha: float, x) -> np.ndarray:
    """All of exp(-x/2) L_n^{(alpha)}(x) for n = 0..nmax, shape ``(nmax+1,) + x.shape``."""
    if alpha <= -1:
        raise DomainError("alpha must exceed -1")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    out = np.empty((nmax + 1, x.size))
    log_scale = -0.5 * x
    a = np.ones_like(x)
    out[0] = np.exp(log_scale)
    if nmax == 0:
        return out.reshape((1,) + shape)
    b = 1.0 + alpha - x
    out[1] = b * np.exp(log_scale)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        for k in range(1, nmax):
            a, b = b, ((2 * k + 1 + alpha - x) * b - (k + alpha) * a) / (k + 1)
            m = np.abs(b)
            bad = (m > _BIG) | ((m < _SMALL) & (m > 0))
            if bad.any():
                f = np.where(bad, m, 1.0)
                a = a / f
                b = b / f
                log_scale = log_scale + np.log(f)
            out[k + 1] = b * np.exp(log_scale)
    return out.reshape((nmax + 1,) + shape)


def laguerre_contour(n: int, alpha: float, x: float, radius: float = 0.5, nodes: int = 256) -> float:
    """exp(-x/2) L_n^{(alpha)}(x) from the generating-function contour integral.

    (1/2 pi i) on the circle |t| = radius of exp(-x t/(1-t)) (1-t)^{-alpha-1} t^{-n-1} dt,
    by the trapezoidal rule, which converges geometrically for a periodic analytic integrand.
    """
    if not 0 < radius < 1:
        raise DomainError("radius must lie in (0, 1)")
    th = 2 * math.pi * np.arange(nodes) / nodes
    t = radius * np.exp(1j * th)
    g = np.exp(-x * t / (1 - t) - 0.5 * x) * (1 - t) ** (-alpha - 1) * t ** (-n)
    return float(np.mean(g).real)


# ---------------------------------------------------------------------------
# Hermite functions


def hermite_functions(nmax: int, y) -> np.ndarray:
    """L2-normalised Hermite functions psi_0..psi_nmax at ``y`` (hbar = 1).

    Returns an array of shape ``(nmax+1,) + y.shape``. The Gaussian factor is
    carried as a log scale so large ``|y|`` does not underflow early.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.ravel()
    out = np.empty((nmax + 1, y.size))
    log_scale = -0.5 * y * y
    a = np.full_like(y, math.pi**-0.25)
    out[0] = a * np.exp(log_scale)
    if nmax == 0:
        return out.reshape((1,) + shape)
    b = math.sqrt(2.0) * y * a
    out[1] = b * np.exp(log_scale)
    with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
        for n in range(1, nmax):
            a, b = b, math.sqrt(2.0 / (n + 1)) * y * b - math.sqrt(n / (n + 1)) * a
            m = np.maximum(np.abs(a), np.abs(b))
            bad = (m > _BIG) | ((m < _SMALL) & (m > 0))
            if bad.any():
                f = np.where(bad, m, 1.0)
                a = a / f
                b = b / f
                log_scale = log_scale + np.log(f)
            out[n + 1] = b * np.exp(log_scale)
    return out.reshape((nmax + 1,) + shape)


def hermite_phi(multi_index, hbar: float, x) -> float:
    """Product Hermite function hbar^{-d/4} prod_i psi_{a_i}(x_i / sqrt(hbar))."""
    idx = [int(a) for a in np.atleast_1d(multi_index)]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if len(idx) != x.size:
        raise DomainError("multi_index and x must have the same dimension")
    if any(a < 0 or a > 2000 for a in idx):
        raise DomainError("each index must lie in [0, 2000]")
    if hbar <= 0:
        raise DomainError("hbar must be positive")
    val = hbar ** (-0.25 * len(idx))
    for a, xi in zip(idx, x):
        val *= hermite_functions(a, xi / math.sqrt(hbar))[a]
    return float(val)


# ---------------------------------------------------------------------------
# thin wrappers


def gauss_cdf(x):
    """Standard normal CDF."""
    return sc.ndtr(x)


def bessel_j(nu: int, x):
    """Bessel function of the first kind J_nu(x) for integer order."""
    if nu < 0 or int(nu) != nu or nu > 64:
        raise DomainError("nu must be an integer in [0, 64]")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be nonnegative")
    return sc.jv(nu, x)


def log_gamma(x):
    return sc.gammaln(x)


def composition_count(N: int, d: int) -> int:
    """Number of multi-indices in N^d with |alpha| = N, i.e. binom(N+d-1, d-1)."""
    if N < 0 or d < 1:
        raise DomainError("need N >= 0 and d >= 1")
    c = math.comb(N + d - 1, d - 1)
    if c.bit_length() > 127:
        raise IntegerOverflowError(f"binom({N + d - 1}, {d - 1}) does not fit in 128 bits")
    return c
