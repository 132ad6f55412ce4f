"""Bargmann-Fock kernels on C^{m+1}, the Bargmann transform, and the line-bundle variant.

Kernels are taken relative to exp(-k|w|^2) omega^{m+1}/(m+1)!, where
omega = i sum dw_j ^ dwbar_j equals 2 dx dy per complex coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr

from ..errors import DomainError, NumericalError
from ..specfn import gauss_legendre, hermite_functions

__all__ = [
    "bf_bergman",
    "bf_eigenprojection_diag",
    "bf_level_dimension",
    "bf_partial_density",
    "bf_partial_density_limit",
    "szasz_cdf_limit",
    "LineBundleBFModel",
    "linebundle_bf_density",
    "BargmannReport",
    "bargmann_transform",
    "bargmann_transform_check",
]

_EXP_GUARD = 700.0


def _as_vec(z, n: int, name: str) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.size != n:
        raise DomainError(f"{name} must have {n} complex coordinates")
    return z


def bf_bergman(k: float, m: int, z, w, log: bool = False) -> complex:
    """(k/2pi)^{m+1} exp(k z.wbar) on C^{m+1}; ``log=True`` returns its logarithm."""
    if k <= 0 or m < 0:
        raise DomainError("need k > 0 and m >= 0")
    z = _as_vec(z, m + 1, "z")
    w = _as_vec(w, m + 1, "w")
    expo = k * complex(z @ w.conj())
    logval = (m + 1) * math.log(k / (2 * math.pi)) + expo
    if log:
        return logval
    if abs(expo.real) > _EXP_GUARD:
        raise NumericalError("kernel overflows; call with log=True", {"log_value": logval})
    return complex(np.exp(logval))


def bf_level_dimension(m: int, N: int) -> int:
    """Dimension of homogeneous polynomials of degree N in m+1 variables."""
    return math.comb(N + m, m)


def bf_eigenprojection_diag(k: float, m: int, N: int, Z, log: bool = False) -> float:
    """Diagonal of the degree-N projector: (k/2pi)^{m+1} k^N |Z|^{2N} / N!.

    The constant is the one for which int Pi_N exp(-k|Z|^2) omega^{m+1}/(m+1)! equals
    the level dimension C(N+m, m).
    """
    if N < 0 or N > 10**5:
        raise DomainError("N must lie in [0, 1e5]")
    Z = _as_vec(Z, m + 1, "Z")
    r2 = float(np.vdot(Z, Z).real)
    if r2 == 0.0:
        if N > 0:
            return -math.inf if log else 0.0
        lv = (m + 1) * math.log(k / (2 * math.pi))
    else:
        lv = (m + 1) * math.log(k / (2 * math.pi)) + N * math.log(k * r2) - gammaln(N + 1)
    return lv if log else math.exp(lv)


def _poisson_log_terms(lam: float, extra=None):
    """log of lam^N/N! (times optional weights) over a window that carries all the mass."""
    sd = math.sqrt(max(lam, 1.0))
    hi = int(lam + 40 * sd + 50)
    N = np.arange(hi + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lt = N * math.log(lam) - gammaln(N + 1) if lam > 0 else np.where(N == 0, 0.0, -np.inf)
    if extra is not None:
        lt = lt + extra(N)
    return N, lt


def _lower_fraction(log_terms: np.ndarray, N: np.ndarray, cutoff: float, inclusive: bool = True) -> float:
    mask = N <= cutoff if inclusive else N < cutoff
    if not mask.any():
        return 0.0
    return float(np.exp(logsumexp(log_terms[mask]) - logsumexp(log_terms)))


def bf_partial_density(k: float, m: int, E: float, Z) -> float:
    """Fraction of the Bergman density at Z carried by the levels N <= E k.

    The level weights are Poisson(k|Z|^2) probabilities, independent of m.
    """
    if E <= 0 or k <= 0:
        raise DomainError("need E > 0 and k > 0")
    Z = _as_vec(Z, m + 1, "Z")
    lam = k * float(np.vdot(Z, Z).real)
    N, lt = _poisson_log_terms(lam)
    return _lower_fraction(lt, N, E * k + 1e-9 * max(1.0, E * k))


def bf_partial_density_limit(E: float, u: float) -> float:
    """Limit of the fraction at |Z|^2 = E (1 + u/sqrt k): Phi(-sqrt(E) u)."""
    return float(ndtr(-math.sqrt(E) * u))


def _szasz_terms(k: float, x: float, m: int):
    def weight(N):
        with np.errstate(divide="ignore"):
            w = m * np.log(N) + gammaln(N + 1) - gammaln(N + m + 1) if m > 0 else np.zeros_like(N)
        return w

    return _poisson_log_terms(k * x, weight)


def szasz_cdf_limit(k: float, x: float, E: float, m: int = 0) -> tuple[float, float]:
    """Normalised partial sum of (kx)^N N^m/(N+m)! over N <= k E^2, and its Gaussian limit.

    The limit is Phi(y/sqrt x) with y = sqrt(k)(E^2 - x).
    """
    if x <= 0 or E <= 0:
        raise DomainError("need x > 0 and E > 0")
    N, lt = _szasz_terms(k, x, m)
    value = _lower_fraction(lt, N, k * E * E + 1e-9 * max(1.0, k * E * E))
    y = math.sqrt(k) * (E * E - x)
    return value, float(ndtr(y / math.sqrt(x)))


@dataclass(frozen=True)
class LineBundleBFModel:
    """Bargmann-Fock model on the dual of a line bundle over an m-dimensional base.

    The level-N contracted density is taken as N^m/m! (1 + a1/N); ``vol_X`` is the
    volume of the unit circle bundle.
    """

    m: int
    k_planck: float
    a1: float = 0.0
    vol_X: float = 1.0

    def __post_init__(self):
        if self.m < 0 or self.k_planck <= 0 or self.vol_X <= 0:
            raise DomainError("need m >= 0, k > 0 and vol_X > 0")

    @property
    def hbar(self) -> float:
        return 1.0 / self.k_planck

    def gaussian_constant(self) -> float:
        """Normalising constant 2 hbar^{-(m+1)} / (vol_X Gamma(m+1)) of the Gaussian measure."""
        return 2.0 * self.hbar ** (-(self.m + 1)) / (self.vol_X * math.gamma(self.m + 1))

    def gaussian_mass(self, tol: float = 1e-13) -> float:
        """Mass of the Gaussian measure by radial quadrature (rho^{2m+1} drho times vol_X)."""
        h = self.hbar
        rmax = math.sqrt(h * (80.0 + 4 * self.m))
        radial = gauss_legendre(lambda r: r ** (2 * self.m + 1) * np.exp(-r * r / h), 0.0, rmax, tol=tol)
        return self.gaussian_constant() * self.vol_X * radial

    def level_log_weights(self, x: float, N: np.ndarray) -> np.ndarray:
        k, m = self.k_planck, self.m
        with np.errstate(divide="ignore", invalid="ignore"):
            lw = N * math.log(k * x) + m * np.log(N) - gammaln(N + m + 1)
            if self.a1:
                lw = lw + np.log1p(self.a1 / np.where(N > 0, N, 1.0))
        if m > 0:
            lw = np.where(N > 0, lw, -np.inf)
        return lw


def linebundle_bf_density(model: LineBundleBFModel, E: float, beta: float) -> tuple[float, float]:
    """Fraction of the density at |lambda| = exp(beta/sqrt k) E carried by levels N <= k E^2.

    Returns ``(value, limit)`` with limit Phi(-2 beta E) from the Poisson central limit.
    """
    if E <= 0:
        raise DomainError("E must be positive")
    k = model.k_planck
    x = math.exp(2 * beta / math.sqrt(k)) * E * E
    lam = k * x
    sd = math.sqrt(max(lam, 1.0))
    N = np.arange(int(lam + 40 * sd + 50 + model.m) + 1, dtype=float)
    lt = model.level_log_weights(x, N)
    value = _lower_fraction(lt, N, k * E * E + 1e-9 * max(1.0, k * E * E))
    return value, float(ndtr(-2.0 * beta * E))


# ---------------------------------------------------------------------------
# Bargmann transform (d = 1)


@dataclass(frozen=True)
class BargmannReport:
    residual: float
    coefficient: complex
    norm_ratio: float


def bargmann_transform(f, Z, half_width: float = 14.0, nodes: int = 400) -> np.ndarray:
    """pi^{-1/4} int exp(-(Z^2 - 2 sqrt2 Z X + X^2)/2) f(X) dX for complex ``Z``."""
    Z = np.asarray(Z, dtype=complex)
    x, w = np.polynomial.legendre.leggauss(nodes)
    X, W = half_width * x, half_width * w
    fx = f(X) * W
    flat = Z.reshape(-1)
    kern = np.exp(-0.5 * (flat[:, None] ** 2 - 2 * math.sqrt(2) * flat[:, None] * X[None, :] + X[None, :] ** 2))
    return (kern @ fx).reshape(Z.shape) * math.pi**-0.25


def bargmann_transform_check(n_index: int, samples: int = 64, radius: float = 2.5) -> BargmannReport:
    """Compare the transform of the n-th Hermite function with c Z^n.

    ``residual`` is the relative L^2 distance (over ``samples`` points on a polar grid)
    to the best monomial fit; ``norm_ratio`` is the Bargmann-Fock norm of the image,
    with measure exp(-|Z|^2) dL / pi, which should equal 1.
    """
    if not 0 <= n_index <= 8:
        raise DomainError("n_index must lie in 0..8")

    def f(X):
        return hermite_functions(n_index, X)[n_index]

    side = max(2, int(math.ceil(math.sqrt(samples))))
    r = radius * (np.arange(1, side + 1) / side)
    phi = 2 * math.pi * np.arange(side) / side
    Zs = (r[:, None] * np.exp(1j * phi[None, :])).reshape(-1)
    BZ = bargmann_transform(f, Zs)
    mono = Zs**n_index
    c = complex(np.vdot(mono, BZ) / np.vdot(mono, mono))
    residual = float(np.linalg.norm(BZ - c * mono) / np.linalg.norm(BZ))

    # norm on a polar Gauss-Legendre grid
    xr, wr = np.polynomial.legendre.leggauss(80)
    R = 7.0
    rr, wrr = 0.5 * R * (xr + 1), 0.5 * R * wr
    nphi = 2 * n_index + 8
    ph = 2 * math.pi * np.arange(nphi) / nphi
    grid = rr[:, None] * np.exp(1j * ph[None, :])
    vals = np.abs(bargmann_transform(f, grid)) ** 2 * np.exp(-rr[:, None] ** 2)
    norm2 = float(np.sum(vals.mean(axis=1) * rr * wrr) * 2 * math.pi / math.pi)
    return BargmannReport(residual, c, norm2)
