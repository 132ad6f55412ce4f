"""Spectral projections of the isotropic harmonic oscillator.

The operator is -hbar^2/2 Laplacian + |x|^2/2 on R^d; its eigenvalues are
hbar (N + d/2). Kernels are available as direct Hermite sums, as Fourier
coefficients of the Mehler propagator, and through their Airy scaling limits
at the caustic |x|^2 = 2E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from .errors import CapacityError, DomainError, NumericalError
from .specfn import (
    airy_ai,
    airy_ai_prime,
    airy_weighted,
    composition_count,
    gauss_legendre,
    hermite_functions,
)

__all__ = [
    "SemiclassicalParams",
    "CausticFrame",
    "projection_kernel",
    "hermite_tables",
    "mehler_propagator",
    "mehler_along_path",
    "projection_via_mehler",
    "caustic_limit_kernel",
    "caustic_diagonal",
    "caustic_diagonal_prefactor",
    "airy_kernel",
]

MAX_DIRECT_DIM = 10**6


@dataclass(frozen=True)
class SemiclassicalParams:
    """Energy ``E``, level ``N`` and dimension ``d``; ``hbar`` is derived.

    ``hbar * (N + d/2) == E`` holds by construction.
    """

    E: float
    N: int
    d: int
    hbar: float = field(init=False)

    def __post_init__(self):
        if self.E <= 0:
            raise DomainError("E must be positive")
        if self.N < 0 or int(self.N) != self.N:
            raise DomainError("N must be a nonnegative integer")
        if self.d < 1 or int(self.d) != self.d:
            raise DomainError("d must be a positive integer")
        object.__setattr__(self, "hbar", self.E / (self.N + 0.5 * self.d))

    @classmethod
    def from_hbar(cls, hbar: float, N: int, d: int) -> "SemiclassicalParams":
        return cls(hbar * (N + 0.5 * d), N, d)

    @property
    def dim(self) -> int:
        return composition_count(self.N, self.d)


@dataclass(frozen=True)
class CausticFrame:
    """A unit base point ``x0`` on the caustic of E = 1/2 with the normal/tangential split."""

    x0: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        if abs(np.dot(x0, x0) - 1.0) > 1e-12:
            raise DomainError("caustic base point must have unit length")
        object.__setattr__(self, "x0", x0)

    @classmethod
    def standard(cls, d: int) -> "CausticFrame":
        e = np.zeros(d)
        e[0] = 1.0
        return cls(e)

    def split(self, u):
        """Return ``(u1, u_perp)`` with ``u1 = <x0, u>`` and ``u_perp = u - u1 x0``."""
        u = np.asarray(u, dtype=float)
        u1 = float(np.dot(self.x0, u))
        return u1, u - u1 * self.x0

    def join(self, u1: float, u_perp) -> np.ndarray:
        return u1 * self.x0 + np.asarray(u_perp, dtype=float)


# ---------------------------------------------------------------------------
# direct Hermite sums


def hermite_tables(params: SemiclassicalParams, x) -> np.ndarray:
    """phi_n(x_i) for n = 0..N and each coordinate, shape ``(N+1, d)``.

    Includes the hbar^{-1/4} factor per coordinate.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size != params.d:
        raise DomainError(f"point has dimension {x.size}, expected {params.d}")
    h = params.hbar
    return hermite_functions(params.N, x / math.sqrt(h)) * h**-0.25


def _degree_sum(factors: np.ndarray, N: int) -> float:
    """Sum over |alpha| = N of prod_i factors[alpha_i, i] via truncated convolutions."""
    acc = factors[:, 0]
    for i in range(1, factors.shape[1]):
        acc = np.convolve(acc, factors[:, i])[: N + 1]
    return float(acc[N])


def projection_kernel(params: SemiclassicalParams, x, y) -> float:
    """Eigenspace projection kernel sum_{|alpha|=N} phi_alpha(x) phi_alpha(y)."""
    if params.d > 3 or params.dim > MAX_DIRECT_DIM:
        raise CapacityError(
            "direct Hermite sum is limited to d <= 3 and dimension <= 1e6; "
            "use projection_via_mehler instead"
        )
    px = hermite_tables(params, x)
    py = hermite_tables(params, y)
    return _degree_sum(px * py, params.N)


# ---------------------------------------------------------------------------
# Mehler propagator


def _mehler_parts(params: SemiclassicalParams, t, x, y):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    h = params.hbar
    st = np.sin(t)
    cot = np.cos(t) / st
    phase = (1j / h) * (0.5 * (x @ x + y @ y) * cot - (x @ y) / st)
    w = 1j * st  # (2 pi i hbar sin t) = 2 pi hbar * w
    return w, phase


def _principal_log_w(t):
    """log(i sin t) on the branch continuous from t = -i*infinity, |Re t| < pi."""
    t = np.asarray(t, dtype=complex)
    w = 1j * np.sin(t)
    lw = np.log(w)
    # each crossing of Re t = +-pi (mod 2 pi) adds a full turn
    turns = np.round(t.real / (2 * math.pi))
    return lw + 2j * math.pi * turns


def mehler_propagator(params: SemiclassicalParams, t: complex, x, y) -> complex:
    """Schwartz kernel of exp(-i t H / hbar) for Im t < 0."""
    t = complex(t)
    if t.imag >= 0:
        raise DomainError("the Mehler kernel is evaluated only for Im t < 0")
    w, phase = _mehler_parts(params, t, x, y)
    lw = complex(_principal_log_w(t))
    d = params.d
    return complex(np.exp(-0.5 * d * (math.log(2 * math.pi * params.hbar) + lw) + phase))


def mehler_along_path(params: SemiclassicalParams, path, x, y) -> np.ndarray:
    """Mehler kernel along a polygonal ``path`` in the lower half plane.

    The branch of (i sin t)^{-d/2} is fixed at ``path[0]`` and then continued
    by accumulating the phase increment between consecutive samples, so the
    path must be sampled finely enough that each increment is below pi.
    """
    path = np.asarray(path, dtype=complex)
    if np.any(path.imag >= 0):
        raise DomainError("path must stay in Im t < 0")
    w, phase = _mehler_parts(params, path, x, y)
    arg = np.unwrap(np.angle(w))
    arg += (np.imag(_principal_log_w(path[0])) - arg[0])
    lw = np.log(np.abs(w)) + 1j * arg
    d = params.d
    return np.exp(-0.5 * d * (math.log(2 * math.pi * params.hbar) + lw) + phase)


def projection_via_mehler(
    params: SemiclassicalParams,
    x,
    y,
    eps: float | None = None,
    nodes: int | None = None,
    tol: float = 1e-10,
) -> float:
    """Eigenspace kernel as the Fourier coefficient of the Mehler propagator.

    Computes (1/2 pi) int_{-pi}^{pi} U(t - i eps, x, y) exp(i (t - i eps) E / hbar) dt.
    The integrand is 2 pi periodic, so the trapezoidal rule is spectrally
    accurate: with M nodes it returns the exact coefficient plus aliased
    levels N + jM (j >= 1), each damped by exp(-eps j M). The node count is
    doubled until two successive values agree to ``tol``.
    """
    eps = params.hbar if eps is None else float(eps)
    if not (0 < eps <= 1):
        raise DomainError("eps must lie in (0, 1]")
    n = nodes or int(2 ** math.ceil(math.log2(max(64, 2 * params.N + 32, 40.0 / eps))))

    def trap(m):
        a = -math.pi + 2 * math.pi * np.arange(m) / m
        centre = m // 2  # a = 0, where the principal branch is correct
        t = a - 1j * eps
        w, phase = _mehler_parts(params, t, x, y)
        ang = np.angle(w)
        arg = np.empty(m)
        arg[centre:] = np.unwrap(ang[centre:])
        arg[: centre + 1] = np.unwrap(ang[centre::-1])[::-1]
        lw = np.log(np.abs(w)) + 1j * arg
        k = params.N + 0.5 * params.d  # E / hbar
        vals = np.exp(-0.5 * params.d * (math.log(2 * math.pi * params.hbar) + lw) + phase + 1j * k * t)
        return vals.mean()

    prev = trap(n)
    for _ in range(6):
        n *= 2
        cur = trap(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            if abs(cur.imag) > 1e-6 * max(1.0, abs(cur.real)):
                raise NumericalError("Mehler coefficient is not real", {"value": cur})
            return float(cur.real)
        prev = cur
    raise NumericalError("Mehler trapezoid did not converge", {"nodes": n, "change": abs(cur - prev)})


# ---------------------------------------------------------------------------
# caustic scaling limits


def airy_kernel(a: float, b: float) -> float:
    """int_0^inf Ai(a + t) Ai(b + t) dt in closed form."""
    if abs(a - b) < 1e-8:
        m = 0.5 * (a + b)
        return float(airy_ai_prime(m) ** 2 - m * airy_ai(m) ** 2)
    return float((airy_ai(a) * airy_ai_prime(b) - airy_ai_prime(a) * airy_ai(b)) / (a - b))


def _p_cutoff(c: float, level: float = 1e-12) -> float:
    """Radius past which Ai(2^{1/3}(c + p^2/2)) stays below ``level``."""
    p = 0.0
    while airy_ai(2 ** (1 / 3) * (c + 0.5 * p * p)) >= level or c + 0.5 * p * p < 0:
        p += 0.25
    return p


def caustic_limit_kernel(d: int, u, v, frame: CausticFrame | None = None) -> float:
    """Scaling limit of the projection kernel at a caustic point (E = 1/2).

    For d >= 2 the (d-1)-dimensional Fourier integral over p is reduced to a
    radial Hankel integral, truncated where the Airy factors fall below 1e-12.
    """
    frame = frame or CausticFrame.standard(d)
    u1, up = frame.split(u)
    v1, vp = frame.split(v)
    c = 2 ** (1 / 3)
    if d == 1:
        return float(2 ** (2 / 3) * airy_ai(c * u1) * airy_ai(c * v1))
    n = d - 1
    w = float(np.linalg.norm(up - vp))
    pmax = _p_cutoff(min(u1, v1))

    def g(rho):
        return airy_ai(c * (u1 + 0.5 * rho**2)) * airy_ai(c * (v1 + 0.5 * rho**2))

    if w < 1e-14:
        sphere = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
        radial = gauss_legendre(lambda r: r ** (n - 1) * g(r), 0.0, pmax, tol=1e-13)
        integral = sphere * radial
    else:
        radial = gauss_legendre(
            lambda r: sc.jv(n / 2 - 1, w * r) * r ** (n / 2) * g(r), 0.0, pmax, tol=1e-13, panels=16
        )
        integral = (2 * math.pi) ** (n / 2) * w ** (1 - n / 2) * radial
    return float(2 ** (2 / 3) * (2 * math.pi) ** (-d + 1) * integral)


def caustic_diagonal(d: int, s: float) -> float:
    """Diagonal caustic profile 2^{1-d} pi^{-d/2} Ai_{-d/2}(s).

    Multiply by :func:`caustic_diagonal_prefactor` to compare with a kernel
    value at |x|^2 = 1 + hbar^{2/3} s.
    """
    if abs(s) > 8:
        raise DomainError("|s| must be at most 8")
    return 2.0 ** (1 - d) * math.pi ** (-0.5 * d) * airy_weighted(-0.5 * d, s)


def caustic_diagonal_prefactor(hbar: float, d: int) -> float:
    return hbar ** ((1 - 2 * d) / 3)
