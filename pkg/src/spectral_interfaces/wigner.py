"""Wigner distributions of oscillator eigenspace projections and their Weyl sums.

Every evaluation goes through the radial closed form
``W_N(H) = (-1)^N (pi hbar)^{-d} exp(-2H/hbar) L_N^{(d-1)}(4H/hbar)``.
Phase-space quadrature is used only in :func:`wigner_quadrature_oracle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import CapacityError, DomainError
from .oscillator import SemiclassicalParams, hermite_tables
from .specfn import (
    airy_ai,
    bessel_j,
    gauss_legendre,
    hermite_functions,
    laguerre_weighted,
    laguerre_weighted_log,
    laguerre_weighted_table,
)

AIRY_ARGMAX = -1.0187929716474710  # location of the global maximum of Ai


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.shape != xi.shape or x.ndim != 1:
            raise DomainError("x and xi must be vectors of equal length")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def d(self) -> int:
        return self.x.size

    @property
    def H(self) -> float:
        return 0.5 * float(self.x @ self.x + self.xi @ self.xi)

    @classmethod
    def at_energy(cls, H: float, d: int) -> "PhasePoint":
        """A point on the x_1 axis with classical energy ``H``."""
        if H < 0:
            raise DomainError("energy must be nonnegative")
        x = np.zeros(d)
        x[0] = math.sqrt(2 * H)
        return cls(x, np.zeros(d))


def _as_H(pt) -> float:
    return pt.H if isinstance(pt, PhasePoint) else float(pt)


# ---------------------------------------------------------------------------
# single eigenspace


def wigner_eigenspace(params: SemiclassicalParams, H_value):
    """Wigner distribution of the level-N projection as a function of H."""
    H = np.asarray(H_value, dtype=float)
    if np.any(H < 0):
        raise DomainError("H must be nonnegative")
    h, N, d = params.hbar, params.N, params.d
    val = (-1.0) ** N * (math.pi * h) ** (-d) * laguerre_weighted(N, d - 1, 4 * H / h)
    return float(val) if np.ndim(val) == 0 else val


def wigner_levels(nmax: int, d: int, hbar: float, H: float) -> np.ndarray:
    """W_{hbar, E_n}(H) for n = 0..nmax at fixed hbar (one Laguerre recurrence)."""
    if H < 0:
        raise DomainError("H must be nonnegative")
    L = laguerre_weighted_table(nmax, d - 1, 4 * H / hbar)
    sign = np.where(np.arange(nmax + 1) % 2 == 0, 1.0, -1.0)
    return sign * (math.pi * hbar) ** (-d) * L


ORACLE_MAX_N = 20


def wigner_quadrature_oracle(params: SemiclassicalParams, pt: PhasePoint, tol: float = 1e-11) -> float:
    """(2 pi hbar)^{-1} int Pi(x + v/2, x - v/2) exp(-i xi v / hbar) dv in d = 1.

    The integrand is built from Hermite functions; the v-range is cut where
    both arguments lie far beyond the turning point.
    """
    if params.d != 1 or params.N > ORACLE_MAX_N:
        raise CapacityError("quadrature oracle is limited to d = 1 and N <= 20")
    h, N = params.hbar, params.N
    x, xi = float(pt.x[0]), float(pt.xi[0])
    reach = math.sqrt(2 * params.E) + 12 * math.sqrt(h)
    vmax = 2 * (reach + abs(x))

    def integrand(v):
        a = (x + 0.5 * v) / math.sqrt(h)
        b = (x - 0.5 * v) / math.sqrt(h)
        pa = hermite_functions(N, a)[N]
        pb = hermite_functions(N, b)[N]
        return pa * pb * np.cos(xi * v / h) / math.sqrt(h)

    panels = max(8, int(4 * vmax * (1 + abs(xi)) / h) // 32 + 8)
    return gauss_legendre(integrand, -vmax, vmax, tol=tol, panels=panels) / (2 * math.pi * h)


def inverse_wigner_kernel(params: SemiclassicalParams, x: float, y: float, tol: float = 1e-11) -> float:
    """Recover Pi(x, y) from W by the inverse transform, d = 1.

    Pi(x, y) = int W((x+y)/2, xi) exp(i xi (x - y) / hbar) dxi.
    """
    if params.d != 1:
        raise DomainError("inverse transform implemented for d = 1")
    h = params.hbar
    m = 0.5 * (x + y)
    ximax = math.sqrt(max(0.0, 2 * params.E - m * m) + 60 * h) + 6 * math.sqrt(h)

    def integrand(xi):
        H = 0.5 * (m * m + xi * xi)
        return wigner_eigenspace(params, H) * np.cos(xi * (x - y) / h)

    panels = max(8, int(ximax / h))
    return gauss_legendre(integrand, -ximax, ximax, tol=tol, panels=panels)


# ---------------------------------------------------------------------------
# radial phase-space integrals


def radial_phase_integral(f: Callable, d: int, H_max: float, panels: int = 64, tol: float = 1e-10) -> float:
    """int_{T^*R^d} f(H) dx dxi = (2 pi)^d / Gamma(d) int_0^inf H^{d-1} f(H) dH, cut at ``H_max``."""
    const = (2 * math.pi) ** d / math.gamma(d)
    return const * gauss_legendre(lambda H: H ** (d - 1) * f(H), 0.0, H_max, tol=tol, panels=panels)


def _radial_cutoff(params: SemiclassicalParams) -> float:
    return 2 * params.E + 40 * params.hbar


def weak_star_average(a: Callable, params: SemiclassicalParams):
    """(lhs, rhs): normalised integral of a(H) W against the Liouville average a(E)."""
    lhs = radial_phase_integral(
        lambda H: a(H) * wigner_eigenspace(params, H),
        params.d,
        _radial_cutoff(params),
        panels=max(64, 4 * params.N),
    ) / params.dim
    return float(lhs), float(a(params.E))


def wigner_inner_product(p1: SemiclassicalParams, p2: SemiclassicalParams) -> float:
    """int W_N W_M dx dxi for two levels at a common hbar."""
    if p1.d != p2.d or abs(p1.hbar - p2.hbar) > 1e-14 * p1.hbar:
        raise DomainError("levels must share d and hbar")
    cut = max(_radial_cutoff(p1), _radial_cutoff(p2))
    return radial_phase_integral(
        lambda H: wigner_eigenspace(p1, H) * wigner_eigenspace(p2, H),
        p1.d,
        cut,
        panels=max(64, 4 * max(p1.N, p2.N)),
    )


def small_ball_integral(params: SemiclassicalParams, eps: float, a: Callable | None = None) -> float:
    """int a W psi over the ball of radius hbar^{1/2 - eps} with a smooth radial cut-off."""
    h = params.hbar
    r0 = h ** (0.5 - eps)

    def bump(r):
        # C-infinity transition from 1 at r0 to 0 at 2 r0
        s = np.clip((r - r0) / r0, 0.0, 1.0)
        g = lambda z: np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)
        return g(1 - s) / (g(1 - s) + g(s))

    a = a or (lambda H: np.ones_like(H))
    return radial_phase_integral(
        lambda H: a(H) * wigner_eigenspace(params, H) * bump(np.sqrt(2 * H)),
        params.d,
        2 * r0 * r0,
        panels=64,
    )


# ---------------------------------------------------------------------------
# pointwise regimes


def airy_interface_profile(params: SemiclassicalParams, u: float):
    """(scaled W, Ai(u/E)) at H = E + u (hbar/2E)^{2/3}."""
    h, E, d = params.hbar, params.E, params.d
    if abs(u) >= h ** (-1 / 3):
        raise DomainError("|u| must be below hbar^{-1/3}")
    c = (h / (2 * E)) ** (2 / 3)
    W = wigner_eigenspace(params, E + u * c)
    scaled = (2 * math.pi * h) ** d * (h / (2 * E)) ** (-1 / 3) * W / 2
    return float(scaled), float(airy_ai(u / E))


def bessel_A(t):
    """A(t) = (sqrt(t - t^2) + arcsin sqrt(t)) / 2 on [0, 1]."""
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("A(t) is defined here for t in [0, 1]")
    return 0.5 * (np.sqrt(t - t * t) + np.arcsin(np.sqrt(t)))


def bessel_alpha0(H_E: float, d: int) -> float:
    """Amplitude of the Bessel term matched to the large-argument cosine form."""
    A = float(bessel_A(H_E))
    return A ** (d - 0.5) / ((1 / H_E - 1) ** 0.25 * H_E ** (d / 2))


def interior_cosine(params: SemiclassicalParams, H):
    """(2 pi hbar)^{-d+1/2} P cos(phase) for H below E."""
    h, E, d = params.hbar, params.E, params.d
    H = np.asarray(H, dtype=float)
    t = H / E
    root = np.sqrt(1 / t - 1)
    phase = -math.pi / 4 - (2 * H / h) * root + (2 * E / h) * np.arccos(np.sqrt(t))
    P = 1.0 / (math.pi * math.sqrt(E) * np.sqrt(root) * t ** (d / 2))
    return (2 * math.pi * h) ** (-d + 0.5) * P * np.cos(phase)


def bessel_leading(params: SemiclassicalParams, H, alpha0: float | None = None):
    """(-1)^N 2 (2 pi hbar)^{-d} J_{d-1}(nu A) A^{1-d} alpha0 with nu = 4E/hbar."""
    h, E, d = params.hbar, params.E, params.d
    H = np.asarray(H, dtype=float)
    t = H / E
    A = bessel_A(t)
    a0 = bessel_alpha0(float(np.mean(t)), d) if alpha0 is None else alpha0
    nu = 4 * E / h
    sign = -1.0 if params.N % 2 else 1.0
    return sign * 2 * (2 * math.pi * h) ** (-d) * bessel_j(d - 1, nu * A) / A ** (d - 1) * a0


@dataclass(frozen=True)
class BesselReport:
    exact: float
    bessel_leading: float
    cosine_form: float


def bessel_interior(params: SemiclassicalParams, H_E: float, a: float = 0.1, alpha0: float | None = None) -> BesselReport:
    if not (a <= H_E <= 1 - a):
        raise DomainError(f"H_E must lie in [{a}, {1 - a}]")
    H = H_E * params.E
    return BesselReport(
        exact=wigner_eigenspace(params, H),
        bessel_leading=float(bessel_leading(params, H, alpha0)),
        cosine_form=float(interior_cosine(params, H)),
    )


def fit_bessel_alpha0(params: SemiclassicalParams, H_E: float, width: float = 3.0, samples: int = 41) -> float:
    """Least-squares amplitude of the Bessel term on an O(hbar) window around H_E."""
    h = params.hbar
    H = params.E * (H_E + width * h * np.linspace(-1, 1, samples))
    exact = wigner_eigenspace(params, H)
    shape = bessel_leading(params, H, alpha0=1.0)
    return float(shape @ exact / (shape @ shape))


def cosine_relative_error(params: SemiclassicalParams, H_E: float, width: float = 3.0, samples: int = 41) -> float:
    """max |W - cosine form| over an O(hbar) window, relative to the largest |W| there."""
    H = params.E * (H_E + width * params.hbar * np.linspace(-1, 1, samples))
    exact = wigner_eigenspace(params, H)
    return float(np.max(np.abs(exact - interior_cosine(params, H))) / np.max(np.abs(exact)))


def exterior_log_bound(params: SemiclassicalParams, H_E: float) -> float:
    """log of hbar^{-d+1/2} exp(-(2E/hbar)[sqrt(H_E^2 - H_E) - arccosh sqrt(H_E)]), without C_1."""
    h, E, d = params.hbar, params.E, params.d
    expo = math.sqrt(H_E * H_E - H_E) - math.acosh(math.sqrt(H_E))
    return (-d + 0.5) * math.log(h) - (2 * E / h) * expo


def exterior_bound(params: SemiclassicalParams, H_E: float) -> float:
    """hbar^{-d+1/2} exp(-(2E/hbar)[sqrt(H_E^2 - H_E) - arccosh sqrt(H_E)]) without C_1."""
    return math.exp(exterior_log_bound(params, H_E))


def wigner_log_abs(params: SemiclassicalParams, H: float) -> float:
    """log|W_N(H)|, usable where W itself underflows."""
    if H < 0:
        raise DomainError("H must be nonnegative")
    h, N, d = params.hbar, params.N, params.d
    _, lg = laguerre_weighted_log(N, d - 1, 4 * H / h)
    return -d * math.log(math.pi * h) + lg


@dataclass(frozen=True)
class ExteriorReport:
    """``ratio`` = |W| / bound is computed in logs, so it survives when both underflow."""

    value: float
    bound: float
    ratio: float
    margin: float


def exterior_decay_check(params: SemiclassicalParams, H_E: float, C1: float = 1.0) -> ExteriorReport:
    """|W| at H = H_E E against C1 times the exponential bound; margin >= 1 means it holds."""
    if not (1 < H_E <= 50):
        raise DomainError("H_E must lie in (1, 50]")
    log_v = wigner_log_abs(params, H_E * params.E)
    log_b = exterior_log_bound(params, H_E)
    ratio = math.exp(log_v - log_b)
    margin = C1 / ratio if ratio > 0 else math.inf
    return ExteriorReport(math.exp(log_v), math.exp(log_b), ratio, margin)


@dataclass(frozen=True)
class SpikeReport:
    origin_value: float
    off_origin_sup: float
    H_at_sup: float
    u_at_sup: float


def origin_spike_and_supbound(params: SemiclassicalParams, eps: float | None = None) -> SpikeReport:
    """Value at the origin and the supremum of |W| over H >= eps.

    ``u_at_sup`` is the interface coordinate (H - E)(2E/hbar)^{2/3}; the
    supremum is expected near u = E * AIRY_ARGMAX.
    """
    h, E, d, N = params.hbar, params.E, params.d, params.N
    eps = 0.25 * E if eps is None else eps
    origin = (-1.0) ** N * (math.pi * h) ** (-d) * math.comb(N + d - 1, d - 1)
    H = np.arange(eps, 1.5 * E, h / 16)
    absW = np.abs(wigner_eigenspace(params, H))
    i = int(np.argmax(absW))
    lo, hi = H[max(i - 1, 0)], H[min(i + 1, H.size - 1)]
    res = optimize.minimize_scalar(
        lambda s: -abs(wigner_eigenspace(params, s)), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12 * E},
    )
    Hs = float(res.x)
    sup = max(float(-res.fun), float(absW[i]))
    return SpikeReport(origin, sup, Hs, (Hs - E) * (2 * E / h) ** (2 / 3))


# ---------------------------------------------------------------------------
# Weyl sums


def _support_radius(f: Callable, tol: float = 1e-16, smax: float = 1e4) -> float:
    """Smallest sampled S with |f(s)| < tol * max|f| for all sampled |s| >= S."""
    s = np.concatenate([np.linspace(0, 10, 2001), np.geomspace(10, smax, 4001)[1:]])
    v = np.maximum(np.abs(f(s)), np.abs(f(-s)))
    big = np.nonzero(v >= tol * v.max())[0]
    if big.size == 0:
        return 0.0
    if big[-1] == s.size - 1:
        raise CapacityError("window weight does not decay within the sampled range")
    return float(s[big[-1] + 1])


KINDS = ("h_local", "h23_smooth", "h23_sharp", "bulk", "bulk_smooth")


@dataclass(frozen=True)
class WeylWindow:
    """Spectral window; ``f`` is the weight for the smooth kinds.

    h_local:     f((E - E_N)/hbar)
    h23_smooth:  f(hbar^{-2/3}(E - E_N))
    h23_sharp:   1 when lam_minus hbar^{2/3} <= E_N - E < lam_plus hbar^{2/3}
    bulk:        1 when E1 <= E_N <= E2
    bulk_smooth: f(E_N)
    """

    kind: str
    f: Callable | None = None
    lam_minus: float | None = None
    lam_plus: float | None = None
    E1: float | None = None
    E2: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown window kind {self.kind!r}")
        if self.kind in ("h_local", "h23_smooth", "bulk_smooth") and self.f is None:
            raise DomainError(f"{self.kind} window needs a weight function")
        if self.kind == "h23_sharp" and not (self.lam_minus < self.lam_plus):
            raise DomainError("sharp window needs lam_minus < lam_plus")
        if self.kind == "bulk" and not (0 <= self.E1 < self.E2):
            raise DomainError("bulk window needs 0 <= E1 < E2")

    def weights(self, n: np.ndarray, E: float, hbar: float, d: int) -> np.ndarray:
        EN = hbar * (n + 0.5 * d)
        if self.kind == "h_local":
            return self.f((E - EN) / hbar)
        if self.kind == "h23_smooth":
            return self.f(hbar ** (-2 / 3) * (E - EN))
        if self.kind == "h23_sharp":
            lo, hi = self.lam_minus * hbar ** (2 / 3), self.lam_plus * hbar ** (2 / 3)
            return ((EN - E >= lo) & (EN - E < hi)).astype(float)
        if self.kind == "bulk":
            # small slack keeps levels that sit exactly on an endpoint
            tol = 1e-12 * max(1.0, self.E2)
            return ((EN >= self.E1 - tol) & (EN <= self.E2 + tol)).astype(float)
        return self.f(EN)

    def level_range(self, E: float, hbar: float, d: int) -> int:
        """Largest level with a non-negligible weight."""
        if self.kind == "h_local":
            S = _support_radius(self.f)
            return int(math.ceil(E / hbar - 0.5 * d + S)) + 1
        if self.kind == "h23_smooth":
            S = _support_radius(self.f)
            return int(math.ceil((E + S * hbar ** (2 / 3)) / hbar - 0.5 * d)) + 1
        if self.kind == "h23_sharp":
            return int(math.ceil((E + self.lam_plus * hbar ** (2 / 3)) / hbar - 0.5 * d)) + 1
        if self.kind == "bulk":
            return int(math.floor(self.E2 / hbar - 0.5 * d + 1e-9))
        S = _support_radius(self.f)
        return int(math.ceil(S / hbar - 0.5 * d)) + 1


def weyl_sum(
    window: WeylWindow,
    pt,
    E: float,
    hbar: float,
    d: int,
    N_max: int | None = None,
    tail_tol: float = 1e-10,
) -> float:
    """sum_N weight(N) W_{hbar, E_N}(pt) for the given window.

    ``pt`` is a :class:`PhasePoint` or a value of H. With ``N_max`` omitted the
    sum runs to the last level with a non-negligible weight. A caller-supplied
    ``N_max`` that cuts off weights above ``tail_tol`` raises CapacityError.
    """
    H = _as_H(pt)
    need = max(window.level_range(E, hbar, d), 0)
    if N_max is None:
        N_max = need
    elif N_max < need:
        n_tail = np.arange(N_max + 1, need + 1)
        w_all = np.abs(window.weights(np.arange(need + 1), E, hbar, d))
        w_tail = np.abs(window.weights(n_tail, E, hbar, d))
        if w_tail.size and w_tail.max() > tail_tol * max(w_all.max(), 1e-300):
            raise CapacityError(
                f"N_max={N_max} truncates window weights up to {w_tail.max():.3g}; need N_max >= {need}"
            )
    if N_max > 10**7:
        raise CapacityError("window extends beyond 1e7 levels")
    n = np.arange(N_max + 1)
    return float(window.weights(n, E, hbar, d) @ wigner_levels(N_max, d, hbar, H))


def weyl_h_localized_formula(
    f_hat: Callable, support: float, E: float, hbar: float, d: int, pt
) -> float:
    """Stationary-phase evaluation of the hbar-localised Weyl sum for H < E.

    ``f_hat(t) = int f(s) exp(-i t s) ds`` must vanish for |t| >= ``support``.
    The critical times are t = +-t0 + 2 pi j with t0 = 2 arccos sqrt(H/E).
    """
    H = _as_H(pt)
    if not (0 < H < E):
        raise DomainError("formula applies for 0 < H < E")
    t_E = H / E
    root = math.sqrt(1 / t_E - 1)
    t0 = 2 * math.acos(math.sqrt(t_E))
    amp = (2 * math.pi * hbar) ** (-d) / (2 * math.pi) * t_E ** (-d / 2) * math.sqrt(2 * math.pi * hbar / (E * root))
    total = 0j
    jmax = int(support / (2 * math.pi)) + 2
    for sigma in (1, -1):
        for j in range(-jmax, jmax + 1):
            t = sigma * t0 + 2 * math.pi * j
            if abs(t) >= support:
                continue
            phase = E * t - 2 * H * sigma * root
            sign = -1.0 if (j * d) % 2 else 1.0
            total += complex(f_hat(t)) * sign * np.exp(1j * (phase / hbar - sigma * math.pi / 4))
    return float((amp * total).real)


def critical_times(E: float, H: float, support: float) -> list[float]:
    """Critical times +-t0 + 2 pi j inside (-support, support)."""
    t0 = 2 * math.acos(math.sqrt(H / E))
    jmax = int(support / (2 * math.pi)) + 2
    return sorted(
        s * t0 + 2 * math.pi * j for s in (1, -1) for j in range(-jmax, jmax + 1) if abs(s * t0 + 2 * math.pi * j) < support
    )


def interface_H(E: float, hbar: float, u: float) -> float:
    return E + u * (hbar / (2 * E)) ** (2 / 3)


def airy_integral(a: float, b: float) -> float:
    """int_a^b Ai(s) ds with b allowed to be +inf."""
    if b == math.inf:
        b = max(a, 0.0) + 40.0
    return gauss_legendre(airy_ai, a, b, tol=1e-13, panels=max(8, int(b - a) * 2))


def interface_smooth_profile(f: Callable, u: float, E: float, hbar: float, d: int):
    """((2 pi hbar)^d times the smooth hbar^{2/3} Weyl sum, int f(C_E lam) Ai(lam + u/E) dlam)."""
    C = (E / 4) ** (1 / 3)
    value = (2 * math.pi * hbar) ** d * weyl_sum(WeylWindow("h23_smooth", f=f), interface_H(E, hbar, u), E, hbar, d)
    S = _support_radius(f, tol=1e-15)
    lo = -S / C
    hi = max(S / C, 0.0)
    hi = min(hi, 40.0 - u / E)  # Ai is below 1e-50 past 40
    limit = gauss_legendre(lambda l: f(C * l) * airy_ai(l + u / E), lo, hi, tol=1e-12, panels=max(16, int(hi - lo)))
    return float(value), float(limit)


def interface_sharp_profile(lam_minus: float, lam_plus: float, u: float, E: float, hbar: float, d: int):
    """Sharp hbar^{2/3} window: (scaled sum, int of Ai(u/E + mu) over [-lam_plus/C_E, -lam_minus/C_E])."""
    C = (E / 4) ** (1 / 3)
    w = WeylWindow("h23_sharp", lam_minus=lam_minus, lam_plus=lam_plus)
    value = (2 * math.pi * hbar) ** d * weyl_sum(w, interface_H(E, hbar, u), E, hbar, d)
    limit = airy_integral(u / E - lam_plus / C, u / E - lam_minus / C)
    return float(value), float(limit)


def bulk_interface_profile(E: float, u: float, hbar: float, d: int):
    """((2 pi hbar)^d sum over E_N in [0, E] at the interface point, int_{u/E}^inf Ai)."""
    if abs(u) >= hbar ** (-2 / 3):
        raise DomainError("|u| must be below hbar^{-2/3}")
    w = WeylWindow("bulk", E1=0.0, E2=E)
    value = (2 * math.pi * hbar) ** d * weyl_sum(w, interface_H(E, hbar, u), E, hbar, d)
    return float(value), float(airy_integral(u / E, math.inf))


# ---------------------------------------------------------------------------
# empirical measures


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Signed atoms (location, weight); weights carry the (2 pi hbar)^d normalisation."""

    locations: np.ndarray
    weights: np.ndarray
    centering: tuple[float, float] | None = None
    _order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if loc.shape != w.shape:
            raise DomainError("locations and weights must match")
        loc.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_order", np.argsort(loc, kind="stable"))

    def cdf(self, tau: float) -> float:
        """Mass of (-inf, tau]."""
        return float(self.weights[self.locations <= tau].sum())

    def moment(self, k: int) -> float:
        return float(self.weights @ self.locations**k)

    def abel_mass(self, r: float) -> float:
        """sum_N r^N w_N, the Abel mean used for the (conditionally divergent) total mass."""
        if not (0 < r < 1):
            raise DomainError("r must lie in (0, 1)")
        n = np.arange(self.weights.size)
        return float(self.weights @ r**n)

    def abs_variation(self) -> float:
        return float(np.abs(self.weights).sum())


def empirical_measure(
    pt, hbar: float, d: int, N_max: int, centering: tuple[float, float] | None = None
) -> EmpiricalMeasure:
    """Atoms at E_N (or hbar^{-delta}(E - E_N) when ``centering=(E, delta)``), weights (2 pi hbar)^d W_N(pt)."""
    H = _as_H(pt)
    n = np.arange(N_max + 1)
    EN = hbar * (n + 0.5 * d)
    w = (2 * math.pi * hbar) ** d * wigner_levels(N_max, d, hbar, H)
    if centering is None:
        loc = EN
    else:
        E, delta = centering
        loc = hbar ** (-delta) * (E - EN)
    return EmpiricalMeasure(loc, w, centering)


def abel_mass_closed_form(H: float, hbar: float, d: int, r: float) -> float:
    """Closed form of the Abel mean: (2/(1+r))^d exp(-(2H/hbar)(1-r)/(1+r))."""
    return (2 / (1 + r)) ** d * math.exp(-(2 * H / hbar) * (1 - r) / (1 + r))
