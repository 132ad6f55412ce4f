"""S^1-symmetric partial Bergman kernels on CP^1.

Model: line bundle O(k) with the Fubini-Study metric, Kahler form
omega = 2 dx dy / (1 + |z|^2)^2 (total volume 2 pi) and moment map
H = |z|^2 / (1 + |z|^2). Monomials z^j, j = 0..k, are exact eigensections
of the Toeplitz quantisation of H with eigenvalue j/k.

In the chart s = |z|^2/(1+|z|^2) every radial integral becomes a Beta
integral, which is how the quadrature cross-checks are set up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr

from ..errors import DomainError, NumericalError
from ..windows import FourierWindow
from .metaplectic import SpcBlock, metaplectic_kernel

__all__ = [
    "QuadratureSpec",
    "MonomialModel",
    "cp1_model_build",
    "moment_map",
    "grad_H_norm",
    "grad_H_norm_numeric",
    "level_point",
    "section_log_densities",
    "full_density",
    "pbk_density",
    "pbk_interface_profile",
    "pbk_smoothed_level",
    "smoothed_level_limit",
    "critical_scaling",
    "rotation_U",
    "scaled_propagator_trace",
    "trace_relative_error",
]

RETURN_TIME = 2 * math.pi


@dataclass(frozen=True)
class QuadratureSpec:
    panels: int = 64
    order: int = 16
    width_sd: float = 40.0
    full_check_max_k: int = 2000
    sampled_levels: int = 257
    tol: float = 1e-9


@dataclass(frozen=True)
class MonomialModel:
    """Norms and Toeplitz eigenvalues of the monomial basis of H^0(CP^1, O(k)).

    ``log_norms`` holds log ||z^j||^2; ``norms`` exponentiates them and can
    underflow for large k. ``max_norm_error`` and ``max_eig_error`` record the
    quadrature cross-checks made at build time.
    """

    k: int
    log_norms: np.ndarray
    eigenvalues: np.ndarray
    quadrature_spec: QuadratureSpec = field(default_factory=QuadratureSpec)
    max_norm_error: float = 0.0
    max_eig_error: float = 0.0
    checked_levels: np.ndarray | None = field(default=None, repr=False)

    @property
    def norms(self) -> np.ndarray:
        return np.exp(self.log_norms)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.k + 1)


def moment_map(z) -> np.ndarray:
    r2 = np.abs(np.asarray(z, dtype=complex)) ** 2
    return r2 / (1.0 + r2)


def grad_H_norm(z) -> np.ndarray:
    """|grad H| in the Fubini-Study metric: sqrt(2 H (1 - H))."""
    H = moment_map(z)
    return np.sqrt(2 * H * (1 - H))


def grad_H_norm_numeric(z, step: float = 1e-5) -> float:
    """|dH/dsigma| along the radial geodesic, with dsigma = sqrt2 dr / (1 + r^2)."""
    r = abs(complex(z))
    hi, lo = r + step, max(r - step, 0.0)
    dH = (hi * hi / (1 + hi * hi)) - (lo * lo / (1 + lo * lo))
    dsig = math.sqrt(2) * (math.atan(hi) - math.atan(lo))
    return abs(dH / dsig)


def level_point(E: float, phase: float = 0.0) -> complex:
    """The point r e^{i phase} on the level set H = E."""
    if not 0 < E < 1:
        raise DomainError("E must be a regular value in (0, 1)")
    return math.sqrt(E / (1 - E)) * complex(math.cos(phase), math.sin(phase))


# ---------------------------------------------------------------------------
# model construction


def _beta_log_norms(k: int, j: np.ndarray) -> np.ndarray:
    return math.log(2 * math.pi) + gammaln(j + 1) + gammaln(k - j + 1) - gammaln(k + 2)


def _radial_moments(k: int, j: np.ndarray, spec: QuadratureSpec):
    """Quadrature of s^j (1-s)^{k-j} times {1, H, connection} over [0, 1] (H = s).

    Returns (log of the integral of the weight, <H>, <connection>).
    """
    x, w = np.polynomial.legendre.leggauss(spec.order)
    jf = j.astype(float)
    centre = jf / k
    sd = np.sqrt((jf + 1) * (k - jf + 1)) / (k + 2) ** 1.5
    a = np.clip(centre - spec.width_sd * sd, 0.0, 1.0)
    b = np.clip(centre + spec.width_sd * sd, 0.0, 1.0)
    edges = a[:, None] + (b - a)[:, None] * np.linspace(0, 1, spec.panels + 1)[None, :]
    half = 0.5 * np.diff(edges, axis=1)
    mid = 0.5 * (edges[:, 1:] + edges[:, :-1])
    s = (mid[:, :, None] + half[:, :, None] * x[None, None, :]).reshape(len(j), -1)
    ws = (half[:, :, None] * w[None, None, :]).reshape(len(j), -1)
    with np.errstate(divide="ignore"):
        logf = jf[:, None] * np.log(s) + (k - jf)[:, None] * np.log1p(-s)
    peak = np.max(logf, axis=1, keepdims=True)
    f = np.exp(logf - peak) * ws
    mass = f.sum(axis=1)
    H_mean = (f * s).sum(axis=1) / mass
    # (i/k) nabla_{xi_H} s_j = (j/k - H) s_j for the Chern connection of O(k)
    conn = (f * (centre[:, None] - s)).sum(axis=1) / mass
    return math.log(2 * math.pi) + peak[:, 0] + np.log(mass), H_mean, conn


def cp1_model_build(k: int, spec: QuadratureSpec | None = None) -> MonomialModel:
    """Build the monomial model for degree ``k`` and cross-check it by radial quadrature.

    Every level is checked when k <= ``spec.full_check_max_k``; otherwise an evenly
    spaced sample that always includes both ends and the middle level.
    """
    spec = spec or QuadratureSpec()
    if int(k) != k or not 1 <= k <= 10**5:
        raise DomainError("k must be an integer in [1, 1e5]")
    k = int(k)
    j_all = np.arange(k + 1)
    log_norms = _beta_log_norms(k, j_all)
    if k <= spec.full_check_max_k:
        check = j_all
    else:
        check = np.unique(np.concatenate([np.linspace(0, k, spec.sampled_levels).round().astype(int), [k // 2]]))
    norm_err = 0.0
    eig_err = 0.0
    for lo in range(0, len(check), 1024):
        jj = check[lo : lo + 1024]
        ln_q, H_mean, conn = _radial_moments(k, jj, spec)
        norm_err = max(norm_err, float(np.max(np.abs(np.expm1(ln_q - log_norms[jj])))))
        eig_err = max(eig_err, float(np.max(np.abs(H_mean + conn - jj / k))))
    if norm_err > spec.tol:
        raise NumericalError("norm quadrature disagrees with the Beta closed form", {"max_rel_error": norm_err})
    if eig_err > spec.tol:
        raise NumericalError("Toeplitz eigenvalue quadrature disagrees with j/k", {"max_error": eig_err})
    return MonomialModel(k, log_norms, j_all / k, spec, norm_err, eig_err, check)


# ---------------------------------------------------------------------------
# densities


def section_log_densities(model: MonomialModel, z) -> np.ndarray:
    """log ||s_j(z)||^2 for the normalised monomials (-inf where a section vanishes)."""
    k = model.k
    r2 = abs(complex(z)) ** 2
    j = model.levels.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.where(j > 0, j * math.log(r2), 0.0) if r2 > 0 else np.where(j == 0, 0.0, -np.inf)
    return lz - k * math.log1p(r2) - model.log_norms


def full_density(model: MonomialModel, z) -> float:
    return float(np.exp(logsumexp(section_log_densities(model, z))))


def pbk_density(model: MonomialModel, E: float, z) -> float:
    """sum_{mu_j < E} ||s_j(z)||^2 / sum_j ||s_j(z)||^2."""
    if not 0 < E < 1:
        raise DomainError("E must be a regular value in (0, 1)")
    ld = section_log_densities(model, z)
    mask = model.eigenvalues < E
    if not mask.any():
        return 0.0
    return float(np.exp(logsumexp(ld[mask]) - logsumexp(ld)))


def _on_level(E: float, z) -> complex:
    z = level_point(E) if z is None else complex(z)
    if abs(float(moment_map(z)) - E) > 1e-8:
        raise DomainError("base point is not on the level set H = E")
    return z


def pbk_interface_profile(model: MonomialModel, E: float, t_or_beta: float, mode: str = "geodesic", z=None):
    """Partial density near the level set H = E and its Gaussian-CDF limit.

    geodesic: density at distance t/sqrt(k) along the normal geodesic into {H < E}; limit Phi(sqrt2 t).
    gradient_flow: density at exp(beta/sqrt k) z (the gradient flow of H); limit Phi(-sqrt2 beta |grad H|).
    spectral_cdf: sum over mu_j < E + alpha/sqrt k at z; limit (k/2pi) Phi(sqrt2 alpha/|grad H|).
    """
    z = _on_level(E, z)
    k = model.k
    s = float(t_or_beta)
    g = float(grad_H_norm(z))
    if mode == "geodesic":
        r = math.tan(math.atan(abs(z)) - s / math.sqrt(2 * k))
        if r <= 0:
            raise DomainError("geodesic step leaves the chart")
        zt = r * z / abs(z)
        return pbk_density(model, E, zt), float(ndtr(math.sqrt(2) * s))
    if mode == "gradient_flow":
        zt = math.exp(s / math.sqrt(k)) * z
        return pbk_density(model, E, zt), float(ndtr(-math.sqrt(2) * s * g))
    if mode == "spectral_cdf":
        ld = section_log_densities(model, z)
        mask = model.eigenvalues < E + s / math.sqrt(k)
        value = float(np.exp(logsumexp(ld[mask]))) if mask.any() else 0.0
        return value, k / (2 * math.pi) * float(ndtr(math.sqrt(2) * s / g))
    raise DomainError(f"unknown mode {mode!r}")


def _sum_against(model: MonomialModel, z, args_fn, f: FourierWindow, rel_cut: float = 1e-18) -> float:
    ld = section_log_densities(model, z)
    keep = ld >= ld.max() + math.log(rel_cut)
    vals = f(args_fn(model.eigenvalues[keep]))
    return float(np.real(np.sum(np.exp(ld[keep]) * vals)))


def smoothed_level_limit(k: int, E: float, alpha: float) -> float:
    xi2 = 2 * E * (1 - E)
    xi = math.sqrt(xi2)
    return math.sqrt(k / (2 * math.pi)) * math.exp(-alpha * alpha / xi2) * math.sqrt(2) / (2 * math.pi * xi)


def pbk_smoothed_level(model: MonomialModel, E: float, f: FourierWindow, alpha: float, z=None):
    """sum_j ||s_j(z)||^2 f(k(mu_j - E) + sqrt(k) alpha) at z on H = E, with its Gaussian limit.

    The flow of H returns to z after time 2 pi, so f_hat must be supported inside it.
    """
    if f.support >= RETURN_TIME:
        raise DomainError("f_hat support reaches the first return time 2 pi")
    z = _on_level(E, z)
    k = model.k
    value = _sum_against(model, z, lambda mu: k * (mu - E) + math.sqrt(k) * alpha, f)
    return value, smoothed_level_limit(k, E, alpha)


def rotation_U(t: float, u: complex, half_form: bool = True) -> complex:
    """Diagonal metaplectic factor of the rotation block P = exp(i t) at u (k = 1, weight removed).

    Equals exp(-i t/2) exp(|u|^2 (exp(-i t) - 1)) with the half form, and the
    second factor alone without it.
    """
    blk = SpcBlock.rotation(t)
    val = 2 * math.pi * metaplectic_kernel(1.0, blk, [u], [u]) * math.exp(-abs(u) ** 2)
    return val if half_form else val * blk.sqrt_det()


def _hessian_form(z0: complex, u: complex, chart_H, step: float = 1e-4) -> float:
    """Half the Hessian quadratic form of ``chart_H`` at ``z0`` applied to u, by central differences."""
    def h(a, b):
        return chart_H(z0 + a + 1j * b)

    e = step
    hxx = (h(e, 0) - 2 * h(0, 0) + h(-e, 0)) / e**2
    hyy = (h(0, e) - 2 * h(0, 0) + h(0, -e)) / e**2
    hxy = (h(e, e) - h(e, -e) - h(-e, e) + h(-e, -e)) / (4 * e * e)
    x, y = u.real, u.imag
    return 0.5 * (hxx * x * x + 2 * hxy * x * y + hyy * y * y)


def critical_scaling(model: MonomialModel, f: FourierWindow, u, mode: str = "quarter", half_form: bool = False):
    """Scaling of the smoothed partial density at the critical point z = 0 (H = 0).

    quarter: sum_j ||s_j(k^{-1/4} u)||^2 f(sqrt(k) mu_j) against (k/2pi) f(H_2(u)).
    half: sum_j ||s_j(k^{-1/2} u)||^2 f(k mu_j) against (k/2pi)(1/2pi) int f_hat(t) U(-t, u) dt,
    where U is :func:`rotation_U`; ``half_form`` keeps the (det P)^{-1/2} factor.
    """
    u = complex(u)
    k = model.k
    if mode == "quarter":
        z = k**-0.25 * u
        value = _sum_against(model, z, lambda mu: math.sqrt(k) * mu, f)
        H2 = _hessian_form(0.0, u, lambda w: float(moment_map(w)))
        limit = k / (2 * math.pi) * float(np.real(f(np.array([H2]))[0]))
        return value, limit
    if mode == "half":
        z = k**-0.5 * u
        value = _sum_against(model, z, lambda mu: k * mu, f)
        t, w = np.polynomial.legendre.leggauss(512)
        t, w = f.support * t, f.support * w
        U = np.array([rotation_U(-ti, u, half_form) for ti in t])
        integral = np.sum(np.asarray(f.fhat(t)) * U * w) / (2 * math.pi)
        return value, k / (2 * math.pi) * complex(integral)
    raise DomainError(f"unknown mode {mode!r}")


def _critical_points():
    """(H value, chart moment map, omega density at the chart origin) at the two fixed points."""
    near = (0.0, lambda w: float(moment_map(w)), 2.0)
    far = (1.0, lambda w: 1.0 / (1.0 + abs(w) ** 2), 2.0)
    return near, far


def scaled_propagator_trace(model: MonomialModel, t: float):
    """Trace of exp(i sqrt(k) t T_H) and its two-point stationary-phase approximation.

    The approximation is sum_p (k/2pi) rho_p (2pi/(sqrt(k)|t|)) |det Hess_p|^{-1/2}
    exp(i pi sgn(t Hess_p)/4) exp(i sqrt(k) t H(p)), with Hessians from finite differences.
    """
    if t == 0 or abs(t) > 1:
        raise DomainError("need 0 < |t| <= 1")
    k = model.k
    lam = math.sqrt(k) * t
    trace = complex(np.sum(np.exp(1j * lam * model.eigenvalues)))
    sp = 0.0j
    for Hp, chart, rho in _critical_points():
        e = 1e-4
        hxx = (chart(e) - 2 * chart(0) + chart(-e)) / e**2
        hyy = (chart(1j * e) - 2 * chart(0) + chart(-1j * e)) / e**2
        hxy = (chart(e + 1j * e) - chart(e - 1j * e) - chart(-e + 1j * e) + chart(-e - 1j * e)) / (4 * e * e)
        hess = np.array([[hxx, hxy], [hxy, hyy]])
        det = float(np.linalg.det(hess))
        sgn = int(np.sum(np.sign(np.linalg.eigvalsh(t * hess))))
        sp += (
            k / (2 * math.pi) * rho * (2 * math.pi / abs(lam)) / math.sqrt(abs(det))
            * np.exp(1j * math.pi * sgn / 4) * np.exp(1j * lam * Hp)
        )
    return trace, complex(sp)


def trace_relative_error(model: MonomialModel, t: float) -> float:
    """|trace - stationary phase| divided by the amplitude 2 sqrt(k)/|t| of the approximation."""
    tr, sp = scaled_propagator_trace(model, t)
    return abs(tr - sp) / (2 * math.sqrt(model.k) / abs(t))
