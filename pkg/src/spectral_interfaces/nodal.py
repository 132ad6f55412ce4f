"""Kac-Rice nodal densities for random oscillator eigenfunctions, with a Monte-Carlo check.

The random field is Phi_N = sum_{|alpha|=N} a_alpha phi_alpha with i.i.d.
standard normal coefficients, so its covariance kernel is the eigenspace
projection Pi(x, y).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, special

from .errors import CapacityError, DomainError, NumericalError
from .oscillator import CausticFrame, SemiclassicalParams, _degree_sum
from .specfn import airy_weighted, hermite_functions


class ResolutionError(NumericalError):
    """Grid refinement moved a Monte-Carlo estimate by more than three standard errors."""


# ---------------------------------------------------------------------------
# Kac-Rice matrix


def _value_and_derivative(params: SemiclassicalParams, x: np.ndarray):
    """phi_n(x_i) and d/dx phi_n(x_i) for n = 0..N, each shape (N+1, d)."""
    h, N = params.hbar, params.N
    y = x / math.sqrt(h)
    psi = hermite_functions(N + 1, y)  # (N+2, d)
    n = np.arange(N + 1)[:, None]
    lower = np.vstack([np.zeros((1, x.size)), psi[: N]])
    dpsi = np.sqrt(n / 2) * lower - np.sqrt((n + 1) / 2) * psi[1 : N + 2]
    scale = h**-0.25
    return psi[: N + 1] * scale, dpsi * scale / math.sqrt(h)


def kacrice_matrix(params: SemiclassicalParams, x) -> np.ndarray:
    """Omega_ij = d_{x_i} d_{y_j} log Pi(x, y) at y = x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d, N = params.d, params.N
    if x.size != d:
        raise DomainError(f"point has dimension {x.size}, expected {d}")
    if d > 3:
        raise CapacityError("analytic Kac-Rice matrix is implemented for d <= 3")
    phi, dphi = _value_and_derivative(params, x)
    sq, mixed, dsq = phi * phi, phi * dphi, dphi * dphi

    def total(cols):
        f = sq.copy()
        for i, tab in cols.items():
            f[:, i] = tab[:, i]
        return _degree_sum(f, N)

    P = total({})
    if not P > 1e-300:
        raise NumericalError("Pi(x, x) underflows; point is too deep in the forbidden region", {"Pi": P})
    grad = np.array([total({i: mixed}) for i in range(d)])
    hess = np.empty((d, d))
    for i in range(d):
        hess[i, i] = total({i: dsq})
        for j in range(i + 1, d):
            hess[i, j] = hess[j, i] = total({i: mixed, j: mixed})
    g = grad / P
    return hess / P - np.outer(g, g)


def _angular_mean_sqrt(lam: np.ndarray) -> float:
    """(1/2pi) int_0^{2pi} sqrt(l1 cos^2 + l2 sin^2) dtheta for 0 <= l1 <= l2."""
    l1, l2 = float(min(lam)), float(max(lam))
    if l2 == 0.0:
        return 0.0
    return 2 / math.pi * math.sqrt(l2) * special.ellipe(1.0 - l1 / l2)


def density_from_omega(omega: np.ndarray, tol: float = -1e-10) -> float:
    """(2 pi)^{-(d+1)/2} int |Omega^{1/2} xi| exp(-|xi|^2/2) dxi, using the eigenvalues of Omega."""
    omega = np.atleast_2d(omega)
    lam = np.linalg.eigvalsh(omega)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if lam.min() < tol * scale:
        raise NumericalError("Kac-Rice matrix is not positive semi-definite", {"eigenvalues": lam.tolist()})
    lam = np.clip(lam, 0.0, None)
    d = lam.size
    if d == 1:
        return math.sqrt(lam[0]) / math.pi
    if d == 2:
        # radial factor int_0^inf r^2 e^{-r^2/2} dr = sqrt(pi/2)
        return (2 * math.pi) ** -1.5 * math.sqrt(math.pi / 2) * 2 * math.pi * _angular_mean_sqrt(lam)
    return density_gauss_hermite(omega)


def density_gauss_hermite(omega: np.ndarray, order: int = 40) -> float:
    """Tensor Gauss-Hermite evaluation of the Kac-Rice integral (cross-check, any d <= 3)."""
    omega = np.atleast_2d(omega)
    lam = np.clip(np.linalg.eigvalsh(omega), 0.0, None)
    t, w = np.polynomial.hermite_e.hermegauss(order)  # weight exp(-t^2/2)
    d = lam.size
    grids = np.meshgrid(*([t] * d), indexing="ij")
    weights = np.ones_like(grids[0])
    for g, wi in zip(grids, np.meshgrid(*([w] * d), indexing="ij")):
        weights = weights * wi
    norm = np.sqrt(sum(l * g * g for l, g in zip(lam, grids)))
    return float((2 * math.pi) ** (-(d + 1) / 2) * np.sum(weights * norm))


def kacrice_density(params: SemiclassicalParams, x) -> float:
    """Expected nodal (d-1)-volume per unit volume at ``x``."""
    return density_from_omega(kacrice_matrix(params, x))


def allowed_density_asymptotic(params: SemiclassicalParams, r: float) -> float:
    d, h = params.d, params.hbar
    c = math.gamma((d + 1) / 2) / (math.sqrt(d * math.pi) * math.gamma(d / 2))
    return c * math.sqrt(2 * params.E - r * r) / h


def forbidden_density_asymptotic(params: SemiclassicalParams, r: float) -> float:
    """Leading forbidden-region density.

    Only the d - 1 tangential eigenvalues E / (hbar r sqrt(r^2 - 2E)) of Omega
    grow, which fixes the constant at Gamma(d/2) / (sqrt(pi) Gamma((d-1)/2)).
    """
    d, h, E = params.d, params.hbar, params.E
    if d < 2:
        raise DomainError("no forbidden-region zeros in d = 1")
    C = math.gamma(d / 2) / (math.sqrt(math.pi) * math.gamma((d - 1) / 2))
    return C * math.sqrt(E) / (math.sqrt(r) * (r * r - 2 * E) ** 0.25) / math.sqrt(h)


# ---------------------------------------------------------------------------
# caustic scaling


def caustic_omega(d: int, u, frame: CausticFrame | None = None, guard: float = 1e-8) -> np.ndarray:
    """Scaled Kac-Rice matrix at a caustic point built from weighted Airy ratios, s = 2<u, x0>."""
    frame = frame or CausticFrame.standard(d)
    u = np.asarray(u, dtype=float)
    if np.linalg.norm(u) > 5:
        raise DomainError("|u| must be at most 5")
    s = 2.0 * float(frame.x0 @ u)
    k = -0.5 * d
    a0 = airy_weighted(k, s)
    if abs(a0) < guard:
        raise NumericalError("Ai_{-d/2}(s) is too close to zero", {"s": s, "Ai_{-d/2}": a0})
    a1, a2, am1 = airy_weighted(k + 1, s), airy_weighted(k + 2, s), airy_weighted(k - 1, s)
    x0 = frame.x0
    return np.outer(x0, x0) * (a2 / a0 - (a1 / a0) ** 2) + 0.5 * np.eye(d) * am1 / a0


def caustic_scaled_density(d: int, u, frame: CausticFrame | None = None) -> float:
    return density_from_omega(caustic_omega(d, u, frame))


def finite_caustic_density(params: SemiclassicalParams, u, frame: CausticFrame | None = None) -> float:
    """hbar^{2/3} times the finite-N Kac-Rice density at x0 + hbar^{2/3} u (E = 1/2)."""
    if abs(params.E - 0.5) > 1e-12:
        raise DomainError("caustic scaling is normalised for E = 1/2")
    frame = frame or CausticFrame.standard(params.d)
    h = params.hbar
    x = frame.x0 + h ** (2 / 3) * np.asarray(u, dtype=float)
    return h ** (2 / 3) * kacrice_density(params, x)


# ---------------------------------------------------------------------------
# Monte-Carlo nodal length (d = 2)


@dataclass(frozen=True)
class RandomEnsembleSpec:
    params: SemiclassicalParams
    seed: int
    trials: int

    def __post_init__(self):
        if self.params.d != 2:
            raise DomainError("Monte-Carlo nodal estimates are implemented for d = 2")
        if self.trials < 1:
            raise DomainError("trials must be positive")
        if not (0 <= self.seed < 2**64):
            raise DomainError("seed must be an unsigned 64-bit integer")

    def coefficients(self, trial: int) -> np.ndarray:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, trial]))
        return rng.standard_normal(self.params.N + 1)


@dataclass(frozen=True)
class Annulus:
    r2_min: float
    r2_max: float

    def __post_init__(self):
        if not (0 <= self.r2_min < self.r2_max):
            raise DomainError("annulus needs 0 <= r2_min < r2_max")

    @property
    def area(self) -> float:
        return math.pi * (self.r2_max - self.r2_min)

    def contains(self, x, y):
        r2 = x * x + y * y
        return (r2 >= self.r2_min) & (r2 < self.r2_max)


@dataclass(frozen=True)
class NodalEstimate:
    mean_density: float
    std_error: float
    region: Annulus
    trials: int


def sample_field(params: SemiclassicalParams, coeffs: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Phi_N on the tensor grid, entry [i, j] = Phi(grid[j], grid[i])."""
    h, N = params.hbar, params.N
    tab = hermite_functions(N, grid / math.sqrt(h)) * h**-0.25  # (N+1, n)
    # alpha = (a, N - a): x uses index a, y uses index N - a
    return (tab[::-1].T * coeffs) @ tab


def marching_squares_segments(field: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Zero-level segments, shape (M, 2, 2) as [[x0, y0], [x1, y1]].

    Linear interpolation on cell edges. Saddle cells (alternating corner
    signs) are split using the sign of the cell-centre average.
    """
    f = field
    f00, f10 = f[:-1, :-1], f[:-1, 1:]  # rows are y, columns are x
    f01, f11 = f[1:, :-1], f[1:, 1:]
    xs, ys = grid[:-1], grid[:-1]
    dx = grid[1] - grid[0]
    X = np.broadcast_to(xs[None, :], f00.shape)
    Y = np.broadcast_to(ys[:, None], f00.shape)

    def cross(a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / (a - b)

    # edge crossing points: bottom (y), right (x + dx), top (y + dx), left (x)
    pts = {
        "b": (X + dx * cross(f00, f10), Y),
        "r": (X + dx, Y + dx * cross(f10, f11)),
        "t": (X + dx * cross(f01, f11), Y + dx),
        "l": (X, Y + dx * cross(f00, f01)),
    }
    has = {
        "b": (f00 > 0) != (f10 > 0),
        "r": (f10 > 0) != (f11 > 0),
        "t": (f01 > 0) != (f11 > 0),
        "l": (f00 > 0) != (f01 > 0),
    }
    count = has["b"].astype(int) + has["r"] + has["t"] + has["l"]
    out = []
    two = count == 2
    order = ["b", "r", "t", "l"]
    for i, e1 in enumerate(order):
        for e2 in order[i + 1 :]:
            m = two & has[e1] & has[e2]
            if m.any():
                out.append(_stack(pts, e1, e2, m))
    four = count == 4
    if four.any():
        centre = 0.25 * (f00 + f10 + f01 + f11)
        s00 = f00 > 0
        # corner 00 is isolated when the centre has the opposite sign
        iso = four & ((centre > 0) != s00)
        join = four & ~iso
        for e1, e2, m in (("b", "l", iso), ("r", "t", iso), ("b", "r", join), ("t", "l", join)):
            if m.any():
                out.append(_stack(pts, e1, e2, m))
    if not out:
        return np.zeros((0, 2, 2))
    return np.concatenate(out)


def _stack(pts, e1, e2, m):
    p = np.stack([pts[e1][0][m], pts[e1][1][m]], axis=-1)
    q = np.stack([pts[e2][0][m], pts[e2][1][m]], axis=-1)
    return np.stack([p, q], axis=1)


def nodal_length_in(segments: np.ndarray, region: Annulus) -> float:
    if segments.size == 0:
        return 0.0
    mid = segments.mean(axis=1)
    keep = region.contains(mid[:, 0], mid[:, 1])
    seg = segments[keep]
    return float(np.sum(np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)))


def _box_for(params: SemiclassicalParams, region: Annulus) -> float:
    return max(math.sqrt(region.r2_max) * 1.05, math.sqrt(2 * params.E) * 1.2)


def _trial_lengths(args):
    spec, trial, regions, half, grid_n = args
    grid = np.linspace(-half, half, grid_n)
    field = sample_field(spec.params, spec.coefficients(trial), grid)
    seg = marching_squares_segments(field, grid)
    return [nodal_length_in(seg, r) for r in regions]


def _run_trials(spec, regions, half, grid_n, trials, workers):
    tasks = [(spec, t, regions, half, grid_n) for t in trials]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_trial_lengths, tasks, chunksize=4))
    else:
        rows = [_trial_lengths(t) for t in tasks]
    return np.array(rows)  # ordered by trial index


def mc_nodal_volume(
    spec: RandomEnsembleSpec,
    region: Annulus,
    grid_n: int = 512,
    half_width: float | None = None,
    workers: int = 1,
    check_resolution: bool = True,
    check_trials: int = 8,
) -> NodalEstimate:
    """Monte-Carlo nodal length per unit area over ``region``.

    With ``check_resolution`` the first ``check_trials`` samples are repeated
    on a grid of twice the density; a shift above three standard errors of
    that subsample raises ResolutionError.
    """
    return mc_nodal_volumes(spec, [region], grid_n, half_width, workers, check_resolution, check_trials)[0]


def mc_nodal_volumes(
    spec: RandomEnsembleSpec,
    regions: list[Annulus],
    grid_n: int = 512,
    half_width: float | None = None,
    workers: int = 1,
    check_resolution: bool = True,
    check_trials: int = 8,
) -> list[NodalEstimate]:
    """Several regions from the same sampled fields."""
    if grid_n < 256:
        raise DomainError("grid_n must be at least 256")
    half = half_width or max(_box_for(spec.params, r) for r in regions)
    for r in regions:
        if r.r2_max > half * half:
            raise DomainError("region does not fit in the sampling box")
    rows = _run_trials(spec, regions, half, grid_n, range(spec.trials), workers)
    if check_resolution:
        m = min(check_trials, spec.trials)
        fine = _run_trials(spec, regions, half, 2 * grid_n, range(m), workers)
        diff = fine - rows[:m]
        for k, r in enumerate(regions):
            sd = rows[:m, k].std(ddof=1) / math.sqrt(m) if m > 1 else 0.0
            shift = abs(diff[:, k].mean())
            if shift > 3 * sd and shift > 1e-9 * max(1.0, abs(rows[:m, k].mean())):
                raise ResolutionError(
                    "grid refinement changed the nodal length estimate",
                    {"region": k, "shift": shift, "std_error": sd, "grid_n": grid_n},
                )
    out = []
    for k, r in enumerate(regions):
        dens = rows[:, k] / r.area
        se = dens.std(ddof=1) / math.sqrt(dens.size) if dens.size > 1 else 0.0
        out.append(NodalEstimate(float(dens.mean()), float(se), r, spec.trials))
    return out


def kacrice_annulus_average(params: SemiclassicalParams, region: Annulus, nodes: int = 24) -> float:
    """Area average of the (radial) Kac-Rice density over an annulus."""
    r_lo, r_hi = math.sqrt(region.r2_min), math.sqrt(region.r2_max)
    t, w = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * (r_hi - r_lo) * t + 0.5 * (r_hi + r_lo)
    vals = np.array([kacrice_density(params, [ri, 0.0]) for ri in r])
    integral = 0.5 * (r_hi - r_lo) * np.sum(w * vals * r) * 2 * math.pi
    return float(integral / region.area)


def forbidden_domain_violations(spec: RandomEnsembleSpec, trials: int, grid_n: int = 512, half_width: float | None = None) -> int:
    """Count sign domains lying entirely in the forbidden region and away from the box edge.

    Each would be a nodal component in the forbidden region that never meets
    the caustic.
    """
    p = spec.params
    half = half_width or 1.4 * math.sqrt(2 * p.E)
    grid = np.linspace(-half, half, grid_n)
    X, Y = np.meshgrid(grid, grid)
    forbidden = X * X + Y * Y > 2 * p.E
    bad = 0
    for t in range(trials):
        field = sample_field(p, spec.coefficients(t), grid)
        for sign in (field > 0, field < 0):
            lab, n = ndimage.label(sign)
            if n == 0:
                continue
            idx = np.arange(1, n + 1)
            inside_allowed = ndimage.maximum(~forbidden, lab, idx)
            edge = np.zeros_like(sign)
            edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True
            touches_edge = ndimage.maximum(edge, lab, idx)
            bad += int(np.sum((np.asarray(inside_allowed) == 0) & (np.asarray(touches_edge) == 0)))
    return bad
