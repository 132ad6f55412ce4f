"""Reproducible numerical experiments behind the command-line runner and the acceptance suite.

Each experiment takes a resolved configuration dict and returns an
:class:`ExperimentResult`: a table (columns and rows) plus named checks, each
tied to one acceptance criterion.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .errors import DomainError
from .holomorphic import (
    LiftedPoint,
    LineBundleBFModel,
    SpcBlock,
    bf_partial_density,
    bf_partial_density_limit,
    cp1_model_build,
    lifted_metaplectic_kernel,
    linebundle_bf_density,
    metaplectic_kernel,
    szasz_cdf_limit,
    toeplitz_metaplectic_quadrature,
)
from .holomorphic.cp1 import (
    critical_scaling,
    grad_H_norm,
    level_point,
    pbk_interface_profile,
    section_log_densities,
    trace_relative_error,
)
from .nodal import (
    Annulus,
    RandomEnsembleSpec,
    caustic_scaled_density,
    finite_caustic_density,
    forbidden_domain_violations,
    kacrice_annulus_average,
    mc_nodal_volumes,
)
from .oscillator import (
    SemiclassicalParams,
    caustic_diagonal,
    caustic_diagonal_prefactor,
    caustic_limit_kernel,
    projection_kernel,
)
from .rates import fit_gaussian_cdf, fit_rate
from .specfn import hermite_functions, laguerre_contour, laguerre_weighted, laguerre_weighted_table
from .wigner import (
    PhasePoint,
    WeylWindow,
    abel_mass_closed_form,
    airy_interface_profile,
    bulk_interface_profile,
    cosine_relative_error,
    empirical_measure,
    exterior_decay_check,
    interface_sharp_profile,
    interface_smooth_profile,
    radial_phase_integral,
    weyl_h_localized_formula,
    weyl_sum,
    wigner_eigenspace,
    wigner_inner_product,
    wigner_quadrature_oracle,
)
from .windows import FourierWindow

__all__ = ["Check", "ExperimentResult", "Experiment", "EXPERIMENTS", "resolve_config", "run_experiment"]


@dataclass(frozen=True)
class Check:
    criterion: str
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.criterion}] {self.name}: {self.detail}"


@dataclass
class ExperimentResult:
    name: str
    config: dict
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0
    workers: int = 1  # execution setting only; never part of the recorded config

    def check(self, criterion: str, name: str, passed: bool, detail: str):
        self.checks.append(Check(criterion, name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        by_crit: dict[str, bool] = {}
        for c in self.checks:
            by_crit[c.criterion] = by_crit.get(c.criterion, True) and c.passed
        return {
            "experiment": self.name,
            "passed": self.passed,
            "criteria": by_crit,
            "checks": [
                {"criterion": c.criterion, "name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }


@dataclass(frozen=True)
class Experiment:
    func: Callable
    defaults: dict
    criteria: tuple
    description: str
    columns: tuple


EXPERIMENTS: dict[str, Experiment] = {}


def _register(name, criteria, description, columns, **defaults):
    def deco(func):
        EXPERIMENTS[name] = Experiment(func, defaults, tuple(criteria), description, tuple(columns))
        return func

    return deco


def resolve_config(name: str, overrides: dict | None = None, seed: int | None = None) -> dict:
    """Defaults of ``name`` updated by ``overrides``; unknown experiments or keys raise DomainError."""
    if name not in EXPERIMENTS:
        raise DomainError(f"unknown experiment {name!r}")
    cfg = dict(EXPERIMENTS[name].defaults)
    for key, val in (overrides or {}).items():
        if key == "experiment":
            if val != name:
                raise DomainError(f"config names experiment {val!r}, not {name!r}")
            continue
        if key not in cfg:
            raise DomainError(f"unknown parameter {key!r} for {name}")
        cfg[key] = val
    if seed is not None:
        if "seed" not in cfg:
            raise DomainError(f"{name} does not take a seed")
        cfg["seed"] = int(seed)
    return {"experiment": name, **cfg}


def run_experiment(name: str, overrides: dict | None = None, seed: int | None = None, workers: int | None = None) -> ExperimentResult:
    if workers is not None and workers < 1:
        raise DomainError("workers must be positive")
    cfg = resolve_config(name, overrides, seed)
    exp = EXPERIMENTS[name]
    res = ExperimentResult(name, cfg, list(exp.columns), workers=workers or 1)
    t0 = time.perf_counter()
    exp.func(cfg, res)
    res.seconds = time.perf_counter() - t0
    return res


def _levels(values, label="N"):
    vals = [int(v) for v in values]
    if not vals or min(vals) < 0:
        raise DomainError(f"{label} list must hold nonnegative integers")
    return vals


def _complex(u) -> complex:
    if isinstance(u, (list, tuple)):
        return complex(float(u[0]), float(u[1]))
    return complex(u)


def _rate_check(res, criterion, name, params, errors, expected, tol):
    rep = fit_rate(params, errors, expected, tol)
    res.check(criterion, name, rep.passed, f"fitted {rep.exponent:.3f}, expected {expected:.3f} +- {tol:.3f}")
    return rep


# ---------------------------------------------------------------------------
# Wigner distributions


@_register(
    "wigner-airy", ["2"], "Airy profile of the scaled eigenspace Wigner distribution at the interface",
    ["N", "hbar", "u", "scaled_wigner", "airy", "abs_error"],
    E=0.5, d=1, N=[250, 500, 1000], u_min=-6.0, u_max=6.0, points=49, expected=2 / 3, tol=0.15,
)
def _wigner_airy(cfg, res):
    u = np.linspace(cfg["u_min"], cfg["u_max"], int(cfg["points"]))
    hs, sups = [], []
    for N in _levels(cfg["N"]):
        p = SemiclassicalParams(cfg["E"], N, cfg["d"])
        sup = 0.0
        for ui in u:
            v, a = airy_interface_profile(p, float(ui))
            sup = max(sup, abs(v - a))
            res.rows.append([N, p.hbar, float(ui), v, a, abs(v - a)])
        hs.append(p.hbar)
        sups.append(sup)
    if len(hs) >= 3:
        _rate_check(res, "2", "sup-distance to Ai(u/E), rate in hbar", hs, sups, cfg["expected"], cfg["tol"])


@_register(
    "bulk-interface", ["3"], "Bulk Weyl sum over [0, E] across the interface against int_{u/E}^inf Ai",
    ["N", "hbar", "u", "scaled_sum", "airy_tail", "abs_error"],
    E=0.5, d=2, N=[250, 500, 1000], u=[-4.0, -2.0, 0.0, 2.0, 4.0], expected=1 / 3, tol=0.15,
)
def _bulk_interface(cfg, res):
    hs, errs = [], []
    us = sorted({float(x) for x in cfg["u"]} | {0.0})
    for N in _levels(cfg["N"]):
        p = SemiclassicalParams(cfg["E"], N, cfg["d"])
        for u in us:
            v, lim = bulk_interface_profile(cfg["E"], u, p.hbar, cfg["d"])
            res.rows.append([N, p.hbar, u, v, lim, abs(v - lim)])
            if u == 0.0:
                hs.append(p.hbar)
                errs.append(abs(v - lim))
    lim0 = bulk_interface_profile(cfg["E"], 0.0, hs[-1], cfg["d"])[1]
    res.check("3", "value at u = 0 tends to 1/3", abs(lim0 - 1 / 3) < 1e-10 and errs[-1] < 0.05,
              f"limit {lim0:.12f}, last error {errs[-1]:.3e}")
    if len(hs) >= 3:
        rep = fit_rate(hs, errs, cfg["expected"], cfg["tol"])
        floor = cfg["expected"] - cfg["tol"]
        res.check("3", "error rate at u = 0 in hbar", rep.exponent >= floor,
                  f"fitted {rep.exponent:.3f}, required >= {floor:.3f}")


@_register(
    "weyl-bulk", ["3"], "Bulk Weyl sum inside and outside the energy surface",
    ["N", "hbar", "H", "region", "scaled_sum", "target", "abs_error"],
    E=0.5, d=2, N=[250, 500, 1000, 2000], H_interior=0.25, H_exterior=1.0, interior_C=2.0,
    exterior_N=500, exterior_max=1e-8,
)
def _weyl_bulk(cfg, res):
    E, d = cfg["E"], cfg["d"]
    w = WeylWindow("bulk", E1=0.0, E2=E)
    consts = []
    for N in _levels(cfg["N"]):
        p = SemiclassicalParams(E, N, d)
        h = p.hbar
        inner = (2 * math.pi * h) ** d * weyl_sum(w, cfg["H_interior"], E, h, d)
        outer = (2 * math.pi * h) ** d * weyl_sum(w, cfg["H_exterior"], E, h, d)
        res.rows.append([N, h, cfg["H_interior"], "interior", inner, 1.0, abs(inner - 1)])
        res.rows.append([N, h, cfg["H_exterior"], "exterior", outer, 0.0, abs(outer)])
        consts.append(abs(inner - 1) / math.sqrt(h))
    res.check("3", "interior error / hbar^{1/2} stays bounded", max(consts) <= cfg["interior_C"],
              "constants " + ", ".join(f"{c:.3f}" for c in consts) + f"; bound {cfg['interior_C']}")
    p = SemiclassicalParams(E, int(cfg["exterior_N"]), d)
    outer = (2 * math.pi * p.hbar) ** d * weyl_sum(w, cfg["H_exterior"], E, p.hbar, d)
    res.check("3", f"exterior value at N = {p.N}", abs(outer) < cfg["exterior_max"], f"|value| = {abs(outer):.3e}")


@_register(
    "weyl-hlocal", ["3"], "hbar-localised Weyl sum against its stationary-phase formula (interior point)",
    ["N", "hbar", "H", "weyl_sum", "stationary_phase", "rel_error"],
    E=0.5, d=2, H=0.25, N=[100, 200, 400, 800], support=2.5, max_rel_error=1e-2,
)
def _weyl_hlocal(cfg, res):
    E, d, H = cfg["E"], cfg["d"], cfg["H"]
    f = FourierWindow.bump(cfg["support"])
    w = WeylWindow("h_local", f=f)
    worst = 0.0
    for N in _levels(cfg["N"]):
        h = SemiclassicalParams(E, N, d).hbar
        v = weyl_sum(w, H, E, h, d)
        sp = weyl_h_localized_formula(f.fhat, f.support, E, h, d, H)
        rel = abs(v - sp) / abs(v)
        worst = max(worst, rel)
        res.rows.append([N, h, H, v, sp, rel])
    res.check("3", "stationary-phase formula matches the hbar-localised sum", worst <= cfg["max_rel_error"],
              f"max relative error {worst:.3e}")


@_register(
    "weyl-23", ["3"], "hbar^{2/3}-window Weyl sums across the interface against Airy integrals",
    ["N", "hbar", "window", "u", "scaled_sum", "airy_limit", "abs_error"],
    E=0.5, d=1, N=[250, 500, 1000], u=[-4.0, -2.0, 0.0, 2.0, 4.0], support=2.0, lam_minus=-1.0, lam_plus=1.0,
    min_exponent=1 / 3 - 0.15,
)
def _weyl_23(cfg, res):
    E, d = cfg["E"], cfg["d"]
    f = FourierWindow.bump(cfg["support"])
    hs, smooth, sharp = [], [], []
    for N in _levels(cfg["N"]):
        h = SemiclassicalParams(E, N, d).hbar
        es = eh = 0.0
        for u in map(float, cfg["u"]):
            v, lim = interface_smooth_profile(f, u, E, h, d)
            res.rows.append([N, h, "smooth", u, v, lim, abs(v - lim)])
            es = max(es, abs(v - lim))
            v, lim = interface_sharp_profile(cfg["lam_minus"], cfg["lam_plus"], u, E, h, d)
            res.rows.append([N, h, "sharp", u, v, lim, abs(v - lim)])
            eh = max(eh, abs(v - lim))
        hs.append(h)
        smooth.append(es)
        sharp.append(eh)
    if len(hs) >= 3:
        rep = fit_rate(hs, smooth, 2 / 3, 0.15)
        res.check("3", "smooth window error rate in hbar", rep.exponent >= cfg["min_exponent"],
                  f"fitted {rep.exponent:.3f}, required >= {cfg['min_exponent']:.3f}")
    res.check("3", "sharp window error shrinks from first to last N", sharp[-1] < sharp[0],
              ", ".join(f"{e:.3e}" for e in sharp))


@_register(
    "wigner-bessel", ["4"], "Interior cosine form of the eigenspace Wigner distribution",
    ["N", "hbar", "H_E", "rel_error", "C"],
    E=0.5, d=2, H_E=0.5, N=[200, 400, 800], width=3.0, samples=41, stability=2.0,
)
def _wigner_bessel(cfg, res):
    cs = []
    for N in _levels(cfg["N"]):
        p = SemiclassicalParams(cfg["E"], N, cfg["d"])
        err = cosine_relative_error(p, cfg["H_E"], cfg["width"], int(cfg["samples"]))
        c = err / math.sqrt(p.hbar)
        cs.append(c)
        res.rows.append([N, p.hbar, cfg["H_E"], err, c])
    spread = max(cs) / min(cs)
    res.check("4", "relative error <= C hbar^{1/2} with stable C", spread <= cfg["stability"],
              "C = " + ", ".join(f"{c:.4f}" for c in cs) + f"; max/min {spread:.3f}")


@_register(
    "wigner-exterior", ["5"], "Exponential decay bound outside the energy surface",
    ["N", "hbar", "H_E", "abs_wigner", "bound_without_C1", "ratio"],
    E=0.5, d=2, H_E=[1.5, 2.0, 4.0], N=[100, 200, 400], safety=2.0, flatness=2.0,
)
def _wigner_exterior(cfg, res):
    Ns = _levels(cfg["N"])
    ratios = {}
    for H_E in map(float, cfg["H_E"]):
        for N in Ns:
            p = SemiclassicalParams(cfg["E"], N, cfg["d"])
            rep = exterior_decay_check(p, H_E, 1.0)
            ratios[(H_E, N)] = rep.ratio
            res.rows.append([N, p.hbar, H_E, rep.value, rep.bound, rep.ratio])
    # C1 is fitted on the coarsest level only and then held fixed
    C1 = cfg["safety"] * max(r for (H_E, N), r in ratios.items() if N == min(Ns))
    worst = min(C1 / r for r in ratios.values())
    res.check("5", "single C1 bounds every (H_E, N)", worst >= 1.0, f"C1 = {C1:.5g}, smallest margin {worst:.3f}")
    flat = max(
        max(r for (h, _), r in ratios.items() if h == H_E) / min(r for (h, _), r in ratios.items() if h == H_E)
        for H_E in map(float, cfg["H_E"])
    )
    res.check("5", "ratio to the bound is flat in N", flat <= cfg["flatness"], f"max/min over N {flat:.4f}")


# ---------------------------------------------------------------------------
# caustic kernels and nodal sets


@_register(
    "caustic-kernel", ["6"], "Scaled projection kernel near the caustic against the Airy kernel",
    ["d", "N", "hbar", "u", "v", "scaled_kernel", "limit", "abs_error"],
    N=[200, 400, 800], pairs=[[0.0, 0.0], [0.5, -0.3], [-1.0, 0.7]], expected=1 / 3, tol=0.15,
    N_diag=[100, 200, 400, 800], s=[-2.0, 0.0, 2.0], diag_rel_tol=0.01,
)
def _caustic_kernel(cfg, res):
    hs, errs = [], []
    for N in _levels(cfg["N"]):
        p = SemiclassicalParams(0.5, N, 1)
        h = p.hbar
        sc = h ** (2 / 3)
        worst = 0.0
        for u, v in cfg["pairs"]:
            val = h ** (1 / 3) * projection_kernel(p, [1 + sc * u], [1 + sc * v])
            lim = caustic_limit_kernel(1, [u], [v])
            worst = max(worst, abs(val - lim))
            res.rows.append([1, N, h, u, v, val, lim, abs(val - lim)])
        hs.append(h)
        errs.append(worst)
    if len(hs) >= 3:
        _rate_check(res, "6", "d = 1 kernel error rate in hbar", hs, errs, cfg["expected"], cfg["tol"])
    by_s = {}
    for N in _levels(cfg["N_diag"]):
        p = SemiclassicalParams(0.5, N, 2)
        h = p.hbar
        for s in map(float, cfg["s"]):
            x = np.array([math.sqrt(1 + h ** (2 / 3) * s), 0.0])
            val = projection_kernel(p, x, x) / caustic_diagonal_prefactor(h, 2)
            lim = caustic_diagonal(2, s)
            by_s.setdefault(s, []).append(abs(val / lim - 1))
            res.rows.append([2, N, h, s, s, val, lim, abs(val - lim)])
    mono = all(all(b < a for a, b in zip(e, e[1:])) for e in by_s.values())
    last = max(e[-1] for e in by_s.values())
    res.check("6", "d = 2 diagonal converges at each s", mono and last <= cfg["diag_rel_tol"],
              f"monotone {mono}, final relative error {last:.2e}")


_NODAL_ALLOWED = [0.45, 0.55]
_NODAL_FORBIDDEN = [1.4, 1.6]


@_register(
    "nodal-kr", ["7", "8"], "Kac-Rice nodal densities: annulus averages and the caustic scaling limit",
    ["N", "hbar", "quantity", "value", "reference", "rel_error"],
    N=[100, 200, 400], u=0.0, expected=1 / 3, tol=0.2, N_annulus=60,
    allowed=_NODAL_ALLOWED, forbidden=_NODAL_FORBIDDEN,
)
def _nodal_kr(cfg, res):
    p = SemiclassicalParams(0.5, int(cfg["N_annulus"]), 2)
    kA = kacrice_annulus_average(p, Annulus(*cfg["allowed"]))
    kF = kacrice_annulus_average(p, Annulus(*cfg["forbidden"]))
    res.rows.append([p.N, p.hbar, "allowed_annulus_density", kA, math.nan, math.nan])
    res.rows.append([p.N, p.hbar, "forbidden_annulus_density", kF, math.nan, math.nan])
    res.check("7", "Kac-Rice densities are finite and ordered", 0 < kF < kA, f"allowed {kA:.4f}, forbidden {kF:.4f}")
    u = [float(cfg["u"]), 0.0]
    target = caustic_scaled_density(2, u)
    hs, errs = [], []
    for N in _levels(cfg["N"]):
        q = SemiclassicalParams(0.5, N, 2)
        val = finite_caustic_density(q, u)
        res.rows.append([N, q.hbar, "caustic_scaled_density", val, target, abs(val / target - 1)])
        hs.append(q.hbar)
        errs.append(abs(val - target))
    if len(hs) >= 3:
        _rate_check(res, "8", "rescaled caustic density error rate in hbar", hs, errs, cfg["expected"], cfg["tol"])


@_register(
    "nodal-mc", ["7"], "Monte-Carlo nodal length of random eigenfunctions against Kac-Rice",
    ["region", "r2_min", "r2_max", "mc_density", "std_error", "kacrice", "rel_error", "z_score"],
    N=60, seed=7, trials=200, grid_n=512, allowed=_NODAL_ALLOWED, forbidden=_NODAL_FORBIDDEN,
    rel_tol=0.05, z_max=3.0, ratio_tol=0.15, violation_trials=20,
)
def _nodal_mc(cfg, res):
    p = SemiclassicalParams(0.5, int(cfg["N"]), 2)
    spec = RandomEnsembleSpec(p, int(cfg["seed"]), int(cfg["trials"]))
    regions = [Annulus(*cfg["allowed"]), Annulus(*cfg["forbidden"])]
    ests = mc_nodal_volumes(spec, regions, int(cfg["grid_n"]), workers=res.workers)
    krs = [kacrice_annulus_average(p, r) for r in regions]
    for label, est, kr in zip(("allowed", "forbidden"), ests, krs):
        z = (est.mean_density - kr) / est.std_error
        res.rows.append([label, est.region.r2_min, est.region.r2_max, est.mean_density, est.std_error, kr,
                         abs(est.mean_density / kr - 1), z])
    a, kr = ests[0], krs[0]
    rel = abs(a.mean_density / kr - 1)
    z = abs(a.mean_density - kr) / a.std_error
    res.check("7", "allowed annulus matches Kac-Rice", rel <= cfg["rel_tol"] and z <= cfg["z_max"],
              f"relative error {rel:.3%}, z = {z:.2f}")
    mc_ratio = ests[0].mean_density / ests[1].mean_density
    kr_ratio = krs[0] / krs[1]
    rr = abs(mc_ratio / kr_ratio - 1)
    res.check("7", "allowed/forbidden density ratio", rr <= cfg["ratio_tol"],
              f"Monte-Carlo {mc_ratio:.3f}, Kac-Rice {kr_ratio:.3f}, relative gap {rr:.2%}")
    if int(cfg["violation_trials"]) > 0:
        bad = forbidden_domain_violations(spec, int(cfg["violation_trials"]), int(cfg["grid_n"]))
        res.check("7", "no sign domain lies entirely in the forbidden region", bad == 0, f"{bad} violations")


# ---------------------------------------------------------------------------
# holomorphic models


def _cdf_fit_check(res, criterion, label, x, y, oracle_scale, r2_min, scale_tol):
    fit = fit_gaussian_cdf(x, y)
    rel = abs(fit.scale / oracle_scale - 1)
    res.check(criterion, label, fit.r_squared >= r2_min and rel <= scale_tol,
              f"R^2 = {fit.r_squared:.6f}, scale {fit.scale:.5f} vs {oracle_scale:.5f} ({rel:.2%})")
    return fit


@_register(
    "bf-erf", ["9"], "Bargmann-Fock partial density at a point moving across |Z|^2 = E",
    ["k", "u", "partial_density", "limit"],
    k=10000.0, m=0, E=1.0, u_min=-4.0, u_max=4.0, points=41, r2_min=0.999, scale_tol=0.05,
)
def _bf_erf(cfg, res):
    k, m, E = float(cfg["k"]), int(cfg["m"]), float(cfg["E"])
    us = np.linspace(cfg["u_min"], cfg["u_max"], int(cfg["points"]))
    vals = []
    for u in us:
        r2 = E * (1 + u / math.sqrt(k))
        Z = np.zeros(m + 1, dtype=complex)
        Z[0] = math.sqrt(r2)
        v = bf_partial_density(k, m, E, Z)
        vals.append(v)
        res.rows.append([k, float(u), v, bf_partial_density_limit(E, float(u))])
    _cdf_fit_check(res, "9", "Gaussian-CDF fit against the Poisson limit", us, vals, -1 / math.sqrt(E),
                   cfg["r2_min"], cfg["scale_tol"])


@_register(
    "szasz", ["9"], "Normalised Szasz partial sums against their Gaussian limit",
    ["k", "x", "partial_sum", "limit", "abs_error"],
    k=[100, 1000, 10000], m=0, E=1.0, y=[-2.0, -1.0, 0.0, 1.0, 2.0], expected=-0.5, tol=0.15,
)
def _szasz(cfg, res):
    E = float(cfg["E"])
    ks, errs = [], []
    for k in map(float, cfg["k"]):
        worst = 0.0
        for y in map(float, cfg["y"]):
            x = E * E - y / math.sqrt(k)
            v, lim = szasz_cdf_limit(k, x, E, int(cfg["m"]))
            worst = max(worst, abs(v - lim))
            res.rows.append([k, x, v, lim, abs(v - lim)])
        ks.append(k)
        errs.append(worst)
    if len(ks) >= 3:
        _rate_check(res, "9", "Szasz remainder rate in k", ks, errs, cfg["expected"], cfg["tol"])


@_register(
    "linebundle-bf", ["9"], "Line-bundle Bargmann-Fock partial density across |lambda| = E",
    ["k", "beta", "partial_density", "limit"],
    k=10000.0, m=1, E=0.8, beta_min=-2.0, beta_max=2.0, points=41, r2_min=0.999, scale_tol=0.05,
)
def _linebundle(cfg, res):
    model = LineBundleBFModel(int(cfg["m"]), float(cfg["k"]))
    E = float(cfg["E"])
    mass = model.gaussian_mass()
    res.check("9", "Gaussian measure has unit mass", abs(mass - 1) < 1e-10, f"mass {mass:.14f}")
    bs = np.linspace(cfg["beta_min"], cfg["beta_max"], int(cfg["points"]))
    vals = []
    for b in bs:
        v, lim = linebundle_bf_density(model, E, float(b))
        vals.append(v)
        res.rows.append([model.k_planck, float(b), v, lim])
    _cdf_fit_check(res, "9", "Gaussian-CDF fit against Phi(-2 beta E)", bs, vals, -1 / (2 * E),
                   cfg["r2_min"], cfg["scale_tol"])


@_register(
    "pbk-cp1", ["9"], "CP^1 partial Bergman density: spectral CDF width and gradient-flow profile",
    ["k", "mode", "parameter", "value", "limit", "abs_error"],
    E=0.5, k_cdf=2000, alpha_min=-2.0, alpha_max=2.0, points=41, width_tol=0.10,
    k=[500, 1000, 2000], beta=[-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5], expected=-0.5, tol=0.15,
)
def _pbk_cp1(cfg, res):
    E = float(cfg["E"])
    z = level_point(E)
    g = float(grad_H_norm(z))
    model = cp1_model_build(int(cfg["k_cdf"]))
    k = model.k
    al = np.linspace(cfg["alpha_min"], cfg["alpha_max"], int(cfg["points"]))
    vals = []
    for a in al:
        v, lim = pbk_interface_profile(model, E, float(a), "spectral_cdf")
        vals.append(v * 2 * math.pi / k)
        res.rows.append([k, "spectral_cdf", float(a), v, lim, abs(v - lim)])
    fit = fit_gaussian_cdf(al, vals)
    coeff = 1 / fit.scale
    target = math.sqrt(2) / g
    rel = abs(coeff / target - 1)
    res.check("9", f"spectral CDF width at k = {k}", rel <= cfg["width_tol"],
              f"1/scale {coeff:.5f} vs sqrt2/|grad H| {target:.5f} ({rel:.2%}), R^2 {fit.r_squared:.6f}")
    ks, errs = [], []
    for kk in _levels(cfg["k"], "k"):
        mdl = model if kk == k else cp1_model_build(kk)
        worst = 0.0
        for b in map(float, cfg["beta"]):
            v, lim = pbk_interface_profile(mdl, E, b, "gradient_flow")
            worst = max(worst, abs(v - lim))
            res.rows.append([kk, "gradient_flow", b, v, lim, abs(v - lim)])
        ks.append(kk)
        errs.append(worst)
    if len(ks) >= 3:
        _rate_check(res, "9", "gradient-flow profile error rate in k", ks, errs, cfg["expected"], cfg["tol"])


@_register(
    "pbk-critical", ["10"], "Smoothed partial density at the critical point z = 0",
    ["k", "mode", "u_re", "u_im", "value", "limit", "rel_error"],
    k=[1000, 4000, 16000], u=[[0.0, 0.0], [0.0, 0.4], [0.7, 0.2], [1.0, 0.0]], support=2.0,
    expected=-0.25, tol=0.15, half_k=2000, half_u=[[0.0, 0.0], [0.5, 0.5]],
)
def _pbk_critical(cfg, res):
    f = FourierWindow.bump(cfg["support"])
    ks, errs = [], []
    for k in _levels(cfg["k"], "k"):
        model = cp1_model_build(k)
        worst = 0.0
        for u in map(_complex, cfg["u"]):
            v, lim = critical_scaling(model, f, u, "quarter")
            rel = abs(v / lim - 1)
            worst = max(worst, rel)
            res.rows.append([k, "quarter", u.real, u.imag, v, lim, rel])
        ks.append(k)
        errs.append(worst)
    if len(ks) >= 3:
        rep = fit_rate(ks, errs, cfg["expected"], cfg["tol"])
        ceiling = cfg["expected"] + cfg["tol"]
        res.check("10", "quarter-scaling error is O(k^{-1/4})", rep.exponent <= ceiling,
                  f"fitted {rep.exponent:.3f}, required <= {ceiling:.3f}")
    model = cp1_model_build(int(cfg["half_k"]))
    for u in map(_complex, cfg["half_u"]):
        v, lim = critical_scaling(model, f, u, "half")
        res.rows.append([model.k, "half", u.real, u.imag, v, float(np.real(lim)), abs(v / np.real(lim) - 1)])
    peak = section_log_densities(model, 0.0)
    others_zero = bool(np.all(np.isneginf(peak[1:])))
    res.check("10", "only the peak section is nonzero at z = 0", others_zero and np.isfinite(peak[0]),
              f"nonzero sections: {int(np.sum(np.isfinite(peak)))}")


@_register(
    "trace", ["11"], "Trace of the scaled propagator against two-point stationary phase",
    ["k", "t", "rel_error", "envelope"],
    t=0.7, k=[1000, 3162, 10000], expected=-0.5, tol=0.2,
)
def _trace(cfg, res):
    t = float(cfg["t"])
    ks, errs = [], []
    for k in _levels(cfg["k"], "k"):
        e = trace_relative_error(cp1_model_build(k), t)
        env = abs(t) / (2 * math.sqrt(k))
        ks.append(k)
        errs.append(e)
        res.rows.append([k, t, e, env])
    if len(ks) >= 3:
        _rate_check(res, "11", "relative error rate in k", ks, errs, cfg["expected"], cfg["tol"])
    res.check("11", "error stays under |t|/(2 sqrt k)", all(r[2] <= 1.01 * r[3] for r in res.rows),
              "max error/envelope " + f"{max(r[2] / r[3] for r in res.rows):.3f}")


def _symplectic_samples(seed: int, count: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    J = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = []
    for _ in range(count):
        A = rng.standard_normal((2, 2)) * 0.6
        out.append(expm(J @ (A + A.T)))  # exp of a Hamiltonian matrix is symplectic
    return out


@_register(
    "metaplectic", ["12"], "Complex symplectic blocks and metaplectic kernels on Bargmann-Fock space",
    ["case", "quantity", "value", "reference", "abs_error"],
    k=3.0, seed=11, samples=6, identity_tol=1e-10, kernel_tol=1e-10,
)
def _metaplectic(cfg, res):
    worst = 0.0
    for i, S in enumerate(_symplectic_samples(int(cfg["seed"]), int(cfg["samples"]))):
        blk = SpcBlock.from_real(S)
        r1 = blk.identity_residual()
        r2 = float(np.abs(blk.compose(blk.inverse()).matrix() - np.eye(2)).max())
        worst = max(worst, r1, r2)
        res.rows.append([f"random-{i}", "identity_residual", r1, 0.0, r1])
        res.rows.append([f"random-{i}", "compose_inverse_residual", r2, 0.0, r2])
    res.check("12", "Sp_c identities for random real symplectic matrices", worst <= cfg["identity_tol"],
              f"max residual {worst:.2e}")
    k = float(cfg["k"])
    zh = LiftedPoint([0.3 + 0.2j], 0.4)
    wh = LiftedPoint([-0.1 + 0.25j], -0.2)
    cases = {
        "squeeze": SpcBlock.squeeze(0.4),
        "shear": SpcBlock.from_real([[1.0, 0.7], [0.0, 1.0]]),
        "rotation": SpcBlock.rotation(1.1),
    }
    worst = 0.0
    for name, blk in cases.items():
        q = toeplitz_metaplectic_quadrature(k, blk, zh, wh)
        ref = lifted_metaplectic_kernel(k, blk, zh, wh)
        err = abs(q - ref) / abs(ref)
        worst = max(worst, err)
        res.rows.append([name, "toeplitz_quadrature_rel", abs(q), abs(ref), err])
    res.check("12", "Toeplitz quadrature reproduces the lifted kernel", worst <= cfg["kernel_tol"],
              f"max relative error {worst:.2e}")
    t = 1.1
    z, w = 0.3 + 0.2j, -0.1 + 0.25j
    ker = metaplectic_kernel(k, SpcBlock.rotation(t), [z], [w])
    modes = k / (2 * math.pi) * np.exp(-0.5j * t + k * np.exp(-1j * t) * z * np.conj(w))
    err = abs(ker - modes) / abs(modes)
    res.rows.append(["rotation", "mode_sum_rel", abs(ker), abs(modes), err])
    res.check("12", "rotation kernel equals its eigen-mode sum", err <= cfg["kernel_tol"], f"relative error {err:.2e}")


# ---------------------------------------------------------------------------
# structural self-test


def _idempotence_d2(N: int, x, y, nodes: int = 128) -> tuple[float, float]:
    """(int Pi(x, z) Pi(z, y) dz, Pi(x, y)) in d = 2 by tensor Gauss-Legendre."""
    p = SemiclassicalParams(0.5, N, 2)
    h = p.hbar
    half = 1.0 + 12 * math.sqrt(h)  # turning point plus the Gaussian tail
    t, w = np.polynomial.legendre.leggauss(nodes)
    t, w = half * t, half * w

    def tab(v):
        return hermite_functions(N, np.asarray(v, dtype=float) / math.sqrt(h)) * h**-0.25

    a = np.arange(N + 1)
    fx = tab(x[0])[a] * tab(x[1])[N - a]
    fy = tab(y[0])[a] * tab(y[1])[N - a]
    T = tab(t)
    # int phi_a phi_b over z1, z2 separately
    G = (T * w) @ T.T
    gram = G[np.ix_(a, a)] * G[np.ix_(N - a, N - a)]
    return float(fx @ gram @ fy), projection_kernel(p, x, y)


@_register(
    "selftest", ["1", "12"], "Closed-form checks: Wigner oracle, moments, idempotence, Abel mass, Laguerre",
    ["check", "case", "value", "reference", "abs_error"],
    oracle_N_max=10, oracle_points=20, oracle_tol=1e-7, moment_tol=1e-8, laguerre_tol=1e-8, contour_tol=1e-7,
    abel_tol=1e-9, idempotence_tol=1e-9,
)
def _selftest(cfg, res):
    # Laguerre-Wigner identity against phase-space quadrature
    rng = np.random.default_rng(2024)
    pts = rng.uniform(-1.3, 1.3, size=(int(cfg["oracle_points"]), 2))
    worst = 0.0
    for N in range(int(cfg["oracle_N_max"]) + 1):
        p = SemiclassicalParams(0.5, N, 1)
        for x, xi in pts:
            pt = PhasePoint([x], [xi])
            q = wigner_quadrature_oracle(p, pt)
            c = wigner_eigenspace(p, pt.H)
            worst = max(worst, abs(q - c))
            res.rows.append(["wigner_oracle", f"N={N} x={x:.4f} xi={xi:.4f}", q, c, abs(q - c)])
    res.check("1", "quadrature oracle vs Laguerre closed form", worst <= cfg["oracle_tol"], f"max abs {worst:.2e}")

    # moment identities
    worst = 0.0
    for d, N in ((1, 7), (2, 5), (3, 4)):
        p = SemiclassicalParams(0.5, N, d)
        cut = 2 * p.E + 40 * p.hbar
        m0 = radial_phase_integral(lambda H: wigner_eigenspace(p, H), d, cut, panels=4 * N + 64)
        m2 = (2 * math.pi * p.hbar) ** d * wigner_inner_product(p, p)
        q = SemiclassicalParams.from_hbar(p.hbar, N + 1, d)
        orth = wigner_inner_product(p, q) * (2 * math.pi * p.hbar) ** d
        for label, val, ref in (("integral", m0, p.dim), ("square", m2, p.dim), ("orthogonal", orth, 0.0)):
            err = abs(val - ref) / max(1.0, abs(ref))
            worst = max(worst, err)
            res.rows.append(["moments", f"d={d} N={N} {label}", val, ref, abs(val - ref)])
    res.check("12", "Wigner moment identities", worst <= cfg["moment_tol"], f"max relative {worst:.2e}")

    # projection idempotence
    x, y = np.array([0.4, -0.3]), np.array([-0.2, 0.5])
    worst = 0.0
    for N in (3, 6):
        v, ref = _idempotence_d2(N, x, y)
        worst = max(worst, abs(v - ref))
        res.rows.append(["idempotence", f"d=2 N={N}", v, ref, abs(v - ref)])
    res.check("12", "projection idempotence", worst <= cfg["idempotence_tol"], f"max abs {worst:.2e}")

    # Abel-summed mass of the empirical measure
    worst = 0.0
    for d, H in ((1, 0.3), (2, 0.7)):
        h = 0.05
        for r in (0.9, 0.99, 0.999):
            n_max = int(math.log(1e-18) / math.log(r)) + 200
            mu = empirical_measure(H, h, d, n_max)
            v, ref = mu.abel_mass(r), abel_mass_closed_form(H, h, d, r)
            worst = max(worst, abs(v - ref))
            res.rows.append(["abel_mass", f"d={d} H={H} r={r}", v, ref, abs(v - ref)])
        lim = abel_mass_closed_form(H, h, d, 1.0 - 1e-12)
        worst = max(worst, abs(lim - 1))
        res.rows.append(["abel_mass", f"d={d} H={H} r->1", lim, 1.0, abs(lim - 1)])
    res.check("12", "empirical measure has unit (Abel) mass", worst <= cfg["abel_tol"], f"max abs {worst:.2e}")

    # Laguerre generating function and contour representation
    worst = 0.0
    for w in (0.1, 0.3):
        for xv in (0.5, 2.0):
            for alpha in (0, 1):
                tab = laguerre_weighted_table(60, alpha, xv)
                val = float(np.sum(tab * w ** np.arange(61)))
                ref = math.exp(-xv / 2) * (1 - w) ** (-alpha - 1) * math.exp(-xv * w / (1 - w))
                worst = max(worst, abs(val - ref))
                res.rows.append(["generating_function", f"w={w} x={xv} alpha={alpha}", val, ref, abs(val - ref)])
    res.check("12", "Laguerre generating function", worst <= cfg["laguerre_tol"], f"max abs {worst:.2e}")
    worst = 0.0
    for n in range(21):
        for xv in (0.5, 3.0, 10.0):
            for alpha in (0, 1, 2):
                c, r = laguerre_contour(n, alpha, xv), laguerre_weighted(n, alpha, xv)
                worst = max(worst, abs(c - r))
                res.rows.append(["contour", f"n={n} x={xv} alpha={alpha}", c, r, abs(c - r)])
    res.check("12", "contour integral vs recurrence", worst <= cfg["contour_tol"], f"max abs {worst:.2e}")

    # Sp_c identities on a few real symplectic matrices
    worst = max(SpcBlock.from_real(S).identity_residual() for S in _symplectic_samples(5, 4))
    res.rows.append(["spc_identities", "random", worst, 0.0, worst])
    res.check("12", "Sp_c block identities", worst <= 1e-10, f"max residual {worst:.2e}")
