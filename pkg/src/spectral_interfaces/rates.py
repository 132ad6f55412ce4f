"""Log-log rate fits and Gaussian-CDF profile fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import ndtr

from .errors import DomainError, NumericalError

__all__ = ["RateFitReport", "fit_rate", "GaussianCdfFit", "fit_gaussian_cdf"]


@dataclass(frozen=True)
class RateFitReport:
    """Fit of log|error| = exponent * log(param) + c; ``passed`` compares with ``expected``."""

    params: tuple
    errors: tuple
    exponent: float
    intercept: float
    expected: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.exponent - self.expected) <= self.tol

    def line(self, label: str) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {label}: fitted {self.exponent:.3f}, expected {self.expected:.3f} +- {self.tol:.3f}"


def fit_rate(params, errors, expected: float, tol: float) -> RateFitReport:
    """Least-squares slope of log(errors) against log(params); needs three or more samples."""
    p = np.asarray(params, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if p.size < 3 or p.size != e.size:
        raise DomainError("rate fits need at least three matching samples")
    if np.any(p <= 0) or np.any(e <= 0):
        raise NumericalError("rate fit needs positive parameters and nonzero errors", {"errors": e.tolist()})
    slope, icpt = np.polyfit(np.log(p), np.log(e), 1)
    return RateFitReport(tuple(p), tuple(e), float(slope), float(icpt), float(expected), float(tol))


@dataclass(frozen=True)
class GaussianCdfFit:
    """y ~ amplitude * Phi((x - centre)/scale); a negative scale means a decreasing profile."""

    amplitude: float
    centre: float
    scale: float
    r_squared: float


def fit_gaussian_cdf(x, y, fix_amplitude: float | None = 1.0) -> GaussianCdfFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope0 = np.sign(y[-1] - y[0]) or 1.0
    span = (x.max() - x.min()) / 4 or 1.0
    if fix_amplitude is None:
        def model(x, a, c, s):
            return a * ndtr((x - c) / s)
        p0 = [max(abs(y).max(), 1e-300), float(np.median(x)), slope0 * span]
    else:
        def model(x, c, s):
            return fix_amplitude * ndtr((x - c) / s)
        p0 = [float(np.median(x)), slope0 * span]
    popt, _ = curve_fit(model, x, y, p0=p0, maxfev=20000)
    resid = y - model(x, *popt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    if fix_amplitude is None:
        a, c, s = popt
    else:
        a, (c, s) = fix_amplitude, popt
    return GaussianCdfFit(float(a), float(c), float(s), r2)
