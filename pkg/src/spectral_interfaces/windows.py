"""Test functions given through a compactly supported Fourier transform.

Convention: f_hat(t) = int f(x) exp(-i t x) dx, so f(x) = (1/2pi) int f_hat(t) exp(i t x) dt.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError


@lru_cache(maxsize=8)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _bump(t, a):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < a
    out[m] = np.exp(1.0 - 1.0 / (1.0 - (t[m] / a) ** 2))
    return out


@dataclass(frozen=True)
class FourierWindow:
    """f with f_hat supported in [-support, support]; evaluated by Gauss-Legendre in t."""

    fhat: Callable
    support: float
    nodes: int = 2048
    cutoff: float = math.inf

    def __post_init__(self):
        if not self.support > 0:
            raise DomainError("support must be positive")
        probe = np.linspace(0.05, 0.95, 7) * self.support
        fp, fm = np.asarray(self.fhat(probe)), np.asarray(self.fhat(-probe))
        even = bool(np.all(np.isreal(fp)) and np.allclose(fp, fm, rtol=0, atol=1e-15))
        object.__setattr__(self, "_even", even)

    @classmethod
    def bump(cls, support: float, shift: float = 0.0, truncate: float | None = 1e-14) -> "FourierWindow":
        """Smooth bump transform with f_hat(0) = 1 (so int f = 1), times exp(-i shift t).

        With ``truncate`` set, f is replaced by 0 beyond the point where |f| stays
        below ``truncate`` times its maximum; this keeps the quadrature noise floor
        out of level-range searches.
        """
        if shift == 0.0:
            win = cls(lambda t: _bump(t, support), support)
        else:
            win = cls(lambda t: _bump(t, support) * np.exp(-1j * shift * np.asarray(t)), support)
        return win.truncated(truncate) if truncate else win

    def truncated(self, rel: float = 1e-14, smax: float = 1e3) -> "FourierWindow":
        s = np.concatenate([np.linspace(0, 50, 1001), np.geomspace(50, smax, 1000)[1:]])
        centre = self.centre_estimate()
        v = np.maximum(np.abs(self._eval(centre + s)), np.abs(self._eval(centre - s)))
        big = np.nonzero(v >= rel * v.max())[0]
        if big[-1] == s.size - 1:
            raise DomainError("window does not decay within the scanned range")
        return FourierWindow(self.fhat, self.support, self.nodes, abs(centre) + float(s[big[-1] + 1]))

    def centre_estimate(self) -> float:
        """Location of the peak of |f| on a coarse grid."""
        x = np.linspace(-100, 100, 4001)
        return float(x[np.argmax(np.abs(self._eval(x)))])

    def _rule(self):
        x, w = _gl(self.nodes)
        return self.support * x, self.support * w

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        vals = self._eval(x)
        if math.isfinite(self.cutoff):
            vals = np.where(np.abs(x) <= self.cutoff, vals, 0.0)
        return vals

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        if self._even:
            return self._eval_even(x)
        t, w = self._rule()
        ft = np.asarray(self.fhat(t), dtype=complex) * w
        flat = x.reshape(-1)
        vals = np.empty(flat.size, dtype=complex)
        for i in range(0, flat.size, 4096):
            vals[i : i + 4096] = np.exp(1j * np.outer(flat[i : i + 4096], t)) @ ft
        vals = vals.reshape(x.shape) / (2 * math.pi)
        return vals.real if np.all(np.abs(vals.imag) <= 1e-12 * (1 + np.abs(vals.real))) else vals

    def _eval_even(self, x):
        # fold the symmetric rule: f(x) = (1/pi) sum_{t > 0} w f_hat(t) cos(t x)
        t, w = self._rule()
        pos = t > 0
        t, w = t[pos], w[pos]
        ft = np.real(np.asarray(self.fhat(t))) * w
        flat = x.reshape(-1)
        vals = np.empty(flat.size)
        for i in range(0, flat.size, 4096):
            vals[i : i + 4096] = np.cos(np.outer(flat[i : i + 4096], t)) @ ft
        return vals.reshape(x.shape) / math.pi

    def integrate(self, g: Callable):
        """(1/2pi) int f_hat(t) g(t) dt for a vectorised ``g``."""
        t, w = self._rule()
        return complex(np.sum(np.asarray(self.fhat(t)) * g(t) * w) / (2 * math.pi))
