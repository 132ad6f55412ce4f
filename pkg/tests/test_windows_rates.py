import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ndtr

from spectral_interfaces.errors import DomainError, NumericalError
from spectral_interfaces.rates import fit_gaussian_cdf, fit_rate
from spectral_interfaces.windows import FourierWindow


def _bump_mp(t, a):
    return mpmath.exp(1 - 1 / (1 - (t / a) ** 2)) if abs(t) < a else mpmath.mpf(0)


@pytest.mark.parametrize("x", [0.0, 0.8, 3.5])
def test_bump_values_against_direct_inversion(x):
    f = FourierWindow.bump(2.0)
    ref = mpmath.quad(lambda t: _bump_mp(t, 2) * mpmath.cos(t * x), [-2, 0, 2]) / (2 * mpmath.pi)
    assert float(f(x)) == pytest.approx(float(ref), rel=1e-10)


def test_bump_has_unit_mass():
    f = FourierWindow.bump(2.0)
    x = np.linspace(-f.cutoff, f.cutoff, 20001)
    assert np.trapezoid(f(x), x) == pytest.approx(1.0, abs=1e-8)
    assert f.integrate(lambda t: np.ones_like(t)).real == pytest.approx(float(f(0.0)), rel=1e-12)


def test_truncation_zeroes_the_far_tail():
    f = FourierWindow.bump(2.0)
    assert math.isfinite(f.cutoff)
    assert f(f.cutoff + 1.0) == 0.0
    raw = FourierWindow.bump(2.0, truncate=None)
    assert raw.cutoff == math.inf


def test_shifted_bump_is_translate():
    f = FourierWindow.bump(2.0)
    g = FourierWindow.bump(2.0, shift=1.5)
    for x in (-0.5, 1.5, 2.2):
        assert complex(g(x)).real == pytest.approx(float(f(x - 1.5)), abs=1e-12)
    assert abs(g.centre_estimate() - 1.5) < 0.1


def test_window_rejects_bad_support():
    with pytest.raises(DomainError):
        FourierWindow(lambda t: np.ones_like(t), 0.0)


@settings(max_examples=25, deadline=None)
@given(slope=st.floats(-2, 2), c=st.floats(-3, 3))
def test_rate_fit_recovers_power_law(slope, c):
    p = [100.0, 400.0, 1600.0]
    rep = fit_rate(p, [math.exp(c) * x**slope for x in p], slope, 1e-9)
    assert rep.passed
    assert rep.intercept == pytest.approx(c, abs=1e-8)


def test_rate_fit_line_and_errors():
    rep = fit_rate([1, 2, 4], [1, 0.5, 0.25], -0.5, 0.1)
    assert not rep.passed
    assert rep.line("demo").startswith("FAIL demo: fitted -1.000")
    with pytest.raises(DomainError):
        fit_rate([1, 2], [1, 2], 0, 1)
    with pytest.raises(NumericalError):
        fit_rate([1, 2, 3], [1, 0, 2], 0, 1)


def test_gaussian_cdf_fit():
    x = np.linspace(-3, 3, 41)
    y = ndtr((x - 0.2) / -0.7)
    fit = fit_gaussian_cdf(x, y)
    assert fit.scale == pytest.approx(-0.7, rel=1e-6)
    assert fit.centre == pytest.approx(0.2, abs=1e-6)
    assert fit.r_squared > 1 - 1e-10
    free = fit_gaussian_cdf(x, 0.4 * y, fix_amplitude=None)
    assert free.amplitude == pytest.approx(0.4, rel=1e-6)
