import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from skimage import measure

from spectral_interfaces.errors import DomainError, NumericalError
from spectral_interfaces.nodal import (
    Annulus,
    RandomEnsembleSpec,
    allowed_density_asymptotic,
    caustic_omega,
    caustic_scaled_density,
    density_from_omega,
    density_gauss_hermite,
    finite_caustic_density,
    forbidden_density_asymptotic,
    forbidden_domain_violations,
    kacrice_annulus_average,
    kacrice_density,
    kacrice_matrix,
    marching_squares_segments,
    mc_nodal_volume,
    nodal_length_in,
    sample_field,
)
from spectral_interfaces.oscillator import SemiclassicalParams

# caustic density at u = 0, d = 2, from mpmath weighted Airy values and ellipe
CAUSTIC_F0 = 0.21542894869364901


@pytest.mark.parametrize("N", [0, 5, 40])
def test_one_dimensional_eigenspace_has_no_random_zeros(N):
    # d = 1: the field is a * phi_N, so Omega = d_x d_y log(phi(x) phi(y)) vanishes
    p = SemiclassicalParams(0.5, N, 1)
    assert abs(kacrice_matrix(p, [0.3])[0, 0]) < 1e-12
    assert kacrice_density(p, [0.3]) < 1e-8


def test_isotropic_density_closed_form():
    # Omega = lam I in d = 2 gives sqrt(lam)/2
    for lam in (0.5, 3.0, 40.0):
        assert density_from_omega(lam * np.eye(2)) == pytest.approx(math.sqrt(lam) / 2, rel=1e-13)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.1, 10), b=st.floats(0.1, 10), c=st.floats(-0.9, 0.9))
def test_elliptic_form_matches_angular_quadrature(a, b, c):
    off = c * math.sqrt(a * b)
    om = np.array([[a, off], [off, b]])
    l1, l2 = np.linalg.eigvalsh(om)
    ang = mpmath.quad(lambda t: mpmath.sqrt(l1 * mpmath.cos(t) ** 2 + l2 * mpmath.sin(t) ** 2), [0, mpmath.pi / 2])
    expected = float(ang) * 4 / (2 * math.pi) / 2  # angular mean of |Omega^{1/2} e_theta|, times 1/2
    assert density_from_omega(om) == pytest.approx(expected, rel=1e-12)
    # |xi| is not smooth at 0, so the Gauss-Hermite cross-check converges only algebraically
    assert density_gauss_hermite(om, order=60) == pytest.approx(expected, rel=5e-3)


def test_density_rejects_indefinite_matrix():
    with pytest.raises(NumericalError):
        density_from_omega(np.diag([1.0, -0.5]))


def test_kacrice_matrix_symmetric_positive():
    p = SemiclassicalParams(0.5, 30, 2)
    om = kacrice_matrix(p, [0.3, -0.4])
    assert np.allclose(om, om.T)
    assert np.linalg.eigvalsh(om).min() > 0


def test_allowed_asymptotic_on_annulus():
    p = SemiclassicalParams(0.5, 200, 2)
    region = Annulus(0.2, 0.3)
    r = np.linspace(math.sqrt(0.2), math.sqrt(0.3), 400)
    asy = np.trapezoid([allowed_density_asymptotic(p, ri) * ri for ri in r], r) * 2 * math.pi / region.area
    assert kacrice_annulus_average(p, region) == pytest.approx(asy, rel=5e-3)


@pytest.mark.parametrize("r2", [1.3, 1.5, 2.0])
def test_forbidden_asymptotic_constant(r2):
    p = SemiclassicalParams(0.5, 200, 2)
    assert kacrice_density(p, [math.sqrt(r2), 0.0]) == pytest.approx(
        forbidden_density_asymptotic(p, math.sqrt(r2)), rel=0.015
    )


def test_forbidden_asymptotic_needs_two_dimensions():
    with pytest.raises(DomainError):
        forbidden_density_asymptotic(SemiclassicalParams(0.5, 10, 1), 1.5)


def test_caustic_scaled_density_value():
    assert caustic_scaled_density(2, [0.0, 0.0]) == pytest.approx(CAUSTIC_F0, rel=1e-9)
    with pytest.raises(DomainError):
        caustic_omega(2, [6.0, 0.0])


def test_finite_caustic_density_approaches_limit():
    errs = [abs(finite_caustic_density(SemiclassicalParams(0.5, N, 2), [0.0, 0.0]) - CAUSTIC_F0) for N in (100, 400)]
    assert errs[1] < errs[0] < 0.01


def test_marching_squares_length_matches_skimage():
    grid = np.linspace(-2, 2, 301)
    X, Y = np.meshgrid(grid, grid)
    field = np.sin(3 * X) * np.cos(2 * Y) + 0.3 * X * Y - 0.1
    seg = marching_squares_segments(field, grid)
    ours = float(np.sum(np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)))
    dx = grid[1] - grid[0]
    ref = sum(float(np.sum(np.linalg.norm(np.diff(c, axis=0), axis=1))) * dx for c in measure.find_contours(field, 0.0))
    assert ours == pytest.approx(ref, rel=1e-9)


def test_circle_length_and_region_filter():
    grid = np.linspace(-1.5, 1.5, 601)
    X, Y = np.meshgrid(grid, grid)
    seg = marching_squares_segments(X * X + Y * Y - 1.0, grid)
    assert nodal_length_in(seg, Annulus(0.5, 2.0)) == pytest.approx(2 * math.pi, rel=1e-4)
    assert nodal_length_in(seg, Annulus(1.2, 2.0)) == 0.0


def test_annulus_validation():
    with pytest.raises(DomainError):
        Annulus(1.0, 0.5)
    assert Annulus(0.0, 1.0).area == pytest.approx(math.pi)


def test_ensemble_is_deterministic_and_validated():
    p = SemiclassicalParams(0.5, 20, 2)
    a = RandomEnsembleSpec(p, 7, 5).coefficients(3)
    b = RandomEnsembleSpec(p, 7, 5).coefficients(3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, RandomEnsembleSpec(p, 7, 5).coefficients(4))
    with pytest.raises(DomainError):
        RandomEnsembleSpec(SemiclassicalParams(0.5, 20, 1), 7, 5)
    with pytest.raises(DomainError):
        RandomEnsembleSpec(p, -1, 5)


def test_sampled_field_matches_hermite_sum():
    p = SemiclassicalParams(0.5, 6, 2)
    c = RandomEnsembleSpec(p, 1, 1).coefficients(0)
    grid = np.linspace(-1, 1, 5)
    F = sample_field(p, c, grid)
    from spectral_interfaces.specfn import hermite_phi

    x, y = grid[3], grid[1]
    direct = sum(c[a] * hermite_phi([a, 6 - a], p.hbar, [x, y]) for a in range(7))
    assert F[1, 3] == pytest.approx(direct, rel=1e-12)


def test_monte_carlo_small_run_agrees_with_kac_rice():
    p = SemiclassicalParams(0.5, 60, 2)
    region = Annulus(0.45, 0.55)
    est = mc_nodal_volume(RandomEnsembleSpec(p, 7, 30), region, grid_n=512)
    kr = kacrice_annulus_average(p, region)
    assert abs(est.mean_density - kr) <= 3 * est.std_error
    with pytest.raises(DomainError):
        mc_nodal_volume(RandomEnsembleSpec(p, 7, 2), region, grid_n=128)


def test_no_forbidden_sign_domains():
    spec = RandomEnsembleSpec(SemiclassicalParams(0.5, 60, 2), 7, 4)
    assert forbidden_domain_violations(spec, 4) == 0
