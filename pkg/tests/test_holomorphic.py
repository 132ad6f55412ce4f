import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from spectral_interfaces.errors import DomainError, NumericalError
from spectral_interfaces.holomorphic import (
    LiftedPoint,
    LineBundleBFModel,
    SpcBlock,
    bargmann_transform_check,
    bf_bergman,
    bf_eigenprojection_diag,
    bf_level_dimension,
    bf_partial_density,
    bf_partial_density_limit,
    cp1_model_build,
    heisenberg_flow,
    lifted_metaplectic_kernel,
    lifted_szego,
    linebundle_bf_density,
    metaplectic_kernel,
    szasz_cdf_limit,
    toeplitz_metaplectic_quadrature,
)
from spectral_interfaces.holomorphic.cp1 import (
    QuadratureSpec,
    critical_scaling,
    full_density,
    grad_H_norm,
    grad_H_norm_numeric,
    level_point,
    moment_map,
    pbk_density,
    pbk_interface_profile,
    pbk_smoothed_level,
    rotation_U,
    scaled_propagator_trace,
    section_log_densities,
    smoothed_level_limit,
    trace_relative_error,
)
from spectral_interfaces.windows import FourierWindow


def _random_symplectic(seed):
    rng = np.random.default_rng(seed)
    m = 2
    A = rng.standard_normal((2 * m, 2 * m)) * 0.5
    J = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
    return expm(J @ (A + A.T))


# ---------------------------------------------------------------------------
# Bargmann-Fock space


def test_bergman_kernel_values_and_overflow_guard():
    k = 3.0
    z, w = [0.2 + 0.1j], [-0.3 + 0.4j]
    expected = k / (2 * math.pi) * cmath.exp(k * (0.2 + 0.1j) * (-0.3 - 0.4j))
    assert bf_bergman(k, 0, z, w) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(NumericalError):
        bf_bergman(1000.0, 0, [1.0], [1.0])
    assert bf_bergman(1000.0, 0, [1.0], [1.0], log=True).real == pytest.approx(math.log(1000 / (2 * math.pi)) + 1000)
    with pytest.raises(DomainError):
        bf_bergman(1.0, 1, [1.0], [1.0, 0.0])


def test_bergman_reproduces_itself():
    # int K(z, w) K(w, z') exp(-k|w|^2) 2 dx dy = K(z, z') for m = 0
    k = 2.0
    x, wq = np.polynomial.legendre.leggauss(120)
    L = 7.0
    x, wq = L * x, L * wq
    W = x[:, None] + 1j * x[None, :]
    z, zp = 0.3 - 0.2j, -0.1 + 0.5j
    kern = (k / (2 * math.pi)) ** 2 * np.exp(k * z * W.conj() + k * W * np.conj(zp) - k * np.abs(W) ** 2)
    val = np.sum(kern * wq[:, None] * wq[None, :]) * 2
    assert val == pytest.approx(bf_bergman(k, 0, [z], [zp]), rel=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_level_projectors_sum_to_bergman_and_integrate_to_dimension(m):
    k = 5.0
    Z = np.array([0.3 + 0.1j] + [0.2j] * m)
    total = sum(bf_eigenprojection_diag(k, m, N, Z) for N in range(200))
    assert total == pytest.approx(bf_bergman(k, m, Z, Z).real, rel=1e-12)
    # radial integral of the level-N diagonal against exp(-k|Z|^2) omega^{m+1}/(m+1)!
    N = 4
    n = m + 1
    # omega^n/n! = 2^n dL; polar volume of the unit sphere in C^n is 2 pi^n/(n-1)!
    integrand = lambda r: bf_eigenprojection_diag(k, m, N, [r] + [0] * m) * math.exp(-k * r * r) * r ** (2 * n - 1)
    radial = float(mpmath.quad(integrand, [0, 2, 8]))
    assert 2**n * 2 * math.pi**n / math.factorial(n - 1) * radial == pytest.approx(bf_level_dimension(m, N), rel=1e-10)


def test_level_projector_monomial_oracle():
    # (k/2pi)^{m+1} sum_{|alpha| = N} k^N |Z^alpha|^2 / alpha!
    k, m, N = 7.0, 1, 3
    Z = np.array([0.4 - 0.2j, 0.3 + 0.5j])
    mono = sum(k**N * abs(Z[0]) ** (2 * a) * abs(Z[1]) ** (2 * (N - a)) / (math.factorial(a) * math.factorial(N - a)) for a in range(N + 1))
    assert bf_eigenprojection_diag(k, m, N, Z) == pytest.approx((k / (2 * math.pi)) ** 2 * mono, rel=1e-13)
    assert bf_eigenprojection_diag(k, m, 2, [0.0, 0.0]) == 0.0


def test_partial_density_against_poisson_cdf():
    # P(Poisson(10100) <= 10000) from mpmath's regularised incomplete gamma
    assert bf_partial_density(1e4, 0, 1.0, [math.sqrt(1.01)]) == pytest.approx(0.16107895550326105, rel=1e-9)
    # the level weights do not depend on m
    v0 = bf_partial_density(400.0, 0, 0.8, [0.9])
    v2 = bf_partial_density(400.0, 2, 0.8, [0.9, 0, 0])
    assert v0 == pytest.approx(v2, rel=1e-14)


def test_partial_density_limit_shape():
    assert bf_partial_density_limit(1.0, 0.0) == pytest.approx(0.5)
    assert bf_partial_density_limit(4.0, 1.0) == pytest.approx(float(mpmath.ncdf(-2.0)), rel=1e-12)


def test_szasz_weighted_sum_against_direct():
    k, x, E, m = 50.0, 0.9, 1.0, 1
    terms = [mpmath.mpf(k * x) ** N * N**m / mpmath.factorial(N + m) for N in range(400)]
    direct = float(sum(terms[: int(k * E * E) + 1]) / sum(terms))
    val, lim = szasz_cdf_limit(k, x, E, m)
    assert val == pytest.approx(direct, rel=1e-12)
    assert lim == pytest.approx(float(mpmath.ncdf(math.sqrt(k) * (E * E - x) / math.sqrt(x))), rel=1e-12)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_linebundle_gaussian_has_unit_mass(m):
    assert LineBundleBFModel(m, 200.0, vol_X=3.0).gaussian_mass() == pytest.approx(1.0, rel=1e-12)


def test_linebundle_density_near_limit():
    model = LineBundleBFModel(1, 100.0)
    val, lim = linebundle_bf_density(model, 0.8, -1.0)
    assert lim == pytest.approx(float(mpmath.ncdf(1.6)))
    assert abs(val - lim) < 0.01
    with pytest.raises(DomainError):
        LineBundleBFModel(-1, 1.0)


@pytest.mark.parametrize("n", [0, 1, 4, 8])
def test_bargmann_transform_of_hermite_functions(n):
    rep = bargmann_transform_check(n)
    assert rep.residual < 1e-10
    assert rep.norm_ratio == pytest.approx(1.0, rel=1e-8)
    assert abs(rep.coefficient) == pytest.approx(1 / math.sqrt(math.factorial(n)), rel=1e-10)


# ---------------------------------------------------------------------------
# symplectic blocks and metaplectic kernels


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_blocks_from_real_symplectic_matrices(seed):
    blk = SpcBlock.from_real(_random_symplectic(seed))
    assert blk.identity_residual() < 1e-10
    ident = blk.compose(blk.inverse())
    assert np.allclose(ident.P, np.eye(2), atol=1e-10) and np.allclose(ident.Q, 0, atol=1e-10)
    assert abs(blk.det_P()) >= 1 - 1e-10  # P P* = I + Q Q*


def test_block_validation():
    with pytest.raises(DomainError):
        SpcBlock(np.array([[2.0]]), np.array([[0.0]]))
    with pytest.raises(DomainError):
        SpcBlock.from_real(np.array([[2.0, 0.0], [0.0, 2.0]]))


def test_rotation_kernel_is_mode_sum_past_half_turn():
    k = 2.0
    z, w = 0.3 + 0.2j, -0.1 + 0.25j
    for t in (0.4, 2.5, 4.0, 6.0):
        expected = k / (2 * math.pi) * np.exp(-0.5j * t + k * np.exp(-1j * t) * z * np.conj(w))
        assert metaplectic_kernel(k, SpcBlock.rotation(t), [z], [w]) == pytest.approx(expected, rel=1e-13)


def test_path_continuation_flips_the_root_after_a_full_turn():
    ts = np.linspace(0, 2 * math.pi, 400)
    blk = SpcBlock.along_path([SpcBlock(np.array([[np.exp(1j * t)]]), np.zeros((1, 1))) for t in ts])
    assert blk.sqrt_det() == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize(
    "blk",
    [SpcBlock.squeeze(0.4), SpcBlock.from_real([[1.0, 0.7], [0.0, 1.0]]), SpcBlock.rotation(1.1)],
    ids=["squeeze", "shear", "rotation"],
)
def test_toeplitz_quadrature_reproduces_lifted_kernel(blk):
    k = 3.0
    zh, wh = LiftedPoint([0.3 + 0.2j], 0.4), LiftedPoint([-0.1 + 0.25j], -0.2)
    q = toeplitz_metaplectic_quadrature(k, blk, zh, wh)
    assert q == pytest.approx(lifted_metaplectic_kernel(k, blk, zh, wh), rel=1e-11)


def test_toeplitz_quadrature_detects_small_box():
    zh = LiftedPoint([0.3 + 0.2j], 0.0)
    with pytest.raises(NumericalError):
        toeplitz_metaplectic_quadrature(3.0, SpcBlock.squeeze(0.4), zh, zh, half_width=0.5)


def test_identity_block_gives_szego_kernel():
    k = 4.0
    zh, wh = LiftedPoint([0.1 - 0.3j], 0.7), LiftedPoint([0.2 + 0.05j], -0.1)
    assert lifted_metaplectic_kernel(k, SpcBlock.identity(1), zh, wh) == pytest.approx(lifted_szego(k, zh, wh), rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(-2, 2), br=st.floats(-1, 1), bi=st.floats(-1, 1))
def test_heisenberg_flow_preserves_szego_kernel(t, br, bi):
    k = 5.0
    beta = complex(br, bi)
    zh, wh = LiftedPoint([0.1 - 0.3j], 0.7), LiftedPoint([0.2 + 0.05j], -0.1)
    a = lifted_szego(k, heisenberg_flow(beta, t, zh), heisenberg_flow(beta, t, wh))
    assert a == pytest.approx(lifted_szego(k, zh, wh), rel=1e-10, abs=1e-14)


# ---------------------------------------------------------------------------
# CP^1


@pytest.fixture(scope="module")
def model2000():
    return cp1_model_build(2000)


def test_norms_are_beta_integrals():
    m = cp1_model_build(40)
    for j in (0, 7, 20, 40):
        exact = 2 * math.pi * mpmath.beta(j + 1, 40 - j + 1)
        assert m.norms[j] == pytest.approx(float(exact), rel=1e-12)
    assert m.max_norm_error < 1e-9 and m.max_eig_error < 1e-9
    assert np.array_equal(m.eigenvalues, np.arange(41) / 40)


def test_large_k_samples_levels():
    m = cp1_model_build(20000)
    assert m.checked_levels.size < 300 and 10000 in m.checked_levels
    with pytest.raises(DomainError):
        cp1_model_build(0)


def test_build_fails_on_too_coarse_quadrature():
    with pytest.raises(NumericalError):
        cp1_model_build(200, QuadratureSpec(panels=1, order=2))


@settings(max_examples=20, deadline=None)
@given(r=st.floats(0.0, 30.0), phase=st.floats(0, 2 * math.pi))
def test_full_density_is_constant(r, phase):
    m = cp1_model_build(60)
    z = r * complex(math.cos(phase), math.sin(phase))
    assert full_density(m, z) == pytest.approx(61 / (2 * math.pi), rel=1e-12)


def test_section_densities_are_binomial():
    m = cp1_model_build(30)
    z = 0.8 + 0.3j
    p = abs(z) ** 2 / (1 + abs(z) ** 2)
    probs = np.exp(section_log_densities(m, z)) * 2 * math.pi / 31
    expected = [float(mpmath.binomial(30, j) * p**j * (1 - p) ** (30 - j)) for j in range(31)]
    assert np.allclose(probs, expected, rtol=1e-12, atol=1e-300)


def test_gradient_norm_closed_form():
    for r in (0.3, 1.0, 2.5):
        assert float(grad_H_norm(r)) == pytest.approx(grad_H_norm_numeric(r), rel=1e-8)
    assert float(moment_map(level_point(0.3, 1.0))) == pytest.approx(0.3)


def test_partial_density_regions(model2000):
    assert pbk_density(model2000, 0.5, level_point(0.2)) == pytest.approx(1.0, abs=1e-12)
    assert pbk_density(model2000, 0.5, level_point(0.8)) < 1e-100
    assert pbk_density(model2000, 0.5, level_point(0.5)) == pytest.approx(0.5, abs=0.02)
    with pytest.raises(DomainError):
        pbk_density(model2000, 1.0, 0.5)


def test_interface_profiles(model2000):
    v, lim = pbk_interface_profile(model2000, 0.5, 0.5, "geodesic")
    assert lim == pytest.approx(float(mpmath.ncdf(math.sqrt(2) * 0.5)))
    assert abs(v - lim) < 0.02
    v, lim = pbk_interface_profile(model2000, 0.5, 1.0, "gradient_flow")
    assert abs(v - lim) < 0.02
    v, lim = pbk_interface_profile(model2000, 0.5, 0.0, "spectral_cdf")
    assert v / lim == pytest.approx(1.0, abs=0.02)
    with pytest.raises(DomainError):
        pbk_interface_profile(model2000, 0.5, 0.0, "sideways")
    with pytest.raises(DomainError):
        pbk_interface_profile(model2000, 0.5, 0.0, "geodesic", z=0.1)


def test_smoothed_level_density(model2000):
    f = FourierWindow.bump(2.0)
    a, la = pbk_smoothed_level(model2000, 0.5, f, 0.7)
    b, lb = pbk_smoothed_level(model2000, 0.5, f, -0.7)
    assert la == pytest.approx(lb)
    assert a == pytest.approx(la, rel=5e-3)
    assert b == pytest.approx(lb, rel=5e-3)
    assert smoothed_level_limit(2000, 0.5, 0.0) > la
    with pytest.raises(DomainError):
        pbk_smoothed_level(model2000, 0.5, FourierWindow.bump(7.0, truncate=None), 0.0)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(-3, 3), ur=st.floats(-1.5, 1.5), ui=st.floats(-1.5, 1.5))
def test_rotation_factor_closed_form(t, ur, ui):
    u = complex(ur, ui)
    expected = np.exp(-0.5j * t) * np.exp(abs(u) ** 2 * (np.exp(-1j * t) - 1))
    assert rotation_U(t, u) == pytest.approx(expected, rel=1e-12, abs=1e-14)
    assert rotation_U(t, u, half_form=False) == pytest.approx(expected * np.exp(0.5j * t), rel=1e-12, abs=1e-14)


def test_quarter_scaling_at_the_critical_point():
    f = FourierWindow.bump(2.0)
    m = cp1_model_build(4000)
    v, lim = critical_scaling(m, f, 0.0, "quarter")
    # at u = 0 only the j = 0 section survives: (k+1)/(2 pi) f(0) against (k/2 pi) f(0)
    assert v / lim == pytest.approx(4001 / 4000, rel=1e-9)
    v, lim = critical_scaling(m, f, 0.7 + 0.2j, "quarter")
    assert v == pytest.approx(lim, rel=2e-3)
    with pytest.raises(DomainError):
        critical_scaling(m, f, 0.0, "eighth")


def test_half_scaling_at_the_critical_point(model2000):
    f = FourierWindow.bump(2.0)
    v, lim = critical_scaling(model2000, f, 0.5 + 0.5j, "half")
    assert v == pytest.approx(lim.real, rel=2e-3)
    assert abs(lim.imag) < 1e-8 * abs(lim)


def test_trace_is_geometric_sum(model2000):
    t = 0.7
    lam = math.sqrt(2000) * t
    tr, sp = scaled_propagator_trace(model2000, t)
    q = np.exp(1j * lam / 2000)
    assert tr == pytest.approx((1 - q**2001) / (1 - q), rel=1e-10)
    # the error stays inside the envelope |t| / (2 sqrt k)
    assert trace_relative_error(model2000, t) <= 1.01 * t / (2 * math.sqrt(2000))
    with pytest.raises(DomainError):
        scaled_propagator_trace(model2000, 0.0)
