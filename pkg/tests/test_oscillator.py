import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_interfaces.errors import CapacityError, DomainError
from spectral_interfaces.oscillator import (
    CausticFrame,
    SemiclassicalParams,
    airy_kernel,
    caustic_diagonal,
    caustic_diagonal_prefactor,
    caustic_limit_kernel,
    mehler_along_path,
    mehler_propagator,
    projection_kernel,
    projection_via_mehler,
)
from spectral_interfaces.specfn import airy_ai


def test_params_hbar_relation():
    p = SemiclassicalParams(0.5, 100, 2)
    assert p.hbar * (p.N + p.d / 2) == pytest.approx(0.5, rel=1e-15)
    assert p.dim == 101
    q = SemiclassicalParams.from_hbar(0.01, 10, 3)
    assert q.E == pytest.approx(0.01 * 11.5)


@pytest.mark.parametrize("E, N, d", [(0.0, 3, 1), (0.5, -1, 1), (0.5, 2, 0), (0.5, 2.5, 1)])
def test_params_reject_bad_input(E, N, d):
    with pytest.raises(DomainError):
        SemiclassicalParams(E, N, d)


def test_projection_kernel_high_precision_value():
    # d = 2, N = 5, hbar = 1/12: Hermite sum in mpmath at 40 digits
    p = SemiclassicalParams(0.5, 5, 2)
    assert projection_kernel(p, [0.4, -0.3], [-0.2, 0.5]) == pytest.approx(0.24953621884564244, rel=1e-12)


def test_projection_trace_is_dimension():
    p = SemiclassicalParams(0.5, 6, 2)
    t, w = np.polynomial.legendre.leggauss(120)
    L = 1.0 + 12 * math.sqrt(p.hbar)
    t, w = L * t, L * w
    total = sum(wi * wj * projection_kernel(p, [ti, tj], [ti, tj]) for ti, wi in zip(t, w) for tj, wj in zip(t, w))
    assert total == pytest.approx(p.dim, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(
    x=st.tuples(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2)),
    y=st.tuples(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2)),
    angle=st.floats(0, 2 * math.pi),
)
def test_projection_kernel_symmetric_and_rotation_invariant(x, y, angle):
    p = SemiclassicalParams(0.5, 9, 2)
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    a = projection_kernel(p, x, y)
    assert projection_kernel(p, y, x) == pytest.approx(a, abs=1e-12)
    assert projection_kernel(p, R @ np.array(x), R @ np.array(y)) == pytest.approx(a, abs=1e-10)


def test_projection_kernel_capacity_limit():
    with pytest.raises(CapacityError):
        projection_kernel(SemiclassicalParams(0.5, 3, 4), np.zeros(4), np.zeros(4))


@pytest.mark.parametrize("N, d", [(0, 1), (7, 1), (40, 1), (5, 2), (12, 3)])
def test_mehler_coefficient_equals_hermite_sum(N, d):
    p = SemiclassicalParams(0.5, N, d)
    rng = np.random.default_rng(N + 10 * d)
    x, y = rng.uniform(-0.8, 0.8, d), rng.uniform(-0.8, 0.8, d)
    assert projection_via_mehler(p, x, y) == pytest.approx(projection_kernel(p, x, y), abs=1e-9)


def test_mehler_path_branch_matches_principal_inside_strip():
    p = SemiclassicalParams(0.5, 4, 2)
    path = np.linspace(-2.5, 2.5, 201) - 0.3j
    vals = mehler_along_path(p, path, [0.2, 0.1], [-0.3, 0.4])
    for i in (0, 50, 100, 150, 200):
        assert vals[i] == pytest.approx(mehler_propagator(p, path[i], [0.2, 0.1], [-0.3, 0.4]), rel=1e-12)


def test_mehler_path_continues_past_the_strip():
    # d = 1: the factor (i sin t)^{-1/2} picks up a sign after a full period
    p = SemiclassicalParams(0.5, 3, 1)
    path = np.linspace(0.0, 2 * math.pi, 801) - 0.2j
    vals = mehler_along_path(p, path, [0.1], [0.3])
    assert vals[-1] == pytest.approx(-vals[0], rel=1e-10)


def test_mehler_rejects_real_time():
    p = SemiclassicalParams(0.5, 3, 1)
    with pytest.raises(DomainError):
        mehler_propagator(p, 0.5 + 0.0j, [0.0], [0.0])


def test_airy_kernel_value_and_diagonal():
    # int_0^inf Ai(0.3 + t) Ai(-0.8 + t) dt by mpmath quadrature
    assert airy_kernel(0.3, -0.8) == pytest.approx(0.089865217064884626, rel=1e-12)
    assert airy_kernel(0.5, 0.5 + 1e-9) == pytest.approx(airy_kernel(0.5, 0.5), rel=1e-7)


def test_caustic_limit_d1_is_airy_product():
    u, v = 0.4, -1.1
    c = 2 ** (1 / 3)
    expected = 2 ** (2 / 3) * float(airy_ai(c * u)) * float(airy_ai(c * v))
    assert caustic_limit_kernel(1, [u], [v]) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("u1", [-1.0, 0.0, 1.0])
def test_caustic_limit_diagonal_matches_weighted_airy(u1):
    lim = caustic_limit_kernel(2, [u1, 0.0], [u1, 0.0])
    assert lim == pytest.approx(caustic_diagonal(2, 2 * u1), rel=1e-9)


def test_caustic_diagonal_at_zero():
    # 2^{1-d} pi^{-d/2} Ai_{-1}(0) with Ai_{-1}(0) = int_0^inf Ai = 1/3
    assert caustic_diagonal(2, 0.0) == pytest.approx(1 / (6 * math.pi), rel=1e-12)
    with pytest.raises(DomainError):
        caustic_diagonal(2, 9.0)


@pytest.mark.parametrize("s", [-2.0, 0.0, 2.0])
def test_caustic_diagonal_finite_N(s):
    p = SemiclassicalParams(0.5, 200, 2)
    h = p.hbar
    x = np.array([math.sqrt(1 + h ** (2 / 3) * s), 0.0])
    scaled = projection_kernel(p, x, x) / caustic_diagonal_prefactor(h, 2)
    assert scaled == pytest.approx(caustic_diagonal(2, s), rel=0.01)


def test_caustic_frame_split_join():
    f = CausticFrame(np.array([0.6, 0.8]))
    u1, up = f.split([1.0, 2.0])
    assert u1 == pytest.approx(2.2)
    assert np.allclose(f.join(u1, up), [1.0, 2.0])
    with pytest.raises(DomainError):
        CausticFrame(np.array([1.0, 1.0]))
