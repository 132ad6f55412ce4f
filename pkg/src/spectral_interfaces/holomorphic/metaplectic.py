"""Complex symplectic blocks, metaplectic Bargmann-Fock kernels and the lifted Szego kernel.

A real symplectic matrix S acting on (x, y) in R^{2m} is conjugated by the Bargmann
change of basis W = (1/sqrt 2) [[I, I], [-iI, iI]] to W^{-1} S W = [[P, Q], [Qbar, Pbar]].
The block (P, Q) acts on C^m by z -> P z + Q zbar.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, NumericalError

__all__ = [
    "SpcBlock",
    "LiftedPoint",
    "metaplectic_kernel",
    "lifted_metaplectic_kernel",
    "lifted_szego",
    "heisenberg_flow",
    "toeplitz_metaplectic_quadrature",
    "CAUSTIC_DET_TOL",
]

CAUSTIC_DET_TOL = 1e-12


def _bargmann_basis(m: int) -> np.ndarray:
    eye = np.eye(m)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]]) / math.sqrt(2.0)


@dataclass(frozen=True)
class SpcBlock:
    """The pair (P, Q) of a complex symplectic block, with a chosen sign of sqrt(det P).

    ``sqrt_sign`` selects the branch: sqrt(det P) = sqrt_sign * principal sqrt.
    Use :meth:`along_path` to fix it by continuity from the identity.
    """

    P: np.ndarray
    Q: np.ndarray
    sqrt_sign: int = 1
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=complex))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=complex))
        if P.shape != Q.shape or P.shape[0] != P.shape[1]:
            raise DomainError("P and Q must be square matrices of equal size")
        if self.sqrt_sign not in (1, -1):
            raise DomainError("sqrt_sign must be +1 or -1")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        res = self.identity_residual()
        if res > self.tol * max(1.0, np.abs(P).max() ** 2, np.abs(Q).max() ** 2):
            raise DomainError(f"(P, Q) is not a symplectic block (residual {res:.2e})")

    @property
    def m(self) -> int:
        return self.P.shape[0]

    # -- constructors -----------------------------------------------------

    @classmethod
    def identity(cls, m: int) -> "SpcBlock":
        return cls(np.eye(m), np.zeros((m, m)))

    @classmethod
    def from_real(cls, S, sqrt_sign: int = 1) -> "SpcBlock":
        S = np.asarray(S, dtype=float)
        n = S.shape[0]
        if S.shape != (n, n) or n % 2:
            raise DomainError("S must be a 2m x 2m matrix")
        m = n // 2
        J = np.block([[np.zeros((m, m)), np.eye(m)], [-np.eye(m), np.zeros((m, m))]])
        if np.abs(S.T @ J @ S - J).max() > 1e-9 * max(1.0, np.abs(S).max() ** 2):
            raise DomainError("S is not symplectic")
        W = _bargmann_basis(m)
        M = np.linalg.solve(W, S @ W)
        return cls(M[:m, :m], M[:m, m:], sqrt_sign)

    @classmethod
    def rotation(cls, t: float, m: int = 1) -> "SpcBlock":
        """P = exp(i t) I, sqrt(det P) continued from t = 0.

        The kernel is then sum_N exp(-i t (N + m/2)) times the degree-N projector.
        """
        P = np.exp(1j * t) * np.eye(m)
        blk = cls(P, np.zeros((m, m)))
        cont = cmath.exp(0.5j * m * t)
        return blk._with_sqrt(cont)

    @classmethod
    def squeeze(cls, r: float, m: int = 1) -> "SpcBlock":
        """Diagonal squeeze diag(e^r, e^-r) in each (x_j, y_j) pair."""
        return cls(np.cosh(r) * np.eye(m), np.sinh(r) * np.eye(m))

    @classmethod
    def along_path(cls, blocks) -> "SpcBlock":
        """Last block of a sampled path, with sqrt(det P) continued along the samples."""
        blocks = list(blocks)
        if not blocks:
            raise DomainError("empty path")
        root = blocks[0].sqrt_det()
        for b in blocks[1:]:
            cand = cmath.sqrt(complex(np.linalg.det(b.P)))
            root = cand if abs(cand - root) <= abs(cand + root) else -cand
        return blocks[-1]._with_sqrt(root)

    def _with_sqrt(self, target: complex) -> "SpcBlock":
        principal = cmath.sqrt(complex(np.linalg.det(self.P)))
        sign = 1 if abs(principal - target) <= abs(principal + target) else -1
        return SpcBlock(self.P, self.Q, sign, self.tol)

    # -- algebra ----------------------------------------------------------

    def matrix(self) -> np.ndarray:
        return np.block([[self.P, self.Q], [self.Q.conj(), self.P.conj()]])

    def inverse(self) -> "SpcBlock":
        return SpcBlock(self.P.conj().T, -self.Q.T, 1, self.tol)

    def compose(self, other: "SpcBlock") -> "SpcBlock":
        """Block of ``self @ other``; the square-root branch is the principal one."""
        M = self.matrix() @ other.matrix()
        m = self.m
        return SpcBlock(M[:m, :m], M[:m, m:], 1, self.tol)

    def identity_residual(self) -> float:
        P, Q = self.P, self.Q
        I = np.eye(P.shape[0])
        checks = (
            P @ P.conj().T - Q @ Q.conj().T - I,
            P @ Q.T - Q @ P.T,
            P.conj().T @ P - Q.T @ Q.conj() - I,
            P.T @ Q.conj() - Q.conj().T @ P,
        )
        return float(max(np.abs(c).max() for c in checks))

    def det_P(self) -> complex:
        return complex(np.linalg.det(self.P))

    def sqrt_det(self) -> complex:
        return self.sqrt_sign * cmath.sqrt(self.det_P())

    def apply(self, z):
        z = np.asarray(z, dtype=complex)
        return self.P @ z + self.Q @ z.conj()


@dataclass(frozen=True)
class LiftedPoint:
    """A point (z, theta) of the circle bundle over C^m."""

    z: np.ndarray
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "theta", float(self.theta))


def _check_caustic(block: SpcBlock):
    det = block.det_P()
    if abs(det) < CAUSTIC_DET_TOL:
        raise NumericalError("det P vanishes: the block lies on a caustic", {"det_P": det})
    return det


def metaplectic_kernel(k: float, block: SpcBlock, z, w) -> complex:
    """Kernel (k/2pi)^m (det P)^{-1/2} exp{(k/2)(z.Qbar P^-1 z + 2 wbar.P^-1 z - wbar.P^-1 Q wbar)}.

    It is relative to the measure exp(-k|w|^2) (i dw.dwbar)^m / m!.
    """
    if k <= 0:
        raise DomainError("k must be positive")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if z.size != block.m or w.size != block.m:
        raise DomainError("point dimension does not match the block")
    _check_caustic(block)
    Pinv = np.linalg.inv(block.P)
    wb = w.conj()
    expo = z @ (block.Q.conj() @ Pinv) @ z + 2 * wb @ Pinv @ z - wb @ (Pinv @ block.Q) @ wb
    return complex((k / (2 * math.pi)) ** block.m / block.sqrt_det() * np.exp(0.5 * k * expo))


def lifted_metaplectic_kernel(k: float, block: SpcBlock, zh: LiftedPoint, wh: LiftedPoint) -> complex:
    base = metaplectic_kernel(k, block, zh.z, wh.z)
    lift = k * (1j * zh.theta - 0.5 * np.vdot(zh.z, zh.z).real) + k * (
        -1j * wh.theta - 0.5 * np.vdot(wh.z, wh.z).real
    )
    return complex(base * np.exp(lift))


def lifted_szego(k: float, zh: LiftedPoint, wh: LiftedPoint) -> complex:
    """(k/2pi)^m exp(k psi) with psi = i(theta_z - theta_w) + z.wbar - |z|^2/2 - |w|^2/2."""
    z, w = zh.z, wh.z
    if z.size != w.size:
        raise DomainError("points live in different dimensions")
    psi = 1j * (zh.theta - wh.theta) + z @ w.conj() - 0.5 * (z @ z.conj()) - 0.5 * (w @ w.conj())
    return complex((k / (2 * math.pi)) ** z.size * np.exp(k * psi))


def heisenberg_flow(beta, t: float, zh: LiftedPoint) -> LiftedPoint:
    """Contact flow of the linear Hamiltonian z.betabar + beta.zbar."""
    beta = np.atleast_1d(np.asarray(beta, dtype=complex))
    z = zh.z
    return LiftedPoint(z - 1j * beta * t, zh.theta - t * float(np.real(beta.conj() @ z)))


def toeplitz_metaplectic_quadrature(
    k: float, block: SpcBlock, zh: LiftedPoint, wh: LiftedPoint, half_width: float | None = None, nodes: int = 160
) -> complex:
    """(det P*)^{1/2} int_X Pi(zh, A uh) Pi(uh, wh) dVol_X for m = 1, by tensor Gauss-Legendre.

    The theta integral is exact (the integrand does not depend on it), so only the
    base integral over C with i du.dubar = 2 dx dy remains.
    """
    if block.m != 1:
        raise DomainError("quadrature check is implemented for m = 1")
    L = half_width or (8.0 / math.sqrt(k) + 2.0 * float(np.abs(np.concatenate([zh.z, wh.z])).max()))
    x, wq = np.polynomial.legendre.leggauss(nodes)
    x, wq = L * x, L * wq
    U = x[:, None] + 1j * x[None, :]
    Wt = wq[:, None] * wq[None, :]
    P, Q = block.P[0, 0], block.Q[0, 0]
    AU = P * U + Q * U.conj()
    z, w = zh.z[0], wh.z[0]

    def psi(a, b):
        return a * np.conj(b) - 0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2

    expo = k * (1j * (zh.theta - wh.theta) + psi(z, AU) + psi(U, w))
    integrand = (k / (2 * math.pi)) ** 2 * np.exp(expo) * 2.0
    integral = complex(np.sum(integrand * Wt))
    if abs(integrand[[0, -1], :]).max() > 1e-10 * max(1.0, abs(integral)):
        raise NumericalError("quadrature box too small", {"half_width": L})
    root = cmath.sqrt(complex(np.conj(P)))
    return root * integral
