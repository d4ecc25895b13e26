"""The double covering Spin^0(1,3) -> L_+^up in the Weyl representation.

The covering map is evaluated with the trace formula

    Lambda^a_b(S) = 1/4 eta^{ac} Tr(gamma_c S gamma_b S^{-1}),

its differential is ``dLambda(s)^a_b = 1/4 eta^{ac} Tr([gamma_b, gamma_c] s)``
and the inverse differential maps a generator ``lambda^a_b`` to the
bivector ``1/4 lambda^a_b eta^{bc} g_a g_c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.spatial.transform import Rotation

from .dirac_algebra import (
    ETA,
    MONOMIALS,
    AdjointPair,
    CliffordElement,
    GammaRep,
    find_adjoint_conjugation,
    weyl_representation,
)

__all__ = [
    "SpinElement",
    "LorentzMatrix",
    "BivectorElement",
    "Membership",
    "NotInSpinGroup",
    "BadGenerator",
    "LogBranchFailure",
    "covering_map",
    "d_lambda",
    "d_lambda_inverse",
    "lift",
    "spin_membership",
    "boost_curve",
    "rotation_curve",
    "random_spin_zero",
    "random_lorentz",
    "lorentz_residual",
]

_BIVECTOR_SLOTS = [i for i, m in enumerate(MONOMIALS) if len(m) == 2]
_BIVECTOR_PAIRS = [MONOMIALS[i] for i in _BIVECTOR_SLOTS]


class NotInSpinGroup(ValueError):
    """The matrix is not the image of an element of Spin^0(1,3)."""


class BadGenerator(ValueError):
    """The matrix is not an infinitesimal Lorentz transformation."""


class LogBranchFailure(ArithmeticError):
    """The rotation part has angle pi, where the spin lift is ambiguous."""


@lru_cache(maxsize=1)
def _weyl() -> tuple[GammaRep, AdjointPair]:
    rep = weyl_representation()
    return rep, find_adjoint_conjugation(rep)


@dataclass(frozen=True)
class SpinElement:
    """A 4x4 complex matrix in the Weyl representation."""

    S: np.ndarray

    def __post_init__(self) -> None:
        S = np.array(self.S, dtype=complex).reshape(4, 4)
        S.setflags(write=False)
        object.__setattr__(self, "S", S)

    def __matmul__(self, other: "SpinElement") -> "SpinElement":
        return SpinElement(self.S @ other.S)

    def __neg__(self) -> "SpinElement":
        return SpinElement(-self.S)

    def inverse(self) -> "SpinElement":
        return SpinElement(np.linalg.inv(self.S))

    @classmethod
    def from_clifford(cls, e: CliffordElement) -> "SpinElement":
        return cls(_weyl()[0].represent(e))


@dataclass(frozen=True)
class LorentzMatrix:
    """A real matrix ``Lambda^a_b``."""

    L: np.ndarray

    def __post_init__(self) -> None:
        L = np.array(self.L, dtype=float).reshape(4, 4)
        L.setflags(write=False)
        object.__setattr__(self, "L", L)

    def __matmul__(self, other: "LorentzMatrix") -> "LorentzMatrix":
        return LorentzMatrix(self.L @ other.L)

    def is_proper_orthochronous(self, tol: float = 1e-10) -> bool:
        return (
            lorentz_residual(self.L) <= tol
            and abs(np.linalg.det(self.L) - 1.0) <= tol
            and self.L[0, 0] >= 1.0 - tol
        )


@dataclass(frozen=True)
class BivectorElement:
    """Coefficients on ``g_a g_b`` (a<b) in canonical order (01, 02, 03, 12, 13, 23)."""

    lambda_coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.lambda_coeffs, dtype=float).reshape(6)
        c.setflags(write=False)
        object.__setattr__(self, "lambda_coeffs", c)

    def to_clifford(self) -> CliffordElement:
        c = np.zeros(16)
        c[_BIVECTOR_SLOTS] = self.lambda_coeffs
        return CliffordElement(c)

    def matrix(self) -> np.ndarray:
        return _weyl()[0].represent(self.to_clifford())

    @property
    def pairs(self) -> list[tuple[int, ...]]:
        return list(_BIVECTOR_PAIRS)


class Membership(str, Enum):
    NotPin = "NotPin"
    PinOnly = "PinOnly"
    SpinNotIdentityComponent = "SpinNotIdentityComponent"
    SpinZero = "SpinZero"


def lorentz_residual(L: np.ndarray) -> float:
    """``max |L^T eta L - eta|``."""
    return float(np.max(np.abs(L.T @ ETA @ L - ETA)))


def spin_membership(S: np.ndarray, tol: float = 1e-10) -> Membership:
    """Classify a 4x4 matrix against Pin, Spin and Spin^0.

    Pin requires ``det S = 1``, real Clifford coefficients and
    ``S gamma_a S^{-1}`` in the real span of the gammas. Spin additionally
    requires evenness, and Spin^0 requires ``S^* A S = A``.
    """
    rep, ac = _weyl()
    S = np.asarray(S, dtype=complex)
    if abs(np.linalg.det(S) - 1.0) > tol:
        return Membership.NotPin
    coeffs = rep.decompose(S)
    if np.max(np.abs(coeffs.imag)) > tol:
        return Membership.NotPin
    Sinv = np.linalg.inv(S)
    for g in rep.gammas:
        X = S @ g @ Sinv
        c = np.einsum("bij,ji->b", rep.upper, X) / 4.0
        if np.max(np.abs(c.imag)) > tol:
            return Membership.NotPin
        if np.max(np.abs(X - np.tensordot(c.real, rep.gammas, axes=(0, 0)))) > tol:
            return Membership.NotPin
    odd = np.array([len(m) % 2 == 1 for m in MONOMIALS])
    if np.max(np.abs(coeffs[odd])) > tol:
        return Membership.PinOnly
    if np.max(np.abs(S.conj().T @ ac.A @ S - ac.A)) > tol * max(1.0, np.abs(S).max() ** 2):
        return Membership.SpinNotIdentityComponent
    return Membership.SpinZero


def _covering_raw(S: np.ndarray) -> np.ndarray:
    rep, _ = _weyl()
    Sinv = np.linalg.inv(S)
    # T[c, b] = Tr(gamma_c S gamma_b S^-1)
    conj = np.einsum("ij,bjk,kl->bil", S, rep.gammas, Sinv)
    T = np.einsum("cij,bji->cb", rep.gammas, conj)
    return (ETA @ T).real / 4.0


def covering_map(S: SpinElement | np.ndarray, check: bool = True, tol: float = 1e-10) -> LorentzMatrix:
    """Lorentz matrix ``Lambda(S)`` of a Spin^0 element.

    Raises
    ------
    NotInSpinGroup
        If ``check`` is set and ``S`` is not in Spin^0.
    """
    M = S.S if isinstance(S, SpinElement) else np.asarray(S, dtype=complex)
    if check:
        scale = max(1.0, float(np.abs(M).max()) ** 2)
        cls = spin_membership(M, tol * scale)
        if cls is not Membership.SpinZero:
            raise NotInSpinGroup(cls.value)
    return LorentzMatrix(_covering_raw(M))


def d_lambda(s: np.ndarray) -> np.ndarray:
    """Differential of the covering map at the identity, applied to a matrix ``s``."""
    rep, _ = _weyl()
    g = rep.gammas
    comm = np.einsum("bij,cjk->bcik", g, g) - np.einsum("cij,bjk->bcik", g, g)
    T = np.einsum("bcij,ji->cb", comm, s)  # T[c, b] = Tr([g_b, g_c] s)
    return (ETA @ T).real / 4.0


def _check_generator(lam: np.ndarray, tol: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (4, 4):
        raise BadGenerator("generator must be 4x4")
    low = lam @ ETA  # lambda^a_b eta^{bc}
    if np.max(np.abs(low + low.T)) > tol * max(1.0, np.abs(lam).max()):
        raise BadGenerator("lambda eta is not antisymmetric")
    return low


def d_lambda_inverse(lam: np.ndarray, tol: float = 1e-10) -> BivectorElement:
    """Bivector ``1/4 lambda^a_b eta^{bc} g_a g_c`` for a Lorentz generator.

    Raises
    ------
    BadGenerator
        If ``lambda^a_b eta^{bc}`` is not antisymmetric.
    """
    up = _check_generator(lam, tol)
    # sum over a != c of 1/4 up[a,c] g_a g_c = sum_{a<c} 1/2 up[a,c] g_a g_c
    return BivectorElement([0.5 * up[a, c] for a, c in _BIVECTOR_PAIRS])


def _exp_bivector(lam: np.ndarray) -> np.ndarray:
    return expm(d_lambda_inverse(lam).matrix())


def _boost_generator(u: np.ndarray) -> np.ndarray:
    """Generator of the pure boost taking (1,0,0,0) to the unit timelike vector ``u``."""
    spatial = u[1:]
    norm = np.linalg.norm(spatial)
    lam = np.zeros((4, 4))
    if norm < 1e-15:
        return lam
    phi = np.arccosh(max(u[0], 1.0))
    n = spatial / norm
    lam[0, 1:] = phi * n
    lam[1:, 0] = phi * n
    return lam


def _rotation_generator(R3: np.ndarray, tol: float) -> np.ndarray:
    rv = Rotation.from_matrix(R3).as_rotvec()
    angle = float(np.linalg.norm(rv))
    if abs(angle - np.pi) <= tol:
        raise LogBranchFailure("rotation angle equals pi")
    lam = np.zeros((4, 4))
    # lambda^i_j = -eps_ijk w_k generates x -> R x
    wx, wy, wz = rv
    lam[1:, 1:] = np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])
    return lam


def lift(L: LorentzMatrix | np.ndarray, tol: float = 1e-10) -> SpinElement:
    """A Spin^0 element covering a proper orthochronous Lorentz matrix.

    The matrix is split as boost times rotation, each factor is mapped to
    its generator, pushed through the inverse differential and
    exponentiated. The representative with ``Re tr S >= 0`` is returned.

    Raises
    ------
    LogBranchFailure
        If the rotation factor has angle pi.
    ValueError
        If ``L`` is not proper orthochronous.
    """
    Lm = L.L if isinstance(L, LorentzMatrix) else np.asarray(L, dtype=float)
    if not LorentzMatrix(Lm).is_proper_orthochronous(1e-8):
        raise ValueError("not a proper orthochronous Lorentz matrix")
    u = Lm[:, 0]
    lam_b = _boost_generator(u)
    B = expm(lam_b)
    R = np.linalg.solve(B, Lm)
    lam_r = _rotation_generator(R[1:, 1:], tol)
    S = _exp_bivector(lam_b) @ _exp_bivector(lam_r)
    if np.trace(S).real < 0:
        S = -S
    return SpinElement(S)


# ----------------------------------------------------------------------
# curves and samplers
# ----------------------------------------------------------------------


def boost_curve(i: int, t: float) -> SpinElement:
    """``c_i(t) = g_0 (cosh t g_0 + sinh t g_i) = cosh t + sinh t g_0 g_i``."""
    e = CliffordElement.scalar(np.cosh(t)) + CliffordElement.monomial((0, i), np.sinh(t))
    return SpinElement.from_clifford(e)


def rotation_curve(i: int, j: int, t: float) -> SpinElement:
    """``d_ij(t) = -g_i (cos t g_i - sin t g_j) = cos t + sin t g_i g_j``."""
    e = CliffordElement.scalar(np.cos(t)) + CliffordElement.monomial((i, j), np.sin(t))
    return SpinElement.from_clifford(e)


def random_spin_zero(rng: np.random.Generator, factors: int = 4, scale: float = 1.0) -> SpinElement:
    """Random product of boost and rotation curves."""
    S = SpinElement(np.eye(4))
    for _ in range(factors):
        if rng.random() < 0.5:
            S = S @ boost_curve(int(rng.integers(1, 4)), scale * rng.normal() * 0.5)
        else:
            i, j = sorted(rng.choice([1, 2, 3], size=2, replace=False))
            S = S @ rotation_curve(int(i), int(j), scale * rng.uniform(-np.pi, np.pi))
    return S


def random_lorentz(rng: np.random.Generator, max_rapidity: float = 1.5) -> LorentzMatrix:
    """Random proper orthochronous Lorentz matrix (boost times rotation)."""
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    phi = rng.uniform(0, max_rapidity)
    lam = np.zeros((4, 4))
    lam[0, 1:] = lam[1:, 0] = phi * n
    R = np.eye(4)
    R[1:, 1:] = Rotation.random(random_state=rng).as_matrix()
    return LorentzMatrix(expm(lam) @ R)
