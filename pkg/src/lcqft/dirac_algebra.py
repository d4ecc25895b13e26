"""Exact arithmetic in the real Clifford algebra Cl(1,3) and its 4x4 representations.

The algebra is generated by ``g_0..g_3`` subject to
``g_a g_b + g_b g_a = 2 eta_ab I`` with ``eta = diag(1, -1, -1, -1)``.
Elements are stored as 16 real coefficients on the canonical monomial basis

    I; g_0..g_3; g_a g_b (a<b); g_a g_b g_c (a<b<c); g_5 = g_0 g_1 g_2 g_3

and products are evaluated through a multiplication table that is generated
once from the defining relations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

__all__ = [
    "ETA",
    "MONOMIALS",
    "CliffordElement",
    "GammaRep",
    "Intertwiner",
    "AdjointPair",
    "NoIntertwiner",
    "NoSolution",
    "clifford_product",
    "weyl_representation",
    "standard_representation",
    "conjugated_representation",
    "represent_trace_det",
    "find_intertwiner",
    "find_adjoint_conjugation",
    "nullspace",
    "slash",
]

ETA = np.diag([1.0, -1.0, -1.0, -1.0])

#: canonical monomial ordering, each entry a sorted tuple of generator indices
MONOMIALS: tuple[tuple[int, ...], ...] = tuple(
    m for k in range(5) for m in combinations(range(4), k)
)
_INDEX = {m: i for i, m in enumerate(MONOMIALS)}


class NoIntertwiner(ValueError):
    """The intertwining equations do not have a one-dimensional solution space."""


class NoSolution(ValueError):
    """The linear system for A or C lacks a one-dimensional solution space."""


def _reduce_word(word: Sequence[int]) -> tuple[float, tuple[int, ...]]:
    """Bring a word in the generators to canonical sorted form.

    Adjacent transpositions of distinct generators contribute a factor -1 and
    a repeated generator collapses to ``eta_aa``.
    """
    w = list(word)
    sign = 1.0
    # bubble sort, counting swaps of distinct generators
    for i in range(len(w)):
        for j in range(len(w) - 1 - i):
            if w[j] > w[j + 1]:
                w[j], w[j + 1] = w[j + 1], w[j]
                sign = -sign
    out: list[int] = []
    for a in w:
        if out and out[-1] == a:
            out.pop()
            sign *= ETA[a, a]
        else:
            out.append(a)
    return sign, tuple(out)


def _build_table() -> tuple[np.ndarray, np.ndarray]:
    idx = np.zeros((16, 16), dtype=np.int64)
    sgn = np.zeros((16, 16))
    for i, mi in enumerate(MONOMIALS):
        for j, mj in enumerate(MONOMIALS):
            s, m = _reduce_word(mi + mj)
            idx[i, j] = _INDEX[m]
            sgn[i, j] = s
    return idx, sgn


_TABLE_IDX, _TABLE_SGN = _build_table()
_GRADE = np.array([len(m) for m in MONOMIALS])
_EVEN = _GRADE % 2 == 0


@dataclass(frozen=True)
class CliffordElement:
    """Element of Cl(1,3) with real coefficients on the canonical basis.

    Parameters
    ----------
    coeffs : array_like, shape (16,)
        Real coefficients ordered as :data:`MONOMIALS`.
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs)
        if np.iscomplexobj(c):
            if np.any(c.imag != 0):
                raise ValueError("Clifford coefficients must be real")
            c = c.real
        c = np.array(c, dtype=float).reshape(16)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "CliffordElement":
        return cls(np.zeros(16))

    @classmethod
    def scalar(cls, s: float) -> "CliffordElement":
        c = np.zeros(16)
        c[0] = s
        return cls(c)

    @classmethod
    def monomial(cls, indices: Sequence[int], coeff: float = 1.0) -> "CliffordElement":
        """Product ``coeff * g_{i1} g_{i2} ...`` reduced to canonical form."""
        s, m = _reduce_word(indices)
        c = np.zeros(16)
        c[_INDEX[m]] = coeff * s
        return cls(c)

    @classmethod
    def generator(cls, a: int) -> "CliffordElement":
        return cls.monomial((a,))

    @classmethod
    def g5(cls) -> "CliffordElement":
        return cls.monomial((0, 1, 2, 3))

    @classmethod
    def vector(cls, v: Sequence[float]) -> "CliffordElement":
        """The element ``v^a g_a``."""
        c = np.zeros(16)
        c[1:5] = np.asarray(v, dtype=float)
        return cls(c)

    # arithmetic -------------------------------------------------------
    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        return CliffordElement(self.coeffs + other.coeffs)

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return CliffordElement(self.coeffs - other.coeffs)

    def __neg__(self) -> "CliffordElement":
        return CliffordElement(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, CliffordElement):
            return clifford_product(self, other)
        return CliffordElement(self.coeffs * float(other))

    def __rmul__(self, s: float) -> "CliffordElement":
        return CliffordElement(self.coeffs * float(s))

    def __matmul__(self, other: "CliffordElement") -> "CliffordElement":
        return clifford_product(self, other)

    def allclose(self, other: "CliffordElement", atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs - other.coeffs) <= atol))

    @property
    def is_even(self) -> bool:
        return bool(np.all(self.coeffs[~_EVEN] == 0))

    @property
    def is_odd(self) -> bool:
        return bool(np.all(self.coeffs[_EVEN] == 0))

    def even_part(self) -> "CliffordElement":
        return CliffordElement(np.where(_EVEN, self.coeffs, 0.0))

    def odd_part(self) -> "CliffordElement":
        return CliffordElement(np.where(_EVEN, 0.0, self.coeffs))


def clifford_product(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    """Product in Cl(1,3) through the precomputed monomial table."""
    outer = np.multiply.outer(a.coeffs, b.coeffs) * _TABLE_SGN
    out = np.zeros(16)
    np.add.at(out, _TABLE_IDX.ravel(), outer.ravel())
    return CliffordElement(out)


def grades() -> np.ndarray:
    """Grade of each canonical monomial."""
    return _GRADE.copy()


# ----------------------------------------------------------------------
# representations
# ----------------------------------------------------------------------

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)


def _check_clifford(gammas: np.ndarray, tol: float) -> float:
    res = 0.0
    eye = np.eye(4)
    for a in range(4):
        for b in range(4):
            anti = gammas[a] @ gammas[b] + gammas[b] @ gammas[a]
            res = max(res, float(np.max(np.abs(anti - 2 * ETA[a, b] * eye))))
    return res


@dataclass(frozen=True)
class GammaRep:
    """A complex 4x4 representation of Cl(1,3).

    Parameters
    ----------
    gammas : ndarray, shape (4, 4, 4)
        ``gammas[a]`` is the image of ``g_a``.
    """

    gammas: np.ndarray
    _monomials: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        g = np.array(self.gammas, dtype=complex).reshape(4, 4, 4)
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        mats = np.empty((16, 4, 4), dtype=complex)
        for k, m in enumerate(MONOMIALS):
            M = np.eye(4, dtype=complex)
            for a in m:
                M = M @ g[a]
            mats[k] = M
        mats.setflags(write=False)
        object.__setattr__(self, "_monomials", mats)

    @property
    def gamma5(self) -> np.ndarray:
        return self._monomials[15]

    @property
    def monomial_matrices(self) -> np.ndarray:
        """Images of the 16 canonical monomials, shape (16, 4, 4)."""
        return self._monomials

    @property
    def upper(self) -> np.ndarray:
        """Gammas with a raised index, ``gamma^a = eta^{ab} gamma_b``."""
        return np.einsum("ab,bij->aij", ETA, self.gammas)

    def clifford_residual(self) -> float:
        return _check_clifford(self.gammas, np.inf)

    def validate(self, tol: float = 1e-13) -> None:
        res = self.clifford_residual()
        if res > tol:
            raise ValueError(f"Clifford relations violated by {res:.3e}")
        if np.max(np.abs(self.gamma5 @ self.gamma5 + np.eye(4))) > tol:
            raise ValueError("gamma5 does not square to -I")

    def represent(self, e: CliffordElement) -> np.ndarray:
        """Matrix image of a Clifford element."""
        return np.tensordot(e.coeffs, self._monomials, axes=(0, 0))

    def decompose(self, M: np.ndarray) -> np.ndarray:
        """Complex coefficients of ``M`` on the represented monomials.

        The 16 monomials form a basis of the 4x4 matrices and each squares to
        ``+-I``, so the coefficients follow from the trace pairing.
        """
        inv = np.array([np.linalg.inv(B) for B in self._monomials])
        return np.einsum("kij,ji->k", inv, M) / 4.0

    def slash(self, v: np.ndarray) -> np.ndarray:
        """``v^a gamma_a`` for a vector with upper index (vectorised)."""
        return np.tensordot(np.asarray(v), self.gammas, axes=([-1], [0]))


def slash(rep: GammaRep, v: np.ndarray) -> np.ndarray:
    return rep.slash(v)


def weyl_representation() -> GammaRep:
    """The chiral representation ``gamma_0 = [[0, I], [I, 0]]``, ``gamma_i = [[0, -s_i], [s_i, 0]]``."""
    g0 = np.block([[_Z2, _I2], [_I2, _Z2]])
    gs = [np.block([[_Z2, -s], [s, _Z2]]) for s in _SIGMA]
    return GammaRep(np.array([g0, *gs]))


def standard_representation() -> GammaRep:
    """The Dirac representation with ``gamma_0 = diag(I, -I)``."""
    g0 = np.block([[_I2, _Z2], [_Z2, -_I2]])
    gs = [np.block([[_Z2, s], [-s, _Z2]]) for s in _SIGMA]
    return GammaRep(np.array([g0, *gs]))


def conjugated_representation(rep: GammaRep, M: np.ndarray) -> GammaRep:
    """The representation ``M gamma_a M^{-1}``."""
    Minv = np.linalg.inv(M)
    return GammaRep(np.array([M @ g @ Minv for g in rep.gammas]))


def represent_trace_det(
    e: CliffordElement, rep: GammaRep
) -> tuple[np.ndarray, complex, complex]:
    """Matrix, trace and determinant of a represented element."""
    M = rep.represent(e)
    return M, complex(np.trace(M)), complex(np.linalg.det(M))


# ----------------------------------------------------------------------
# intertwiners and the A, C matrices
# ----------------------------------------------------------------------


def nullspace(system: np.ndarray, rel_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Nullspace basis of a linear system and its singular values.

    Returns
    -------
    basis : ndarray, shape (n, k)
        Orthonormal columns spanning the numerical nullspace.
    s : ndarray
        All singular values in ascending order.
    """
    _, s, vh = np.linalg.svd(system)
    n = system.shape[1]
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    thresh = rel_tol * max(s_full.max(), 1.0)
    null = s_full <= thresh
    return vh.conj().T[:, null], np.sort(s_full)


@dataclass(frozen=True)
class Intertwiner:
    """Solution ``L`` of ``rep1(g_a) L = L rep2(g_a)``."""

    L: np.ndarray
    residual: float


def _fix_phase_first_entry(M: np.ndarray, phases: Sequence[complex]) -> np.ndarray:
    flat = M.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-12 * np.abs(flat).max()))
    z = flat[k]
    best = max(phases, key=lambda p: (p * z).real)
    return M * best


def _sylvester_system(left: Sequence[np.ndarray], right: Sequence[np.ndarray]) -> np.ndarray:
    """Stack ``P X - X Q = 0`` for row-major ``vec(X)``."""
    eye = np.eye(4)
    return np.vstack([np.kron(P, eye) - np.kron(eye, Q.T) for P, Q in zip(left, right)])


def find_intertwiner(rep1: GammaRep, rep2: GammaRep, tol: float = 1e-10) -> Intertwiner:
    """Solve ``rep1(g_a) L = L rep2(g_a)``, i.e. ``rep1 = L rep2 L^{-1}``.

    The solution is unique up to a scalar; it is normalised to ``det L = 1``
    with the first nonzero entry (row-major) having positive real part.

    Raises
    ------
    NoIntertwiner
        If the solution space is not one-dimensional.
    """
    system = _sylvester_system(rep1.gammas, rep2.gammas)
    basis, s = nullspace(system, tol)
    if basis.shape[1] != 1 or s[1] <= 1e-6:
        raise NoIntertwiner(f"nullspace dimension {basis.shape[1]}")
    L = basis[:, 0].reshape(4, 4)
    d = np.linalg.det(L)
    if abs(d) < 1e-300:
        raise NoIntertwiner("intertwiner is singular")
    L = L / d ** 0.25
    L = _fix_phase_first_entry(L, (1, 1j, -1, -1j))
    res = max(float(np.max(np.abs(p @ L - L @ q))) for p, q in zip(rep1.gammas, rep2.gammas))
    return Intertwiner(L, res)


@dataclass(frozen=True)
class AdjointPair:
    """Adjoint matrix ``A`` and charge-conjugation matrix ``C`` of a representation."""

    A: np.ndarray
    C: np.ndarray

    def residuals(self, rep: GammaRep) -> dict[str, float]:
        """Defects of all defining relations (max-norm)."""
        A, C = self.A, self.C
        Ainv, Cinv = np.linalg.inv(A), np.linalg.inv(C)
        out = {
            "hermitian": float(np.max(np.abs(A - A.conj().T))),
            "cbar_c": float(np.max(np.abs(C.conj() @ C - np.eye(4)))),
            "adjoint": max(
                float(np.max(np.abs(g.conj().T - A @ g @ Ainv))) for g in rep.gammas
            ),
            "conjugation": max(
                float(np.max(np.abs(-g.conj() - C @ g @ Cinv))) for g in rep.gammas
            ),
            "a_from_c": float(np.max(np.abs(A + C.conj().T @ A.conj() @ C))),
        }
        eig = np.linalg.eigvalsh(0.5 * (A @ rep.gammas[0] + (A @ rep.gammas[0]).conj().T))
        out["positivity"] = float(max(0.0, -eig.min()))
        return out


def find_adjoint_conjugation(rep: GammaRep, tol: float = 1e-10) -> AdjointPair:
    """Matrices ``A`` and ``C`` with ``gamma_a^* = A gamma_a A^{-1}`` and ``-conj(gamma_a) = C gamma_a C^{-1}``.

    ``A`` is scaled so that ``tr(A gamma_0) = 4`` (which also makes it Hermitian
    with ``A gamma(n) > 0`` for future timelike ``n``); ``C`` is scaled so that
    ``conj(C) C = I`` with its first nonzero entry positive real.

    Raises
    ------
    NoSolution
        If either linear system has a solution space of dimension other than one.
    """
    g = rep.gammas
    sysA = _sylvester_system([x.conj().T for x in g], g)
    basisA, _ = nullspace(sysA, tol)
    if basisA.shape[1] != 1:
        raise NoSolution(f"A-system nullspace dimension {basisA.shape[1]}")
    A = basisA[:, 0].reshape(4, 4)
    t = np.trace(A @ g[0])
    if abs(t) < 1e-12:
        raise NoSolution("tr(A gamma_0) vanishes")
    A = A * (4.0 / t)
    A = 0.5 * (A + A.conj().T)

    # C gamma_a + conj(gamma_a) C = 0
    sysC = _sylvester_system([-x.conj() for x in g], g)
    basisC, _ = nullspace(sysC, tol)
    if basisC.shape[1] != 1:
        raise NoSolution(f"C-system nullspace dimension {basisC.shape[1]}")
    C = basisC[:, 0].reshape(4, 4)
    cc = C.conj() @ C
    lam = np.trace(cc).real / 4.0
    if lam <= 0 or np.max(np.abs(cc - lam * np.eye(4))) > 1e-8 * max(lam, 1.0):
        raise NoSolution("conj(C) C is not a positive multiple of I")
    C = C / np.sqrt(lam)
    flat = C.ravel()
    k = int(np.argmax(np.abs(flat) > 1e-12 * np.abs(flat).max()))
    C = C * (abs(flat[k]) / flat[k])
    return AdjointPair(A, C)
