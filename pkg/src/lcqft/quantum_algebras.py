"""CCR Weyl words, quasi-free combinatorics and finite CAR algebras.

Bosonic side
    Weyl words ``c W(f)`` in a finite symplectic space, reduced with
    ``W(f) W(h) = exp(-i sigma(f, h) / 2) W(f + h)``; quasi-free n-point
    functions as sums over ordered pairings; truncated (connected) functions
    through the set-partition recursion; a one-mode harmonic oscillator
    that realises the Weyl relations on a truncated Fock space.

Fermionic side
    A doubled space ``U + V = C^n + C^n`` with the antilinear involutions
    ``(u + v)^+ = conj(v) + conj(u)`` and ``(u + v)^c = K conj(u) - conj(K) conj(v)``
    and its Jordan-Wigner Fock representation ``B(u + v) = sum_j u_j a_j + v_j a_j^*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from itertools import combinations, permutations
from typing import Callable, Iterator, Optional, Sequence

import numpy as np
from scipy.linalg import expm

__all__ = [
    "SymplecticSpace",
    "WeylWord",
    "TwoPointForm",
    "DoubledSpace",
    "CarOperator",
    "CarFock",
    "TruncationTooSmall",
    "DimTooLarge",
    "weyl_product",
    "weyl_normal_form",
    "weyl_star",
    "pairings",
    "set_partitions",
    "quasifree_npoint",
    "quasifree_npoint_bruteforce",
    "truncated_npoint",
    "moments_from_cumulants",
    "sequence_cumulants",
    "oscillator_weyl_check",
    "OscillatorReport",
    "car_fock",
    "charge_conjugation_and_parity",
]


class TruncationTooSmall(RuntimeError):
    """The Fock truncation leaks more than the allowed tail weight."""


class DimTooLarge(ValueError):
    """The requested CAR Fock space is too large for dense matrices."""


# ----------------------------------------------------------------------
# Weyl words
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SymplecticSpace:
    """Real vector space with a nondegenerate antisymmetric form."""

    sigma: np.ndarray

    def __post_init__(self) -> None:
        s = np.array(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise ValueError("sigma must be an even-dimensional square matrix")
        if np.max(np.abs(s + s.T)) > 0:
            raise ValueError("sigma must be antisymmetric")
        if abs(np.linalg.det(s)) < 1e-12:
            raise ValueError("sigma is degenerate")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def form(self, f: np.ndarray, h: np.ndarray) -> float:
        return float(np.asarray(f) @ self.sigma @ np.asarray(h))

    @classmethod
    def standard(cls, modes: int = 1) -> "SymplecticSpace":
        """``sigma((a1, b1), (a2, b2)) = a1 b2 - b1 a2`` per mode."""
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return cls(np.kron(np.eye(modes), J))


@dataclass(frozen=True)
class WeylWord:
    """``phase * W(vector)``."""

    phase: complex
    vector: np.ndarray

    def __post_init__(self) -> None:
        if abs(abs(self.phase) - 1.0) > 1e-14:
            raise ValueError("phase must have unit modulus")
        v = np.array(self.vector, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "phase", complex(self.phase))

    @classmethod
    def generator(cls, f: Sequence[float]) -> "WeylWord":
        return cls(1.0, np.asarray(f, dtype=float))


def weyl_product(space: SymplecticSpace, a: WeylWord, b: WeylWord) -> WeylWord:
    """``(c1 W(f)) (c2 W(h)) = c1 c2 exp(-i sigma(f,h)/2) W(f+h)``."""
    ph = a.phase * b.phase * np.exp(-0.5j * space.form(a.vector, b.vector))
    return WeylWord(ph / abs(ph), a.vector + b.vector)


def weyl_star(w: WeylWord) -> WeylWord:
    """``(c W(f))^* = conj(c) W(-f)``."""
    return WeylWord(np.conj(w.phase), -w.vector)


def weyl_normal_form(
    space: SymplecticSpace, words: Sequence[WeylWord], fold: str = "left"
) -> WeylWord:
    """Reduce a product of Weyl words to a single word.

    Parameters
    ----------
    fold : {"left", "right"}
        Reduction order; the result is independent of it up to rounding.
    """
    if not words:
        return WeylWord(1.0, np.zeros(space.dim))
    if fold == "left":
        return reduce(lambda x, y: weyl_product(space, x, y), words)
    return reduce(lambda y, x: weyl_product(space, x, y), reversed(words))


# ----------------------------------------------------------------------
# two-point forms and quasi-free combinatorics
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointForm:
    """Bilinear two-point function on a real basis, ``omega2(f, h) = f^T W h``."""

    omega2: np.ndarray

    def __call__(self, f, h) -> complex:
        return complex(np.asarray(f) @ self.omega2 @ np.asarray(h))

    def commutator_residual(self, sigma: np.ndarray) -> float:
        return float(np.max(np.abs(self.omega2 - self.omega2.T - 1j * np.asarray(sigma))))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hermitian part (the Gram form of ``omega(Phi(z)^* Phi(z))``)."""
        H = 0.5 * (self.omega2 + self.omega2.conj().T)
        return float(np.linalg.eigvalsh(H).min())

    def check(self, sigma: np.ndarray, tol: float = 1e-12, pos_tol: float = 1e-10) -> bool:
        herm = np.max(np.abs(self.omega2 - self.omega2.conj().T)) <= tol
        return bool(
            self.commutator_residual(sigma) <= tol and herm and self.min_eigenvalue() >= -pos_tol
        )

    @classmethod
    def oscillator_vacuum(cls, modes: int = 1) -> "TwoPointForm":
        """``1/2 (a1 a2 + b1 b2) + i/2 (a1 b2 - b1 a2)`` per mode."""
        J = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return cls(np.kron(np.eye(modes), 0.5 * np.eye(2) + 0.5j * J))


def pairings(items: Sequence[int]) -> Iterator[list[tuple[int, int]]]:
    """All pairings of ``items`` with each pair increasing and first entries increasing."""
    items = list(items)
    if not items:
        yield []
        return
    if len(items) % 2:
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1 :]
        for p in pairings(rest):
            yield [(first, items[k])] + p


def _perm_sign(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    seen = [False] * len(seq)
    order = sorted(range(len(seq)), key=lambda i: seq[i])
    for i in range(len(seq)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _as_callable(w2) -> Callable:
    if isinstance(w2, TwoPointForm):
        return w2
    if callable(w2):
        return w2
    W = np.asarray(w2)
    return lambda f, h: np.asarray(f) @ W @ np.asarray(h)


def quasifree_npoint(w2, fs: Sequence, fermionic_sign: bool = False):
    """Quasi-free n-point function from a two-point function.

    Zero for odd ``n``; for ``n = 2m`` the sum over pairings
    ``{(i_1, j_1), ..., (i_m, j_m)}`` with ``i_k < j_k`` and
    ``i_1 < i_2 < ... < i_m`` of ``prod_k omega2(f_{i_k}, f_{j_k})``.

    Parameters
    ----------
    w2 : TwoPointForm, callable or matrix
    fs : sequence of vectors
    fermionic_sign : bool
        Weight each pairing with the sign of the permutation
        ``(i_1, j_1, ..., i_m, j_m)``. Off by default.
    """
    om = _as_callable(w2)
    n = len(fs)
    if n % 2:
        return 0.0
    table = {(i, j): om(fs[i], fs[j]) for i in range(n) for j in range(i + 1, n)}
    total = 0
    for p in pairings(range(n)):
        term = 1
        for pr in p:
            term = term * table[pr]
        if fermionic_sign:
            term = term * _perm_sign([x for pr in p for x in pr])
        total = total + term
    return total


def quasifree_npoint_bruteforce(w2, fs: Sequence, fermionic_sign: bool = False):
    """Independent oracle: filter all permutations down to admissible pairings."""
    om = _as_callable(w2)
    n = len(fs)
    if n % 2:
        return 0.0
    seen = set()
    total = 0
    for perm in permutations(range(n)):
        prs = [(perm[2 * k], perm[2 * k + 1]) for k in range(n // 2)]
        if any(a >= b for a, b in prs):
            continue
        if any(prs[k][0] >= prs[k + 1][0] for k in range(len(prs) - 1)):
            continue
        key = tuple(prs)
        if key in seen:
            continue
        seen.add(key)
        term = 1
        for a, b in prs:
            term = term * om(fs[a], fs[b])
        if fermionic_sign:
            term = term * _perm_sign(perm)
        total = total + term
    return total


def set_partitions(items: Sequence[int]) -> Iterator[list[tuple[int, ...]]]:
    """All set partitions; blocks keep the increasing order of ``items``."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [(first,)] + part
        for k in range(len(part)):
            yield part[:k] + [tuple(sorted((first,) + part[k]))] + part[k + 1 :]


@lru_cache(maxsize=None)
def _partitions_cached(n: int) -> tuple:
    return tuple(tuple(p) for p in set_partitions(range(n)))


_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _partition_product(tensors: dict[int, np.ndarray], part, n: int) -> np.ndarray:
    subs = []
    ops = []
    for block in part:
        subs.append("".join(_LETTERS[i] for i in block))
        ops.append(tensors[len(block)])
    return np.einsum(",".join(subs) + "->" + _LETTERS[:n], *ops)


def truncated_npoint(moments: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Truncated functions from moment tensors.

    ``moments[k-1]`` is the k-point tensor of shape ``(d,)*k``. The
    recursion ``omega_n = sum_P prod_{B in P} omega^T_{|B|}(x_B)`` over set
    partitions (blocks in increasing order) is solved order by order.
    """
    n_max = len(moments)
    if n_max > 8:
        raise ValueError("n <= 8 supported")
    cum: dict[int, np.ndarray] = {}
    for n in range(1, n_max + 1):
        acc = np.array(moments[n - 1], dtype=complex)
        for part in _partitions_cached(n):
            if len(part) == 1:
                continue
            acc = acc - _partition_product(cum, part, n)
        cum[n] = acc
    return [cum[n] for n in range(1, n_max + 1)]


def moments_from_cumulants(cumulants: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Inverse of :func:`truncated_npoint`."""
    cum = {k + 1: np.asarray(c, dtype=complex) for k, c in enumerate(cumulants)}
    out = []
    for n in range(1, len(cumulants) + 1):
        out.append(sum(_partition_product(cum, part, n) for part in _partitions_cached(n)))
    return out


def sequence_cumulants(moment: Callable[[tuple[int, ...]], complex], n: int) -> dict[tuple[int, ...], complex]:
    """Truncated functions of a fixed sequence of test vectors.

    ``moment(idx)`` returns the moment of the sub-sequence at increasing
    positions ``idx``. Returns the truncated function of every nonempty
    increasing index tuple.
    """
    cum: dict[tuple[int, ...], complex] = {}
    for size in range(1, n + 1):
        for idx in combinations(range(n), size):
            acc = moment(idx)
            for part in set_partitions(idx):
                if len(part) == 1:
                    continue
                acc -= math.prod(cum[b] for b in part)
            cum[idx] = acc
    return cum


# ----------------------------------------------------------------------
# harmonic oscillator realisation of the Weyl relations
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatorReport:
    """Finite-difference derivatives of ``omega(W(t1 f1) W(t2 f2))`` at zero."""

    first_derivative: complex
    omega2_fd: complex
    omega2_exact: complex
    commutator_fd: complex
    commutator_exact: complex
    tail: float

    @property
    def omega2_error(self) -> float:
        return abs(self.omega2_fd - self.omega2_exact)

    @property
    def commutator_error(self) -> float:
        return abs(self.commutator_fd - self.commutator_exact)


def _oscillator_ops(N: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, N)), 1).astype(complex)
    X = (a + a.conj().T) / np.sqrt(2)
    P = (a - a.conj().T) / (1j * np.sqrt(2))
    return X, P


def oscillator_weyl_check(
    f1: Sequence[float],
    f2: Sequence[float],
    N: int = 64,
    step: float = 1e-2,
    tail_tol: float = 1e-6,
) -> OscillatorReport:
    """Recover the vacuum two-point function from Weyl operators on a truncated Fock space.

    ``W(f) = exp(i Phi(f))`` with ``Phi(a, b) = a X + b P``, the n-point
    functions are ``(-i)^n d^n/dt_1...dt_n omega(W(t_1 f_1)...W(t_n f_n))`` at
    zero, evaluated with a fourth-order central stencil of width ``step``.

    Raises
    ------
    ValueError
        If ``N < 32``.
    TruncationTooSmall
        If the weight of the top eight Fock levels of ``W(t f)|0>`` exceeds
        ``tail_tol`` for the largest ``t`` used.
    """
    if N < 32:
        raise ValueError("truncation N must be at least 32")
    X, P = _oscillator_ops(N)
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    vac = np.zeros(N, dtype=complex)
    vac[0] = 1.0

    def W(f, t):
        return expm(1j * t * (f[0] * X + f[1] * P))

    offsets = np.array([-2, -1, 1, 2])
    coef = np.array([1.0, -8.0, 8.0, -1.0]) / (12 * step)
    tail = 0.0
    for f in (f1, f2):
        psi = W(f, 2 * step) @ vac
        tail = max(tail, float(np.sum(np.abs(psi[-8:]) ** 2)))
    if tail > tail_tol:
        raise TruncationTooSmall(f"tail weight {tail:.3e}")
    cache1 = {k: W(f1, k * step) for k in offsets}
    cache2 = {k: W(f2, k * step) for k in offsets}

    def two(fa, fb, ca, cb):
        total = 0j
        for i, ci in zip(offsets, coef):
            for j, cj in zip(offsets, coef):
                total += ci * cj * (vac.conj() @ ca[i] @ cb[j] @ vac)
        return -total  # (-i)^2 = -1

    first = sum(c * (vac.conj() @ cache1[k] @ vac) for k, c in zip(offsets, coef)) * (-1j)
    w12 = two(f1, f2, cache1, cache2)
    w21 = two(f2, f1, cache2, cache1)
    exact = TwoPointForm.oscillator_vacuum()
    space = SymplecticSpace.standard()
    return OscillatorReport(
        complex(first),
        complex(w12),
        exact(f1, f2),
        complex(w12 - w21),
        1j * space.form(f1, f2),
        tail,
    )


# ----------------------------------------------------------------------
# CAR algebra on a doubled space
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DoubledSpace:
    """``C^n + C^n`` with its standard inner product and the maps ``+`` and ``c``.

    Vectors are arrays of length ``2n``: first half ``u``, second half ``v``.
    ``K`` is a symmetric unitary matrix (default identity).
    """

    n: int
    K: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        K = np.eye(self.n, dtype=complex) if self.K is None else np.asarray(self.K, dtype=complex)
        if np.max(np.abs(K - K.T)) > 1e-12 or np.max(np.abs(K @ K.conj().T - np.eye(self.n))) > 1e-12:
            raise ValueError("K must be symmetric and unitary")
        object.__setattr__(self, "K", K)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def inner(self, f, h) -> complex:
        return complex(np.vdot(f, h))

    def plus(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        return np.concatenate([f[self.n :].conj(), f[: self.n].conj()])

    def conj_c(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=complex)
        u, v = f[: self.n], f[self.n :]
        return np.concatenate([self.K @ u.conj(), -self.K.conj() @ v.conj()])

    def split(self, u=None, v=None) -> np.ndarray:
        u = np.zeros(self.n) if u is None else np.asarray(u)
        v = np.zeros(self.n) if v is None else np.asarray(v)
        return np.concatenate([u, v]).astype(complex)


@dataclass(frozen=True)
class CarOperator:
    """Dense matrix on the ``2^n``-dimensional Fock space."""

    matrix: np.ndarray

    def __matmul__(self, other: "CarOperator") -> "CarOperator":
        return CarOperator(self.matrix @ other.matrix)

    def __add__(self, other: "CarOperator") -> "CarOperator":
        return CarOperator(self.matrix + other.matrix)

    def __sub__(self, other: "CarOperator") -> "CarOperator":
        return CarOperator(self.matrix - other.matrix)

    def __mul__(self, s: complex) -> "CarOperator":
        return CarOperator(self.matrix * s)

    __rmul__ = __mul__

    def __neg__(self) -> "CarOperator":
        return CarOperator(-self.matrix)

    @property
    def dag(self) -> "CarOperator":
        return CarOperator(self.matrix.conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def maxabs(self) -> float:
        return float(np.max(np.abs(self.matrix)))


def anticommutator(a: CarOperator, b: CarOperator) -> CarOperator:
    return a @ b + b @ a


def commutator(a: CarOperator, b: CarOperator) -> CarOperator:
    return a @ b - b @ a


class CarFock:
    """Jordan-Wigner Fock representation of the CAR algebra over a doubled space."""

    max_modes = 12

    def __init__(self, space: DoubledSpace):
        if space.n > self.max_modes:
            raise DimTooLarge(f"n = {space.n} > {self.max_modes}")
        self.space = space
        n = space.n
        Z = np.diag([1.0, -1.0])
        lower = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>
        I2 = np.eye(2)
        self.annihilators = []
        for j in range(n):
            ops = [Z] * j + [lower] + [I2] * (n - j - 1)
            self.annihilators.append(reduce(np.kron, ops).astype(complex))
        dim = 2**n
        self.identity = CarOperator(np.eye(dim, dtype=complex))
        number = sum(a.conj().T @ a for a in self.annihilators)
        self.parity = CarOperator(np.diag(np.exp(1j * np.pi * np.diag(number).real)).real.astype(complex))
        self.vacuum = np.zeros(dim, dtype=complex)
        self.vacuum[0] = 1.0

    def B(self, f) -> CarOperator:
        """``B(u + v) = sum_j u_j a_j + v_j a_j^*`` (linear in ``f``)."""
        f = np.asarray(f, dtype=complex)
        n = self.space.n
        M = sum(f[j] * a + f[n + j] * a.conj().T for j, a in enumerate(self.annihilators))
        return CarOperator(M)

    def psi(self, v) -> CarOperator:
        """``psi(v) = B(0 + v)``."""
        return self.B(self.space.split(v=v))

    def psi_plus(self, u) -> CarOperator:
        """``psi^+(u) = B(u + 0)``."""
        return self.B(self.space.split(u=u))

    def vacuum_expectation(self, X: CarOperator) -> complex:
        return complex(self.vacuum.conj() @ X.matrix @ self.vacuum)

    # Majorana basis ---------------------------------------------------
    def majorana_vectors(self) -> list[np.ndarray]:
        """Self-adjoint basis vectors ``f = f^+`` spanning the doubled space."""
        n = self.space.n
        out = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            out.append(self.space.split(e, e))
            out.append(self.space.split(1j * e, -1j * e))
        return out

    def majorana_monomials(self) -> tuple[list[tuple[int, ...]], list[np.ndarray]]:
        ms = [self.B(f).matrix for f in self.majorana_vectors()]
        idx, mats = [], []
        for k in range(len(ms) + 1):
            for S in combinations(range(len(ms)), k):
                M = self.identity.matrix
                for s in S:
                    M = M @ ms[s]
                idx.append(S)
                mats.append(M)
        return idx, mats

    def apply_bogoliubov(self, T: Callable[[np.ndarray], np.ndarray], X: CarOperator) -> CarOperator:
        """Extend ``B(f) -> B(T f)`` (``T`` linear) to an arbitrary operator.

        ``X`` is expanded in Majorana monomials ``m_S``; the coefficients follow
        from ``tr(m_S^* X) / 2^n`` since the monomials are orthogonal.
        """
        fs = self.majorana_vectors()
        images = [self.B(T(f)).matrix for f in fs]
        idx, mats = self.majorana_monomials()
        dim = X.matrix.shape[0]
        out = np.zeros_like(X.matrix)
        for S, M in zip(idx, mats):
            c = np.trace(M.conj().T @ X.matrix) / dim
            if abs(c) < 1e-15:
                continue
            img = self.identity.matrix
            for s in S:
                img = img @ images[s]
            out += c * img
        return CarOperator(out)


def car_fock(space: DoubledSpace) -> CarFock:
    """Build the Jordan-Wigner representation ``f -> B(f)``.

    Raises
    ------
    DimTooLarge
        If ``space.n > 12``.
    """
    return CarFock(space)


@dataclass(frozen=True)
class ChargeParity:
    """The automorphisms ``alpha_C`` and ``tau`` of a finite CAR algebra."""

    fock: CarFock

    def alpha_vector(self, f) -> np.ndarray:
        """``f -> f^{c+}``, which is linear."""
        sp = self.fock.space
        return sp.plus(sp.conj_c(f))

    def alpha_C(self, X: CarOperator) -> CarOperator:
        return self.fock.apply_bogoliubov(self.alpha_vector, X)

    def tau(self, X: CarOperator) -> CarOperator:
        P = self.fock.parity
        return P @ X @ P


def charge_conjugation_and_parity(fock: CarFock) -> ChargeParity:
    """Charge conjugation ``alpha_C(B(f)) = B(f^{c+})`` and parity ``tau(B(f)) = -B(f)``."""
    return ChargeParity(fock)
