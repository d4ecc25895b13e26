"""Minkowski vacuum formulas on the mass shell and a 1+1 lattice Klein-Gordon engine.

Fourier convention: ``f^(k) = int exp(-i k.x) f(x) dx`` with the Euclidean
pairing ``k.x = sum_mu k_mu x^mu``. With this convention the vacuum two-point
function of the free scalar field of mass ``m`` is

    omega2(f, h) = (2 pi)^-3 int f^(l) h^(-l) d^3l / (2 w_l),   l = (w_l, l_vec),

and the advanced-minus-retarded pairing is

    E(f, h) = -i (2 pi)^-3 int [f^(l) h^(-l) - f^(-l) h^(l)] d^3l / (2 w_l),

so that ``omega2(f, h) - omega2(h, f) = i E(f, h)``. Shell integrals are
evaluated by tensor Gauss-Hermite quadrature centred on a Laplace fit of each
Gaussian term pair, and checked against a run with twice the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

__all__ = [
    "Polynomial",
    "GaussianTerm",
    "FourierTestFunction",
    "KGParams",
    "QuadratureConfig",
    "QuadratureNotConverged",
    "CFLViolation",
    "SlabTooThin",
    "vacuum_two_point",
    "commutator_pairing",
    "smoothed_two_point",
    "two_point_matrix",
    "Lattice1p1",
    "LatticeGreen",
    "lattice_green",
    "lattice_cone",
    "cauchy_symplectic",
    "spacetime_pairing",
    "timeslice_decompose",
    "smoothstep_profile",
]


class QuadratureNotConverged(RuntimeError):
    """Two node counts disagree by more than the relative tolerance."""


class CFLViolation(ValueError):
    """``dt > 0.5 dx`` on the lattice."""


class SlabTooThin(ValueError):
    """The time-slice slab is narrower than four cells."""


# ----------------------------------------------------------------------
# test functions in Fourier space
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in the four momentum components, ``{(a0, a1, a2, a3): coeff}``."""

    coeffs: tuple[tuple[tuple[int, int, int, int], complex], ...]

    @classmethod
    def constant(cls, c: complex = 1.0) -> "Polynomial":
        return cls((((0, 0, 0, 0), complex(c)),))

    @classmethod
    def from_dict(cls, d: dict) -> "Polynomial":
        return cls(tuple((tuple(k), complex(v)) for k, v in d.items() if v != 0))

    def as_dict(self) -> dict:
        out: dict = {}
        for k, v in self.coeffs:
            out[k] = out.get(k, 0) + v
        return out

    def __call__(self, l: np.ndarray) -> np.ndarray:
        l = np.asarray(l)
        out = np.zeros(l.shape[:-1], dtype=complex)
        for powers, c in self.coeffs:
            term = np.full(l.shape[:-1], c, dtype=complex)
            for mu, p in enumerate(powers):
                if p:
                    term = term * l[..., mu] ** p
            out = out + term
        return out

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out: dict = {}
        for k1, v1 in self.coeffs:
            for k2, v2 in other.coeffs:
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + v1 * v2
        return Polynomial.from_dict(out)

    def scale(self, s: complex) -> "Polynomial":
        return Polynomial(tuple((k, v * s) for k, v in self.coeffs))

    def reflect_conj(self) -> "Polynomial":
        """``l -> conj(P(-l))``."""
        return Polynomial(tuple((k, np.conj(v) * (-1) ** sum(k)) for k, v in self.coeffs))

    @classmethod
    def klein_gordon(cls, m: float) -> "Polynomial":
        """``m^2 - l^2 = m^2 - l0^2 + |l_vec|^2``."""
        return cls.from_dict(
            {
                (0, 0, 0, 0): m * m,
                (2, 0, 0, 0): -1.0,
                (0, 2, 0, 0): 1.0,
                (0, 0, 2, 0): 1.0,
                (0, 0, 0, 2): 1.0,
            }
        )


@dataclass(frozen=True)
class GaussianTerm:
    """``P(l) exp(-(l - c)^T S (l - c) - i l.a)``.

    ``S`` is real symmetric positive semi-definite; ``a`` may be complex
    (a translation, complex for analytically continued point evaluations).
    """

    poly: Polynomial
    center: np.ndarray
    width: np.ndarray
    shift: np.ndarray

    def exponent(self, l: np.ndarray) -> np.ndarray:
        d = l - self.center
        quad = np.sum((d @ self.width) * d, axis=-1)
        if not np.any(self.shift):
            return -quad
        return -quad - 1j * (l @ self.shift)

    def __call__(self, l: np.ndarray) -> np.ndarray:
        return self.poly(l) * np.exp(self.exponent(l))


HalfSpace = Optional[Literal["upper", "lower"]]


@dataclass(frozen=True)
class FourierTestFunction:
    """``f^(l) = sum_i P_i(l) exp(-(l - c_i)^T S_i (l - c_i) - i l.a_i)``.

    Parameters
    ----------
    terms : tuple of GaussianTerm
    half_space : {None, "upper", "lower"}
        Hard support flag: ``"upper"`` sets ``f^ = 0`` for ``l0 < 0``,
        ``"lower"`` sets ``f^ = 0`` for ``l0 > 0``.
    """

    terms: tuple[GaussianTerm, ...]
    half_space: HalfSpace = None

    @classmethod
    def gaussian(
        cls,
        center: Sequence[float],
        width: np.ndarray,
        poly: Optional[Polynomial] = None,
        shift: Optional[Sequence[complex]] = None,
        half_space: HalfSpace = None,
    ) -> "FourierTestFunction":
        S = np.asarray(width, dtype=float)
        if np.max(np.abs(S - S.T)) > 1e-12 or np.linalg.eigvalsh(S).min() <= 0:
            raise ValueError("width matrix must be symmetric positive-definite")
        term = GaussianTerm(
            poly or Polynomial.constant(),
            np.asarray(center, dtype=float),
            S,
            np.zeros(4, dtype=complex) if shift is None else np.asarray(shift, dtype=complex),
        )
        return cls((term,), half_space)

    @classmethod
    def point(cls, x: Sequence[complex]) -> "FourierTestFunction":
        """Point evaluation at a (possibly complex) spacetime point, ``f^(l) = exp(-i l.x)``."""
        term = GaussianTerm(
            Polynomial.constant(), np.zeros(4), np.zeros((4, 4)), np.asarray(x, dtype=complex)
        )
        return cls((term,))

    @classmethod
    def random(cls, rng: np.random.Generator, n_terms: int = 1, spread: float = 1.0) -> "FourierTestFunction":
        terms = []
        for _ in range(n_terms):
            Q = np.linalg.qr(rng.normal(size=(4, 4)))[0]
            S = Q @ np.diag(rng.uniform(0.3, 1.5, size=4)) @ Q.T
            c = rng.normal(scale=spread, size=4)
            coef = complex(rng.normal(), rng.normal())
            terms.append(GaussianTerm(Polynomial.constant(coef), c, 0.5 * (S + S.T), np.zeros(4, complex)))
        return cls(tuple(terms))

    def __call__(self, l: np.ndarray) -> np.ndarray:
        l = np.asarray(l)
        out = sum(t(l) for t in self.terms)
        if self.half_space == "upper":
            out = np.where(np.real(l[..., 0]) < 0, 0.0, out)
        elif self.half_space == "lower":
            out = np.where(np.real(l[..., 0]) > 0, 0.0, out)
        return out

    def conj(self) -> "FourierTestFunction":
        """Transform of the complex conjugate function, ``l -> conj(f^(-l))``."""
        terms = tuple(
            GaussianTerm(t.poly.reflect_conj(), -t.center, t.width, np.conj(t.shift)) for t in self.terms
        )
        flip = {None: None, "upper": "lower", "lower": "upper"}[self.half_space]
        return FourierTestFunction(terms, flip)

    def __add__(self, other: "FourierTestFunction") -> "FourierTestFunction":
        if self.half_space != other.half_space:
            raise ValueError("cannot add test functions with different support flags")
        return FourierTestFunction(self.terms + other.terms, self.half_space)

    def multiply_polynomial(self, poly: Polynomial) -> "FourierTestFunction":
        return FourierTestFunction(
            tuple(GaussianTerm(t.poly * poly, t.center, t.width, t.shift) for t in self.terms),
            self.half_space,
        )

    def apply_kg(self, m: float) -> "FourierTestFunction":
        """Transform of ``(box + m^2) f``: multiplication by ``m^2 - l^2``."""
        return self.multiply_polynomial(Polynomial.klein_gordon(m))

    def gaussian_smooth(self, n: float) -> "FourierTestFunction":
        """Transform of ``h_n * f``, with ``h_n^(l) = exp(-|l|^2 / (4 n^2))`` (Euclidean norm).

        Each term's quadratic exponent absorbs the multiplier in closed form:
        ``S' = S + I/(4n^2)``, ``c' = S'^-1 S c`` and a constant factor.
        """
        out = []
        lam = 1.0 / (4 * n * n)
        for t in self.terms:
            S2 = t.width + lam * np.eye(4)
            c2 = np.linalg.solve(S2, t.width @ t.center)
            const = np.exp(-(t.center @ t.width @ t.center) + c2 @ S2 @ c2)
            out.append(GaussianTerm(t.poly.scale(const), c2, S2, t.shift))
        return FourierTestFunction(tuple(out), self.half_space)


@dataclass(frozen=True)
class KGParams:
    """Klein-Gordon parameters; ``xi`` is recorded but inert in flat space."""

    m: float = 1.0
    xi: float = 0.0

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise ValueError("mass must be positive")

    def omega(self, lvec: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(np.asarray(lvec) ** 2, axis=-1) + self.m**2)

    def shell(self, lvec: np.ndarray) -> np.ndarray:
        w = self.omega(lvec)
        return np.concatenate([w[..., None], lvec], axis=-1)


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 40
    rtol: float = 1e-7
    check: bool = True

    def __post_init__(self) -> None:
        if self.nodes < 4:
            raise ValueError("need at least 4 nodes per axis")


# ----------------------------------------------------------------------
# shell quadrature
# ----------------------------------------------------------------------


@lru_cache(maxsize=8)
def _hermite_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.hermite.hermgauss(n)
    X = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    W = np.einsum("i,j,k->ijk", w, w, w).reshape(-1)
    # store weights already divided by exp(-|y|^2) for the ratio form
    return X, W * np.exp(np.sum(X**2, axis=1))


def _laplace_fit(log_env, dim: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Centre and Cholesky-like scale of ``exp(log_env)`` by a Laplace approximation."""
    res = minimize(lambda y: -log_env(y), np.zeros(dim), method="BFGS", options={"gtol": 1e-10})
    c = res.x
    h = 1e-4
    H = np.zeros((dim, dim))
    f0 = -log_env(c)
    for i in range(dim):
        for j in range(i, dim):
            ei = np.eye(dim)[i] * h
            ej = np.eye(dim)[j] * h
            H[i, j] = H[j, i] = (
                -log_env(c + ei + ej) + log_env(c + ei - ej) + log_env(c - ei + ej) - log_env(c - ei - ej)
            ) / (4 * h * h)
    H = 0.5 * (H + H.T)
    evals, evecs = np.linalg.eigh(H)
    evals = np.maximum(evals, 1e-3 * max(evals.max(), 1e-6))
    # Gauss-Hermite weight exp(-|y|^2) <-> exp(-1/2 d^T H d) with d = L y, L = V diag(sqrt(2/lam))
    L = evecs @ np.diag(np.sqrt(2.0 / evals))
    del f0
    return c, L


def _shell_integral(integrand, fit, nodes: int) -> complex:
    c, L = fit
    Y, W = _hermite_grid(nodes)
    pts = c + Y @ L.T
    vals = integrand(pts)
    return complex(abs(np.linalg.det(L)) * np.sum(W * vals))


def _integrate(integrand, log_env, cfg: QuadratureConfig) -> complex:
    fit = _laplace_fit(log_env)
    val = _shell_integral(integrand, fit, cfg.nodes)
    if cfg.check:
        val2 = _shell_integral(integrand, fit, 2 * cfg.nodes)
        scale = max(abs(val), abs(val2), 1e-300)
        if abs(val - val2) > cfg.rtol * scale and abs(val - val2) > 1e-14:
            raise QuadratureNotConverged(f"{val} vs {val2}")
        return val2
    return val


def _pair_integral(
    fa: FourierTestFunction,
    ga: FourierTestFunction,
    p: KGParams,
    cfg: QuadratureConfig,
    sign_a: float,
    extra_log=None,
) -> complex:
    """``(2 pi)^-3 int fa^(s l) ga^(-s l) d^3l/(2w)`` with ``s = sign_a``, split by term pairs."""
    total = 0j
    for ta in fa.terms:
        for tb in ga.terms:
            sub_a = FourierTestFunction((ta,), fa.half_space)
            sub_b = FourierTestFunction((tb,), ga.half_space)

            def integrand(lvec, sub_a=sub_a, sub_b=sub_b):
                l = p.shell(lvec)
                val = sub_a(sign_a * l) * sub_b(-sign_a * l) / (2 * l[..., 0])
                if extra_log is not None:
                    val = val * np.exp(extra_log(l))
                return val

            def log_env(lvec, ta=ta, tb=tb):
                l = p.shell(np.asarray(lvec)[None, :])
                e = np.real(ta.exponent(sign_a * l) + tb.exponent(-sign_a * l))
                if extra_log is not None:
                    e = e + np.real(extra_log(l))
                return float(e[0] - np.log(2 * l[0, 0]))

            total += _integrate(integrand, log_env, cfg)
    return total / (2 * np.pi) ** 3


def vacuum_two_point(
    f: FourierTestFunction,
    h: FourierTestFunction,
    p: KGParams = KGParams(),
    cfg: QuadratureConfig = QuadratureConfig(),
) -> complex:
    """Vacuum two-point function ``omega2(f, h) = (2 pi)^-3 int f^(l) h^(-l) d^3l/(2 w_l)``.

    ``omega2(conj f, f)`` is the squared norm of ``Phi(f)`` applied to the
    vacuum; use :meth:`FourierTestFunction.conj` to form ``conj f``.

    Raises
    ------
    QuadratureNotConverged
        If ``nodes`` and ``2 * nodes`` differ by more than ``rtol`` relative.
    """
    return _pair_integral(f, h, p, cfg, +1.0)


def commutator_pairing(
    f: FourierTestFunction,
    h: FourierTestFunction,
    p: KGParams = KGParams(),
    cfg: QuadratureConfig = QuadratureConfig(),
) -> complex:
    """Advanced-minus-retarded pairing ``E(f, h)``; antisymmetric, real for real ``f, h``."""
    plus = _pair_integral(f, h, p, cfg, +1.0)
    minus = _pair_integral(f, h, p, cfg, -1.0)
    return -1j * (plus - minus)


def smoothed_two_point(
    x: Sequence[complex],
    n: float,
    f: FourierTestFunction,
    p: KGParams = KGParams(),
    cfg: QuadratureConfig = QuadratureConfig(),
) -> complex:
    """``omega2(x, h_n * f)``, analytic in complex ``x``.

    Direct shell integral ``(2 pi)^-3 int exp(-i x.eta) exp(-|eta|^2/(4 n^2)) f^(-eta) d^3eta/(2 eta0)``
    with the Euclidean norm ``|eta|`` of the on-shell 4-vector.
    """
    if n < 1:
        raise ValueError("smoothing index n >= 1")
    x = np.asarray(x, dtype=complex)
    lam = 1.0 / (4.0 * n * n)

    def extra(l):
        return -1j * (l @ x) - lam * np.sum(np.real(l) ** 2, axis=-1)

    one = FourierTestFunction.point(np.zeros(4))
    return _pair_integral(one, f, p, cfg, +1.0, extra_log=extra)


def two_point_matrix(
    basis: Sequence[FourierTestFunction], p: KGParams = KGParams(), cfg: QuadratureConfig = QuadratureConfig()
) -> np.ndarray:
    """``W_ij = omega2(f_i, f_j)`` on a finite family of test functions."""
    n = len(basis)
    W = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            W[i, j] = vacuum_two_point(basis[i], basis[j], p, cfg)
    return W


# ----------------------------------------------------------------------
# 1+1 lattice Klein-Gordon
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Lattice1p1:
    """Leapfrog lattice with Dirichlet spatial boundaries.

    Fields are arrays ``phi[n, j]`` of shape ``(nt, nx)``. The discrete
    operator ``K_disc`` acts on rows ``1..nt-2``; sources live on those rows.
    """

    nx: int = 64
    nt: int = 96
    dx: float = 0.1
    dt: float = 0.05
    m: float = 1.0

    def __post_init__(self) -> None:
        if self.dt > 0.5 * self.dx + 1e-15:
            raise CFLViolation(f"dt = {self.dt} > 0.5 dx = {0.5 * self.dx}")
        if self.nx < 3 or self.nt < 4:
            raise ValueError("lattice too small")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt, self.nx)

    def laplacian(self, row: np.ndarray) -> np.ndarray:
        out = -2.0 * row
        out[..., 1:] += row[..., :-1]
        out[..., :-1] += row[..., 1:]
        return out / self.dx**2

    def K_disc(self, phi: np.ndarray) -> np.ndarray:
        """``(phi^{n+1} - 2 phi^n + phi^{n-1})/dt^2 - Lap phi^n + m^2 phi^n`` on interior rows."""
        out = np.zeros_like(phi)
        inner = phi[1:-1]
        out[1:-1] = (
            (phi[2:] - 2 * inner + phi[:-2]) / self.dt**2 - self.laplacian(inner) + self.m**2 * inner
        )
        return out

    def random_source(self, rng: np.random.Generator, rows: tuple[int, int], cols: tuple[int, int]) -> np.ndarray:
        f = np.zeros(self.shape)
        f[rows[0] : rows[1], cols[0] : cols[1]] = rng.normal(size=(rows[1] - rows[0], cols[1] - cols[0]))
        return f


@dataclass(frozen=True)
class LatticeGreen:
    lattice: Lattice1p1

    def retarded(self, f: np.ndarray) -> np.ndarray:
        """``E+ f``: zero in the far past, ``K_disc E+ f = f`` on interior rows."""
        L = self.lattice
        phi = np.zeros(L.shape, dtype=np.result_type(f, float))
        c = L.dt**2
        for n in range(1, L.nt - 1):
            phi[n + 1] = 2 * phi[n] - phi[n - 1] + c * (L.laplacian(phi[n]) - L.m**2 * phi[n] + f[n])
        return phi

    def advanced(self, f: np.ndarray) -> np.ndarray:
        """``E- f``: zero in the far future."""
        return self.retarded(f[::-1])[::-1]

    def causal(self, f: np.ndarray) -> np.ndarray:
        """``E f = E- f - E+ f``, a homogeneous solution."""
        return self.advanced(f) - self.retarded(f)

    def impulse(self, n: int, j: int, kind: str = "retarded") -> np.ndarray:
        d = np.zeros(self.lattice.shape)
        d[n, j] = 1.0
        return {"retarded": self.retarded, "advanced": self.advanced, "causal": self.causal}[kind](d)


def lattice_green(l: Lattice1p1) -> LatticeGreen:
    """Green operators of the leapfrog stencil, built by explicit evolution.

    Raises
    ------
    CFLViolation
        Raised at lattice construction when ``dt > 0.5 dx``.
    """
    return LatticeGreen(l)


def lattice_cone(l: Lattice1p1, n: int, j: int, future: bool = True, dilate: int = 0) -> np.ndarray:
    """Stencil-graph causal future (or past) of ``(n, j)`` by breadth-first propagation."""
    mask = np.zeros(l.shape, dtype=bool)
    mask[n, j] = True
    rows = range(n + 1, l.nt) if future else range(n - 1, -1, -1)
    prev = n
    for r in rows:
        m = mask[prev].copy()
        m[1:] |= mask[prev][:-1]
        m[:-1] |= mask[prev][1:]
        mask[r] = m
        prev = r
    if dilate:
        for _ in range(dilate):
            grown = mask.copy()
            grown[:, 1:] |= mask[:, :-1]
            grown[:, :-1] |= mask[:, 1:]
            grown[1:] |= mask[:-1]
            grown[:-1] |= mask[1:]
            mask = grown
    return mask


def spacetime_pairing(l: Lattice1p1, f: np.ndarray, g: np.ndarray) -> float:
    """``sum f g dx dt`` over the lattice."""
    return float(np.sum(f * g) * l.dx * l.dt)


def cauchy_symplectic(
    l: Lattice1p1, fs: Sequence[np.ndarray], slices: Iterable[int]
) -> dict[int, np.ndarray]:
    """Symplectic matrix of the solutions ``E f_i`` on time slices.

    On the slice between rows ``c-1`` and ``c``:
    ``sigma_C(f, h) = sum_j (Phi_{c-1} Psi_c - Phi_c Psi_{c-1}) dx / dt``
    with ``Phi = E f`` and ``Psi = E h``; the discrete Wronskian is conserved
    by the leapfrog recursion, so the matrices agree across slices.
    """
    G = lattice_green(l)
    sols = [G.causal(f) for f in fs]
    out = {}
    for c in slices:
        if not 1 <= c <= l.nt - 1:
            raise ValueError("slice must be interior to the grid")
        k = len(sols)
        S = np.zeros((k, k))
        for a in range(k):
            for b in range(k):
                Pa, Pb = sols[a], sols[b]
                S[a, b] = np.sum(Pa[c - 1] * Pb[c] - Pa[c] * Pb[c - 1]) * l.dx / l.dt
        out[c] = S
    return out


def smoothstep_profile(l: Lattice1p1, t_lo: int, t_hi: int) -> np.ndarray:
    """Row profile ``chi``: 1 for rows ``<= t_lo``, 0 for rows ``>= t_hi``, quintic in between."""
    n = np.arange(l.nt)
    s = np.clip((n - t_lo) / (t_hi - t_lo), 0.0, 1.0)
    step = s**3 * (10 - 15 * s + 6 * s**2)
    return 1.0 - step


def timeslice_decompose(
    f: np.ndarray, slab: tuple[int, int], l: Lattice1p1
) -> tuple[np.ndarray, np.ndarray]:
    """Split ``f = f' + K h`` with ``f'`` supported in the row slab ``[t_lo, t_hi]``.

    ``chi`` equals 1 to the past of the slab and 0 to its future;
    ``f' = K(chi E f)`` and ``h = E-(f - f')``. Then ``E f' = E f`` and ``h``
    has compact support in time.

    Raises
    ------
    SlabTooThin
        If ``t_hi - t_lo < 4``.
    """
    t_lo, t_hi = slab
    if t_hi - t_lo < 4:
        raise SlabTooThin(f"slab of {t_hi - t_lo} cells")
    if t_lo < 1 or t_hi > l.nt - 2:
        raise ValueError("slab must lie in the interior rows")
    G = lattice_green(l)
    chi = smoothstep_profile(l, t_lo, t_hi)[:, None]
    phi = G.causal(f)
    # K(chi phi) written as the commutator [K, chi] phi (K phi = 0), which
    # vanishes identically wherever chi is locally constant
    fprime = l.K_disc(chi * phi) - chi * l.K_disc(phi)
    h = G.advanced(f - fprime)
    return fprime, h
