"""Causal covector classes, the cones Gamma_n in Minkowski space, and a wave-front scanner.

Index convention
    A configuration stores vertices in increasing index, slot ``i`` holding
    ``(x_i, xi_i)``. An edge pair ``i < j`` carries a future-causal covector
    ``p_ij`` from ``x_i`` to ``x_j``, and ``xi_i = sum_{j>i} p_ij - sum_{j<i} p_ji``.
    Written out right-to-left, as in ``(x_n, xi_n; ...; x_1, xi_1)``, this
    is the ordering in which singularities originate on the right. A
    two-point wave-front element ``(x, xi; y, xi')`` therefore becomes the
    configuration ``[(y, xi'), (x, xi)]``, see :func:`hadamard_to_config`.

Membership for the general variant has an exact characterisation: with
prefix sums ``S_k = xi_1 + ... + xi_k``, the config lies in ``Gamma_n`` iff
``S_n = 0``, every ``S_k`` is future causal (or zero) and not all ``xi_i``
vanish. The certificate is the chain ``p_{k,k+1} = S_k``. A linear program
over a discretised future cone is kept as an independent cross-check and
is the solver for the null-geodesic variant.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import wofz

from .dirac_algebra import ETA

__all__ = [
    "CausalClass",
    "CovectorConfig",
    "ConeVerdict",
    "ZeroSection",
    "SingularMap",
    "EvaluationFailure",
    "classify_covector",
    "in_future_cone",
    "in_gamma_n",
    "in_gamma_n_lp",
    "in_hadamard_set",
    "hadamard_to_config",
    "interleave",
    "random_member",
    "fibonacci_null_generators",
    "GaussianWave",
    "WindowedDistribution",
    "PointDelta",
    "GaussianFunction",
    "HeavisideGaussian",
    "PlaneDelta",
    "SumDistribution",
    "direction_grid",
    "ScanResult",
    "wf_decay_scan",
    "wf_pullback_check",
]

TOL = 1e-12


class ZeroSection(ValueError):
    """All covectors of a configuration vanish."""


class SingularMap(ValueError):
    """A pullback map is not invertible."""


class EvaluationFailure(RuntimeError):
    """A distribution could not be paired with a test function."""


# ----------------------------------------------------------------------
# causal classes
# ----------------------------------------------------------------------


class CausalClass(enum.Enum):
    Nplus = "Nplus"
    Nminus = "Nminus"
    Vplus_timelike = "Vplus_timelike"
    Vminus_timelike = "Vminus_timelike"
    Zero = "Zero"
    Spacelike = "Spacelike"


def _eta_norm(xi: np.ndarray) -> float:
    return float(xi @ ETA @ xi)


def classify_covector(xi: Sequence[float], tol: float = TOL) -> CausalClass:
    """Classify a covector by its raised vector ``eta^{mu nu} xi_nu``.

    ``tol`` is relative to the Euclidean size of ``xi``; boundary cases
    within it count as null.
    """
    xi = np.asarray(xi, dtype=float)
    scale = float(xi @ xi)
    if scale <= tol * tol:
        return CausalClass.Zero
    q = _eta_norm(xi)
    if q < -tol * scale:
        return CausalClass.Spacelike
    future = xi[0] > 0
    if abs(q) <= tol * scale:
        return CausalClass.Nplus if future else CausalClass.Nminus
    return CausalClass.Vplus_timelike if future else CausalClass.Vminus_timelike


def in_future_cone(xi: np.ndarray, tol: float = 1e-10) -> bool:
    """``xi`` in the closed future causal cone ``V+`` (zero included)."""
    xi = np.asarray(xi, dtype=float)
    scale = float(np.sqrt(xi @ xi))
    if scale <= tol:
        return True
    return bool(xi[0] > 0 and _eta_norm(xi) >= -tol * scale * scale)


def _is_future_null(xi: np.ndarray, tol: float = 1e-10) -> bool:
    return classify_covector(xi, tol) is CausalClass.Nplus


# ----------------------------------------------------------------------
# configurations and verdicts
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CovectorConfig:
    """Points ``x_i`` and covectors ``xi_i`` in increasing vertex order.

    ``ordering`` records the convention: ``"increasing"`` (storage order);
    the printed tuple ``(x_n, xi_n; ...; x_1, xi_1)`` lists the same
    vertices reversed.
    """

    points: np.ndarray
    covectors: np.ndarray
    ordering: str = "increasing"

    def __post_init__(self) -> None:
        x = np.atleast_2d(np.asarray(self.points, dtype=float))
        k = np.atleast_2d(np.asarray(self.covectors, dtype=float))
        if x.shape != k.shape or x.shape[1] != 4:
            raise ValueError("points and covectors must both have shape (n, 4)")
        if not 1 <= x.shape[0] <= 4:
            raise ValueError("1 <= n <= 4")
        object.__setattr__(self, "points", x)
        object.__setattr__(self, "covectors", k)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def is_zero_section(self) -> bool:
        return bool(np.all(np.abs(self.covectors) <= TOL))

    def negated(self) -> "CovectorConfig":
        return CovectorConfig(self.points, -self.covectors, self.ordering)

    def scaled(self, s: float) -> "CovectorConfig":
        return CovectorConfig(self.points, s * self.covectors, self.ordering)

    def combine(self, other: "CovectorConfig", a: float, b: float) -> "CovectorConfig":
        if not np.array_equal(self.points, other.points):
            raise ValueError("combinations need identical base points")
        return CovectorConfig(self.points, a * self.covectors + b * other.covectors, self.ordering)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Sequence[float], Sequence[float]]]) -> "CovectorConfig":
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))


@dataclass(frozen=True)
class ConeVerdict:
    """Membership verdict with certificate.

    ``certificate`` maps ``(i, j)``, ``i < j``, to ``p_ij`` for members;
    for non-members ``margin`` is the violation size (larger is clearer).
    """

    member: bool
    certificate: dict = field(default_factory=dict)
    margin: float = 0.0
    method: str = "closed-form"

    def balance_residual(self, cfg: CovectorConfig) -> float:
        """``max_i |xi_i - sum_{j>i} p_ij + sum_{j<i} p_ji|``."""
        rec = np.zeros_like(cfg.covectors)
        for (i, j), p in self.certificate.items():
            if i == j:
                rec[i] += p
                continue
            rec[i] += p
            rec[j] -= p
        return float(np.max(np.abs(rec - cfg.covectors)))


def _future_violation(v: np.ndarray) -> float:
    """Distance-like size of the failure of ``v`` to lie in V+ (0 if inside)."""
    spatial = float(np.linalg.norm(v[1:]))
    return max(0.0, spatial - float(v[0])) / np.sqrt(2.0)


def in_gamma_n(
    cfg: CovectorConfig,
    null_geodesic_variant: bool = False,
    loops: bool = False,
    tol: float = 1e-10,
) -> ConeVerdict:
    """Membership of a covector configuration in ``Gamma_n``.

    Parameters
    ----------
    null_geodesic_variant : bool
        Restrict edge covectors to null directions along null separations
        (``p_ij`` parallel to ``x_j - x_i`` with null separation, or any
        future-null ``p_ij`` when ``x_i = x_j``). Solved by :func:`in_gamma_n_lp`.
    loops : bool
        Alternative reading for self-loops: each vertex may additionally
        absorb one future-causal covector ``q_i``. With the strict reading
        (default) loop contributions cancel, so ``Gamma_1`` is empty.

    Raises
    ------
    ZeroSection
        If all covectors vanish.
    """
    if cfg.is_zero_section():
        raise ZeroSection("configuration lies in the zero section")
    if null_geodesic_variant:
        return in_gamma_n_lp(cfg, null_geodesic_variant=True, loops=loops, tol=tol)
    if loops:
        return in_gamma_n_lp(cfg, loops=True, tol=tol)
    xi = cfg.covectors
    S = np.cumsum(xi, axis=0)
    scale = max(1.0, float(np.max(np.abs(xi))))
    viol = max(_future_violation(S[k]) for k in range(cfg.n - 1)) if cfg.n > 1 else 0.0
    total = float(np.max(np.abs(S[-1])))
    margin = max(viol, total)
    if margin > tol * scale:
        return ConeVerdict(False, {}, margin)
    cert = {(k, k + 1): S[k].copy() for k in range(cfg.n - 1)}
    # exact certificate check against the continuous cone condition
    verdict = ConeVerdict(True, cert, 0.0)
    ok = all(in_future_cone(p, tol * scale) for p in cert.values())
    if not ok or verdict.balance_residual(cfg) > 1e-9 * scale:
        return ConeVerdict(False, {}, margin)
    return verdict


def fibonacci_null_generators(m: int = 64) -> np.ndarray:
    """``m`` future-null covectors ``(1, u)`` with ``u`` on a Fibonacci sphere."""
    i = np.arange(m) + 0.5
    phi = np.arccos(1 - 2 * i / m)
    theta = np.pi * (1 + 5**0.5) * i
    u = np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)
    return np.concatenate([np.ones((m, 1)), u], axis=1)


def _null_direction(v: np.ndarray, tol: float = 1e-9) -> Optional[np.ndarray]:
    """Future-null covector parallel to the lowered vector ``v`` (None if not null).

    ``v`` is scaled to unit sup norm first, so ``tol`` is a relative tolerance.
    """
    low = ETA @ v
    low = low / np.max(np.abs(low))
    if _is_future_null(low, tol):
        return low / low[0]
    if _is_future_null(-low, tol):
        return -low / (-low[0])
    return None


def in_gamma_n_lp(
    cfg: CovectorConfig,
    null_geodesic_variant: bool = False,
    loops: bool = False,
    generators: int = 64,
    tol: float = 1e-10,
) -> ConeVerdict:
    """LP feasibility over a discretised future cone with exact certificate re-verification.

    Edge covectors are nonnegative combinations of generator covectors: 64
    Fibonacci null generators plus the time axis (general variant); one
    null ray per null-separated pair (null-geodesic variant). Extra null
    generators along the data covectors are added so that exact rays are
    available. A feasible LP solution is accepted only if the reconstructed
    certificate satisfies the continuous cone conditions; discretisation can
    therefore cause false negatives but never false positives.
    """
    if cfg.is_zero_section():
        raise ZeroSection("configuration lies in the zero section")
    n = cfg.n
    base = fibonacci_null_generators(generators)
    extra = []
    for v in list(cfg.covectors) + list(np.cumsum(cfg.covectors, axis=0)):
        for s in (1.0, -1.0):
            if _is_future_null(s * v, 1e-9):
                extra.append(s * v / (s * v[0]))
    cone_gens = np.concatenate([base, np.array([[1.0, 0, 0, 0]])] + ([np.array(extra)] if extra else []))
    null_gens = np.concatenate([base] + ([np.array(extra)] if extra else []))

    columns: list[tuple[tuple[int, int], np.ndarray]] = []
    for i, j in itertools.combinations(range(n), 2):
        if null_geodesic_variant:
            sep = cfg.points[j] - cfg.points[i]
            if np.max(np.abs(sep)) <= 1e-9:
                gens = null_gens
            else:
                # relative rounding error of the difference of two event coordinates
                span = max(np.max(np.abs(cfg.points[i])), np.max(np.abs(cfg.points[j])))
                rel = 8 * np.finfo(float).eps * span / np.max(np.abs(sep))
                d = _null_direction(sep, max(1e-9, rel))
                if d is not None and extra:
                    # rounding in a short separation tilts d; prefer the exact data ray it approximates
                    near = [e for e in extra if np.max(np.abs(e - d)) <= 1e-6]
                    d = near[0] if near else d
                gens = [] if d is None else [d]
        else:
            gens = cone_gens
        for g in gens:
            columns.append(((i, j), np.asarray(g)))
    if loops:
        for i in range(n):
            for g in (null_gens if null_geodesic_variant else cone_gens):
                columns.append(((i, i), np.asarray(g)))
    if not columns:
        return ConeVerdict(False, {}, float(np.max(np.abs(cfg.covectors))), "lp")

    A = np.zeros((4 * n, len(columns)))
    for c, ((i, j), g) in enumerate(columns):
        A[4 * i : 4 * i + 4, c] += g
        if i != j:
            A[4 * j : 4 * j + 4, c] -= g
    b = cfg.covectors.reshape(-1)
    res = linprog(np.ones(len(columns)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        margin = float(np.max(np.abs(cfg.covectors)))
        return ConeVerdict(False, {}, margin, "lp")
    cert: dict = {}
    for c, ((i, j), g) in enumerate(columns):
        if res.x[c] > 0:
            cert[(i, j)] = cert.get((i, j), np.zeros(4)) + res.x[c] * g
    verdict = ConeVerdict(True, cert, 0.0, "lp")
    scale = max(1.0, float(np.max(np.abs(cfg.covectors))))
    for (i, j), p in cert.items():
        if not in_future_cone(p, 1e-9):
            return ConeVerdict(False, {}, 0.0, "lp-unverified")
        if null_geodesic_variant and not (_is_future_null(p, 1e-9) or np.max(np.abs(p)) < 1e-12):
            return ConeVerdict(False, {}, 0.0, "lp-unverified")
    if verdict.balance_residual(cfg) > 1e-9 * scale:
        return ConeVerdict(False, {}, 0.0, "lp-unverified")
    return verdict


def interleave(
    a: CovectorConfig, b: CovectorConfig, slots_a: Sequence[int]
) -> CovectorConfig:
    """Order-preserving interleave: ``a``'s vertices go to ``slots_a`` (increasing), ``b`` fills the rest."""
    n = a.n + b.n
    slots_a = list(slots_a)
    if len(slots_a) != a.n or sorted(slots_a) != slots_a or len(set(slots_a)) != a.n:
        raise ValueError("slots_a must be increasing and of length a.n")
    slots_b = [s for s in range(n) if s not in slots_a]
    pts = np.zeros((n, 4))
    cov = np.zeros((n, 4))
    pts[slots_a], cov[slots_a] = a.points, a.covectors
    pts[slots_b], cov[slots_b] = b.points, b.covectors
    return CovectorConfig(pts, cov)


def _random_future(rng: np.random.Generator, null: bool = False) -> np.ndarray:
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    r = 1.0 if null else rng.uniform(0.0, 1.0)
    return rng.uniform(0.2, 2.0) * np.concatenate([[1.0], r * u])


def random_member(rng: np.random.Generator, n: int, points: Optional[np.ndarray] = None) -> CovectorConfig:
    """Random ``Gamma_n`` member built from random future-causal edge covectors."""
    pts = rng.normal(size=(n, 4)) if points is None else points
    cov = np.zeros((n, 4))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.7 or (i, j) == (0, 1):
            p = _random_future(rng, null=rng.random() < 0.3)
            cov[i] += p
            cov[j] -= p
    return CovectorConfig(pts, cov)


# ----------------------------------------------------------------------
# Hadamard set
# ----------------------------------------------------------------------


def in_hadamard_set(x, xi, y, xi_p, tol: float = 1e-9) -> bool:
    """Whether ``(x, xi; y, xi')`` lies in the Minkowski Hadamard wave-front set.

    Requires ``xi`` in ``N- \\ 0``, ``xi'`` in ``N+ \\ 0``, and ``-xi = xi'``
    (flat parallel transport) with either ``x = y`` or ``x - y`` null and
    parallel to the raised ``xi'``.
    """
    x, xi, y, xi_p = (np.asarray(v, dtype=float) for v in (x, xi, y, xi_p))
    if classify_covector(xi, tol) is not CausalClass.Nminus:
        return False
    if classify_covector(xi_p, tol) is not CausalClass.Nplus:
        return False
    scale = max(1.0, float(np.max(np.abs(xi_p))))
    if np.max(np.abs(-xi - xi_p)) > tol * scale:
        return False
    d = x - y
    if np.max(np.abs(d)) <= tol:
        return True
    raised = ETA @ xi_p
    # cotangency: d parallel to the raised covector
    cross = np.outer(d, raised) - np.outer(raised, d)
    return bool(np.max(np.abs(cross)) <= tol * scale * max(1.0, float(np.max(np.abs(d)))))


def hadamard_to_config(x, xi, y, xi_p) -> CovectorConfig:
    """Reindex ``(x, xi; y, xi')`` (printed right-to-left) into storage order ``[(y, xi'), (x, xi)]``."""
    return CovectorConfig(np.array([y, x], dtype=float), np.array([xi_p, xi], dtype=float))


# ----------------------------------------------------------------------
# wave-front scanner
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianWave:
    """Test function ``exp(-1/2 (x - c)^T Q (x - c) - i xi.x)``."""

    center: np.ndarray
    Q: np.ndarray
    xi: np.ndarray

    @classmethod
    def window(cls, center, xi, width: float = 1.0) -> "GaussianWave":
        c = np.asarray(center, dtype=float)
        return cls(c, np.eye(c.size) / width**2, np.asarray(xi, dtype=float))

    def pushforward(self, A: np.ndarray) -> "GaussianWave":
        """``phi o A^-1``, i.e. the test function in the coordinates ``y = A x``."""
        Ainv = np.linalg.inv(A)
        return GaussianWave(A @ self.center, Ainv.T @ self.Q @ Ainv, Ainv.T @ self.xi)


def _log_gaussian_moments(P: np.ndarray, phi: GaussianWave):
    """Quantities for ``int exp(-1/2 x^T P x) phi(x) dx``.

    Returns ``(logZ, mu, Minv)`` with the complex log of the integral, the
    complex mean and the covariance of the combined Gaussian.
    """
    M = P + phi.Q
    bvec = phi.Q @ phi.center - 1j * phi.xi
    Minv = np.linalg.inv(M)
    mu = Minv @ bvec
    d = M.shape[0]
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0:
        raise EvaluationFailure("combined Gaussian is not positive-definite")
    logZ = 0.5 * d * np.log(2 * np.pi) - 0.5 * logdet + 0.5 * bvec @ mu - 0.5 * phi.center @ phi.Q @ phi.center
    return logZ, mu, Minv


def _log_erfc(z: complex) -> complex:
    """``log erfc(z)`` via the Faddeeva function, stable for large ``|z|``."""
    if np.real(z) >= 0:
        return -z * z + np.log(wofz(1j * z))
    return np.log(2.0 - np.exp(-z * z) * wofz(-1j * z))


class WindowedDistribution:
    """A distribution that can be paired with :class:`GaussianWave` test functions.

    ``log_pair(phi)`` returns the complex logarithm of ``u(phi)``.
    """

    dim: int

    def log_pair(self, phi: GaussianWave) -> complex:  # pragma: no cover - interface
        raise NotImplementedError

    def pullback(self, A: np.ndarray) -> "WindowedDistribution":  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class PointDelta(WindowedDistribution):
    """``c * delta_a``."""

    a: np.ndarray
    coef: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.a)

    def log_pair(self, phi: GaussianWave) -> complex:
        d = self.a - phi.center
        return np.log(complex(self.coef)) - 0.5 * d @ phi.Q @ d - 1j * phi.xi @ self.a

    def pullback(self, A: np.ndarray) -> "PointDelta":
        A = np.asarray(A)
        return PointDelta(np.linalg.solve(A, self.a), self.coef / abs(np.linalg.det(A)))


@dataclass(frozen=True)
class GaussianFunction(WindowedDistribution):
    """``exp(-1/2 x^T P x)`` (a smooth function)."""

    P: np.ndarray

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def log_pair(self, phi: GaussianWave) -> complex:
        return _log_gaussian_moments(self.P, phi)[0]

    def pullback(self, A: np.ndarray) -> "GaussianFunction":
        return GaussianFunction(A.T @ self.P @ A)


@dataclass(frozen=True)
class HeavisideGaussian(WindowedDistribution):
    """``theta(n.x) exp(-1/2 x^T P x)``; ``P`` may be degenerate along ``n``."""

    normal: np.ndarray
    P: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.normal)

    def log_pair(self, phi: GaussianWave) -> complex:
        logZ, mu, Minv = _log_gaussian_moments(self.P, phi)
        s2 = self.normal @ Minv @ self.normal
        z = -(self.normal @ mu) / np.sqrt(2 * s2)
        return logZ + np.log(0.5) + _log_erfc(z)

    def pullback(self, A: np.ndarray) -> "HeavisideGaussian":
        return HeavisideGaussian(A.T @ self.normal, A.T @ self.P @ A)

    @classmethod
    def time_step(cls, dim: int = 4) -> "HeavisideGaussian":
        """``theta(x^0)`` times a unit Gaussian in the spatial variables."""
        n = np.zeros(dim)
        n[0] = 1.0
        P = np.eye(dim)
        P[0, 0] = 0.0
        return cls(n, P)


@dataclass(frozen=True)
class PlaneDelta(WindowedDistribution):
    """``delta(n.x)``: the hyperplane ``n.x = 0`` with surface weight ``1/|n|``."""

    normal: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.normal)

    def log_pair(self, phi: GaussianWave) -> complex:
        logZ, mu, Minv = _log_gaussian_moments(np.zeros((self.dim, self.dim)), phi)
        s2 = self.normal @ Minv @ self.normal
        m = self.normal @ mu
        return logZ - 0.5 * np.log(2 * np.pi * s2) - m * m / (2 * s2)

    def pullback(self, A: np.ndarray) -> "PlaneDelta":
        return PlaneDelta(A.T @ self.normal)


@dataclass(frozen=True)
class SumDistribution(WindowedDistribution):
    """``sum_k c_k u_k`` with complex ``c_k`` and real distributions ``u_k``."""

    terms: tuple[tuple[complex, WindowedDistribution], ...]

    @property
    def dim(self) -> int:
        return self.terms[0][1].dim

    def log_pair(self, phi: GaussianWave) -> complex:
        logs = []
        for c, u in self.terms:
            if c == 0:
                continue
            logs.append(np.log(complex(c)) + u.log_pair(phi))
        if not logs:
            return complex(-np.inf)
        logs = np.array(logs)
        ref = np.max(logs.real)
        s = np.sum(np.exp(logs - ref))
        if s == 0:
            return complex(-np.inf)
        return ref + np.log(s)

    def pullback(self, A: np.ndarray) -> "SumDistribution":
        return SumDistribution(tuple((c, u.pullback(A)) for c, u in self.terms))

    def real_part(self) -> "SumDistribution":
        return SumDistribution(tuple((complex(c).real, u) for c, u in self.terms))

    def imag_part(self) -> "SumDistribution":
        return SumDistribution(tuple((complex(c).imag, u) for c, u in self.terms))


def direction_grid(dim: int = 4) -> np.ndarray:
    """Unit directions: the ``2 dim`` axes plus all normalised ``(+-1, +-1)`` pairs."""
    dirs = []
    eye = np.eye(dim)
    for i in range(dim):
        dirs += [eye[i], -eye[i]]
    for i, j in itertools.combinations(range(dim), 2):
        for si, sj in itertools.product((1, -1), repeat=2):
            dirs.append((si * eye[i] + sj * eye[j]) / np.sqrt(2))
    return np.array(dirs)


@dataclass(frozen=True)
class ScanResult:
    directions: np.ndarray
    slopes: np.ndarray
    singular: np.ndarray
    magnitudes: np.ndarray
    n_star: float

    def singular_directions(self) -> np.ndarray:
        return self.directions[self.singular]


def wf_decay_scan(
    dist: WindowedDistribution,
    x: Sequence[float],
    width: float = 1.0,
    directions: Optional[np.ndarray] = None,
    xi_range: tuple[float, float] = (4.0, 64.0),
    n_mag: int = 12,
    n_star: float = 6.0,
    window: Optional[np.ndarray] = None,
) -> ScanResult:
    """Decay-order estimates of ``|u(exp(-i xi.) f)|`` along directions.

    ``f`` is a Gaussian window of width ``width`` centred at ``x`` (or with
    precision matrix ``window``). For each direction the least-squares slope
    of ``log|u|`` against ``log|xi|`` over ``n_mag`` log-spaced magnitudes is
    computed; a direction is singular if the slope exceeds ``-n_star``.

    Raises
    ------
    EvaluationFailure
        Propagated from the distribution.
    """
    x = np.asarray(x, dtype=float)
    dirs = direction_grid(len(x)) if directions is None else np.asarray(directions, dtype=float)
    mags = np.geomspace(xi_range[0], xi_range[1], n_mag)
    Q = np.eye(len(x)) / width**2 if window is None else np.asarray(window)
    lx = np.log(mags)
    slopes = np.zeros(len(dirs))
    for k, d in enumerate(dirs):
        d = d / np.linalg.norm(d)
        logs = np.array([dist.log_pair(GaussianWave(x, Q, r * d)).real for r in mags])
        if np.any(~np.isfinite(logs)):
            # exact zeros or underflow: treat as arbitrarily fast decay
            logs = np.where(np.isfinite(logs), logs, -1e6)
        slopes[k] = np.polyfit(lx, logs, 1)[0]
    return ScanResult(dirs, slopes, slopes > -n_star, mags, n_star)


@dataclass(frozen=True)
class PullbackReport:
    directions: np.ndarray
    mapped_directions: np.ndarray
    verdicts_pullback: np.ndarray
    verdicts_mapped: np.ndarray

    @property
    def mismatches(self) -> int:
        return int(np.sum(self.verdicts_pullback != self.verdicts_mapped))


def wf_pullback_check(
    A: np.ndarray,
    dist: WindowedDistribution,
    x: Sequence[float],
    directions: Optional[np.ndarray] = None,
    **scan_kwargs,
) -> PullbackReport:
    """Compare scanner verdicts of ``A^* u`` (``(A^* u)(x) = u(A x)``) with those of ``u``.

    Direction ``xi`` of ``A^* u`` at ``x`` corresponds to ``A^{-T} xi`` of ``u``
    at ``A x``. Both scans use their own default windows.

    Raises
    ------
    SingularMap
        If ``A`` is not invertible.
    """
    A = np.asarray(A, dtype=float)
    if abs(np.linalg.det(A)) < 1e-12:
        raise SingularMap("pullback map is singular")
    x = np.asarray(x, dtype=float)
    dirs = direction_grid(len(x)) if directions is None else np.asarray(directions, dtype=float)
    pulled = dist.pullback(A)
    r1 = wf_decay_scan(pulled, x, directions=dirs, **scan_kwargs)
    mapped = np.linalg.solve(A.T, dirs.T).T
    mapped /= np.linalg.norm(mapped, axis=1, keepdims=True)
    r2 = wf_decay_scan(dist, A @ x, directions=mapped, **scan_kwargs)
    return PullbackReport(dirs, mapped, r1.singular, r2.singular)
