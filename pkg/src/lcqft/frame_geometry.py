"""Frame-level differential geometry and the Dirac operator on grid fields.

Conventions
-----------
* Metric signature (+,-,-,-); ``eta = diag(1,-1,-1,-1)``.
* ``e[..., a, mu]`` holds the frame vectors ``e_a^mu``; ``ecov[..., a, mu]``
  holds the dual coframe ``e^a_mu = g_{mu nu} eta^{ab} e_b^nu``.
* ``christoffel[..., rho, mu, nu]`` is ``Gamma^rho_{mu nu}``.
* ``frame_gamma[..., a, b, c]`` is ``Gamma^a_{bc}`` with
  ``nabla_{e_b} e_c = Gamma^a_{bc} e_a``.
* ``sigma[..., b, :, :]`` is the spin connection ``1/4 Gamma^a_{bc} gamma_a gamma^c``.
* Spinor fields are column vectors, cospinor fields row vectors; both are
  stored with a trailing axis of length 4. The covariant derivatives are
  ``nabla_b u = d_b u + sigma_b u`` and ``nabla_b v = d_b v - v sigma_b``.

All geometric routines are vectorised over leading axes of the point array.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .dirac_algebra import ETA, AdjointPair, GammaRep, find_adjoint_conjugation, weyl_representation

__all__ = [
    "MetricField",
    "Vierbein",
    "ConnectionData",
    "SpinorGridField",
    "GridGeometry",
    "SingularMetric",
    "FrameDegenerate",
    "GridTooSmall",
    "minkowski",
    "frw",
    "bump",
    "bump_family",
    "bump_profile",
    "metric_derivative",
    "christoffel",
    "vierbein",
    "frame_derivative",
    "spin_connection",
    "covgamma_residual",
    "antisymmetry_residual",
    "grid_geometry",
    "grid_gradient",
    "grid_coords",
    "nabla_slash",
    "dirac_apply",
    "adjoint_field",
    "charge_conjugate_field",
    "dirac_variation",
    "dirac_variation_on_shell_terms",
    "fd_dirac_variation",
    "semt_classical",
    "semt_divergence",
    "plane_wave",
    "stencil_momentum",
    "stencil_on_shell",
]

Kind = Literal["spinor", "cospinor"]


def _einsum(*operands):
    return np.einsum(*operands, optimize="greedy")


class SingularMetric(ValueError):
    """The metric is (numerically) degenerate at a requested point."""


class FrameDegenerate(SingularMetric):
    """A Gram-Schmidt pivot fell below tolerance."""


class GridTooSmall(ValueError):
    """The grid has too few points for the derivative stencil."""


# ----------------------------------------------------------------------
# metrics
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MetricField:
    """A Lorentzian metric ``g_{mu nu}(x)`` given as a vectorised callable.

    Parameters
    ----------
    evaluate : callable
        Maps points of shape ``(..., 4)`` to matrices of shape ``(..., 4, 4)``.
    derivative : callable, optional
        Maps points to ``d_mu g_{ab}`` with shape ``(..., 4, 4, 4)``, first
        index ``mu``. Central differences are used when absent.
    scale : float
        Coordinate scale used to size finite-difference steps.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"
    scale: float = 1.0

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))


def minkowski() -> MetricField:
    def ev(x):
        return np.broadcast_to(ETA, x.shape[:-1] + (4, 4)).copy()

    def dv(x):
        return np.zeros(x.shape[:-1] + (4, 4, 4))

    return MetricField(ev, dv, "minkowski")


def frw(a0: float = 1.0, adot: float = 0.1) -> MetricField:
    """``diag(1, -a^2, -a^2, -a^2)`` with ``a(t) = a0 + adot * t``."""

    def ev(x):
        a = a0 + adot * x[..., 0]
        g = np.zeros(x.shape[:-1] + (4, 4))
        g[..., 0, 0] = 1.0
        for i in (1, 2, 3):
            g[..., i, i] = -a * a
        return g

    def dv(x):
        a = a0 + adot * x[..., 0]
        d = np.zeros(x.shape[:-1] + (4, 4, 4))
        for i in (1, 2, 3):
            d[..., 0, i, i] = -2.0 * a * adot
        return d

    return MetricField(ev, dv, f"frw({a0},{adot})")


_DEFAULT_H = np.array(
    [
        [1.0, 0.3, 0.2, 0.1],
        [0.3, -0.5, 0.2, 0.0],
        [0.2, 0.2, 0.4, 0.1],
        [0.1, 0.0, 0.1, -0.3],
    ]
)


def bump_profile(x: np.ndarray, center, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Compactly supported ``b = exp(1 - 1/(1-r^2))`` for ``r < 1`` and its gradient.

    ``r`` is the Euclidean distance to ``center`` in units of ``width``; the
    peak value is 1.
    """
    d = (x - np.asarray(center, dtype=float)) / width
    r2 = np.sum(d * d, axis=-1)
    inside = r2 < 1.0
    s = np.where(inside, 1.0 - r2, 1.0)
    b = np.where(inside, np.exp(1.0 - 1.0 / s), 0.0)
    # db/dx = b * (-1/s^2) * d(r2)/dx, d(r2)/dx = 2 d / width
    grad = np.where(inside[..., None], (b / s**2)[..., None] * (-2.0 * d / width), 0.0)
    return b, grad


def bump(
    center=(0.0, 0.0, 0.0, 0.0),
    width: float = 1.0,
    amplitude: float = 0.1,
    H: Optional[np.ndarray] = None,
    base: Optional[MetricField] = None,
) -> MetricField:
    """``base + amplitude * b(x) * H`` with a compact bump ``b``."""
    H = _DEFAULT_H if H is None else np.asarray(H, dtype=float)
    H = 0.5 * (H + H.T)
    base = minkowski() if base is None else base

    def ev(x):
        b, _ = bump_profile(x, center, width)
        return base(x) + amplitude * b[..., None, None] * H

    def dv(x):
        _, gb = bump_profile(x, center, width)
        db = metric_derivative(base, x)
        return db + amplitude * gb[..., :, None, None] * H

    return MetricField(ev, dv, f"bump({tuple(center)},{width},{amplitude})")


def bump_family(
    base: MetricField,
    center,
    width: float,
    H: Optional[np.ndarray] = None,
) -> Callable[[float], MetricField]:
    """The curve ``eps -> base + eps * b(x) * H`` of metrics, equal to ``base`` off the bump."""

    def family(eps: float) -> MetricField:
        return bump(center, width, eps, H, base)

    return family


def metric_derivative(g: MetricField, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """``d_mu g_{ab}`` with shape ``(..., 4, 4, 4)``.

    Uses the analytic derivative when the metric provides one, central
    differences otherwise.
    """
    x = np.asarray(x, dtype=float)
    if g.derivative is not None and step is None:
        return g.derivative(x)
    h = (1e-5 if step is None else step) * g.scale
    out = np.empty(x.shape[:-1] + (4, 4, 4))
    for mu in range(4):
        dx = np.zeros(4)
        dx[mu] = h
        out[..., mu, :, :] = (g(x + dx) - g(x - dx)) / (2 * h)
    return out


def _inverse(gm: np.ndarray) -> np.ndarray:
    det = np.linalg.det(gm)
    if np.any(np.abs(det) < 1e-12):
        raise SingularMetric("|det g| < 1e-12")
    return np.linalg.inv(gm)


def christoffel(g: MetricField, x, step: Optional[float] = None) -> np.ndarray:
    """``Gamma^rho_{mu nu} = 1/2 g^{rho sigma}(d_mu g_{nu sigma} + d_nu g_{mu sigma} - d_sigma g_{mu nu})``.

    Raises
    ------
    SingularMetric
        If ``|det g| < 1e-12`` at any point.
    """
    x = np.asarray(x, dtype=float)
    ginv = _inverse(g(x))
    dg = metric_derivative(g, x, step)  # [mu, a, b]
    lower = (
        _einsum("...mns->...smn", dg)  # d_mu g_{nu sigma} -> [sigma, mu, nu]
        + _einsum("...nms->...smn", dg)
        - dg
    )
    return 0.5 * _einsum("...rs,...smn->...rmn", ginv, lower)


# ----------------------------------------------------------------------
# frames
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Vierbein:
    """Frame ``e[..., a, mu] = e_a^mu`` and coframe ``ecov[..., a, mu] = e^a_mu``."""

    e: np.ndarray
    ecov: np.ndarray

    def orthonormality_residual(self, gm: np.ndarray) -> float:
        G = _einsum("...am,...mn,...bn->...ab", self.e, gm, self.e)
        return float(np.max(np.abs(G - ETA)))

    def coframe_residual(self, gm: np.ndarray) -> float:
        expect = _einsum("...mn,ab,...bn->...am", gm, ETA, self.e)
        dual = _einsum("...am,...bm->...ab", self.ecov, self.e)
        return float(max(np.max(np.abs(expect - self.ecov)), np.max(np.abs(dual - np.eye(4)))))


def _gram_schmidt(gm: np.ndarray, order: Sequence[int], pivot: float) -> np.ndarray:
    shape = gm.shape[:-2]
    e = np.zeros(shape + (4, 4))
    done: list[int] = []
    for a in order:
        # start from the coordinate vector d_a; g(d_a, w) is row a of g w
        v = np.zeros(shape + (4,))
        v[..., a] = 1.0
        for b in done:
            gw = np.matmul(gm, e[..., b, :, None])[..., 0]
            proj = np.sum(v * gw, axis=-1)
            v = v - ETA[b, b] * proj[..., None] * e[..., b, :]
        done.append(a)
        n2 = np.sum(v * np.matmul(gm, v[..., None])[..., 0], axis=-1)
        want = ETA[a, a]
        if np.any(n2 * want < pivot):
            raise FrameDegenerate(f"Gram-Schmidt pivot below {pivot:g} for frame vector {a}")
        e[..., a, :] = v / np.sqrt(n2 * want)[..., None]
    return e


def vierbein(
    g: MetricField,
    x,
    order: Sequence[int] = (0, 1, 2, 3),
    pivot: float = 1e-10,
) -> Vierbein:
    """Orthonormal frame by Gram-Schmidt on the coordinate vectors.

    Frame vector ``e_a`` is built from ``d_a``; ``order`` is the sequence in
    which the coordinate vectors are processed. ``order[0]`` must be the time
    coordinate so that ``e_0`` is future pointing. Different orders give
    frame families that agree for diagonal metrics and differ by a local
    rotation otherwise.

    Raises
    ------
    SingularMetric
        If the metric is degenerate or a pivot is too small.
    """
    if order[0] != 0 or sorted(order) != [0, 1, 2, 3]:
        raise ValueError("order must be a permutation of 0..3 starting with 0")
    x = np.asarray(x, dtype=float)
    gm = g(x)
    _inverse(gm)
    e = _gram_schmidt(gm, order, pivot)
    flip = e[..., 0, 0] < 0
    e[..., 0, :] = np.where(flip[..., None], -e[..., 0, :], e[..., 0, :])
    # e^a_mu = eta^{ab} g_{mu nu} e_b^nu
    ecov = np.matmul(ETA, np.matmul(e, gm))
    return Vierbein(e, ecov)


def frame_derivative(
    g: MetricField,
    x,
    order: Sequence[int] = (0, 1, 2, 3),
    step: Optional[float] = None,
) -> np.ndarray:
    """``d_mu e_c^rho`` by central differences, shape ``(..., 4, 4, 4)`` as ``[mu, c, rho]``."""
    x = np.asarray(x, dtype=float)
    h = (1e-5 if step is None else step) * g.scale
    out = np.empty(x.shape[:-1] + (4, 4, 4))
    for mu in range(4):
        dx = np.zeros(4)
        dx[mu] = h
        out[..., mu, :, :] = (vierbein(g, x + dx, order).e - vierbein(g, x - dx, order).e) / (2 * h)
    return out


@dataclass(frozen=True)
class ConnectionData:
    """Christoffel symbols, frame connection and spin connection at points."""

    christoffel: np.ndarray
    frame_gamma: np.ndarray
    spin_sigma: np.ndarray
    frame: Vierbein


def _default_rep(rep: Optional[GammaRep]) -> GammaRep:
    return weyl_representation() if rep is None else rep


def spin_connection(
    g: MetricField,
    x,
    rep: Optional[GammaRep] = None,
    order: Sequence[int] = (0, 1, 2, 3),
    step: Optional[float] = None,
) -> ConnectionData:
    """Frame connection ``Gamma^a_{bc}`` and spin connection ``sigma_b``.

    ``Gamma^a_{bc} = e^a_rho e_b^mu d_mu e_c^rho + e^a_rho e_b^mu e_c^nu Gamma^rho_{mu nu}``
    and ``sigma_b = 1/4 Gamma^a_{bc} gamma_a gamma^c``.
    """
    rep = _default_rep(rep)
    x = np.asarray(x, dtype=float)
    chris = christoffel(g, x, step)
    fr = vierbein(g, x, order)
    de = frame_derivative(g, x, order, step)
    e, ecov = fr.e, fr.ecov
    fg = _einsum("...ar,...bm,...mcr->...abc", ecov, e, de) + _einsum(
        "...ar,...bm,...cn,...rmn->...abc", ecov, e, e, chris
    )
    gg = _einsum("aij,cjk->acik", rep.gammas, rep.upper)  # gamma_a gamma^c
    sigma = 0.25 * _einsum("...abc,acij->...bij", fg, gg)
    return ConnectionData(chris, fg, sigma, fr)


def covgamma_residual(conn: ConnectionData, rep: Optional[GammaRep] = None) -> float:
    """``max |sigma_b gamma_a - gamma_a sigma_b - Gamma^c_{ba} gamma_c|``."""
    rep = _default_rep(rep)
    s = conn.spin_sigma
    g = rep.gammas
    comm = _einsum("...bij,ajk->...baik", s, g) - _einsum("aij,...bjk->...baik", g, s)
    lin = _einsum("...cba,cij->...baij", conn.frame_gamma, g)
    return float(np.max(np.abs(comm - lin)))


def antisymmetry_residual(conn: ConnectionData) -> float:
    """``max |eta_da Gamma^a_bc + eta_ca Gamma^a_bd|``."""
    low = _einsum("da,...abc->...dbc", ETA, conn.frame_gamma)
    return float(np.max(np.abs(low + _einsum("...dbc->...cbd", low))))


# ----------------------------------------------------------------------
# grid fields
# ----------------------------------------------------------------------

_STENCIL_RADIUS = 2


@dataclass(frozen=True)
class SpinorGridField:
    """Spinor or cospinor components on a regular coordinate grid.

    Parameters
    ----------
    values : ndarray, shape (n0, n1, n2, n3, 4)
        Complex components.
    spacing : sequence of 4 floats
        Grid step per axis.
    origin : sequence of 4 floats
        Coordinates of ``values[0, 0, 0, 0]``.
    kind : {"spinor", "cospinor"}
    """

    values: np.ndarray
    spacing: tuple[float, float, float, float]
    origin: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    kind: Kind = "spinor"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 5 or v.shape[-1] != 4:
            raise ValueError("values must have shape (n0, n1, n2, n3, 4)")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "spacing", tuple(float(h) for h in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape[:4]

    def coords(self) -> np.ndarray:
        return grid_coords(self.shape, self.spacing, self.origin)

    def with_values(self, values: np.ndarray, crop: int = 0, kind: Optional[Kind] = None) -> "SpinorGridField":
        origin = tuple(o + crop * h for o, h in zip(self.origin, self.spacing))
        return SpinorGridField(values, self.spacing, origin, kind or self.kind)

    def crop(self, k: int) -> "SpinorGridField":
        sl = (slice(k, -k if k else None),) * 4
        return self.with_values(self.values[sl], crop=k)

    def subsample(self, step: int = 2) -> "SpinorGridField":
        sl = (slice(None, None, step),) * 4
        return SpinorGridField(
            self.values[sl], tuple(h * step for h in self.spacing), self.origin, self.kind
        )


def grid_coords(shape, spacing, origin) -> np.ndarray:
    axes = [o + h * np.arange(n) for n, h, o in zip(shape, spacing, origin)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _crop(a: np.ndarray, k: int) -> np.ndarray:
    return a[(slice(k, -k),) * 4]


def grid_gradient(values: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Fourth-order central derivatives on the interior.

    Parameters
    ----------
    values : ndarray, shape (n0, n1, n2, n3, ...)
    spacing : 4 floats

    Returns
    -------
    ndarray, shape (n0-4, n1-4, n2-4, n3-4, 4, ...)
        ``d_mu`` of the values, cropped by the stencil radius on every axis.
    """
    r = _STENCIL_RADIUS
    if any(n < 2 * r + 1 for n in values.shape[:4]):
        raise GridTooSmall(f"need at least {2 * r + 1} points per axis, got {values.shape[:4]}")
    out = []
    for mu in range(4):
        h = spacing[mu]

        def sl(shift: int):
            idx = [slice(r, n - r) for n in values.shape[:4]]
            n = values.shape[mu]
            idx[mu] = slice(r + shift, n - r + shift)
            return values[tuple(idx)]

        out.append((-sl(2) + 8 * sl(1) - 8 * sl(-1) + sl(-2)) / (12 * h))
    return np.stack(out, axis=4)


@dataclass(frozen=True)
class GridGeometry:
    """Frame, coframe, spin connection and volume factor sampled on grid points."""

    e: np.ndarray
    ecov: np.ndarray
    sigma: np.ndarray
    sqrt_det: np.ndarray
    metric: np.ndarray

    def crop(self, k: int) -> "GridGeometry":
        return GridGeometry(*(_crop(a, k) for a in (self.e, self.ecov, self.sigma, self.sqrt_det, self.metric)))


def grid_geometry(
    g: MetricField,
    coords: np.ndarray,
    rep: Optional[GammaRep] = None,
    order: Sequence[int] = (0, 1, 2, 3),
) -> GridGeometry:
    conn = spin_connection(g, coords, rep, order)
    gm = g(coords)
    return GridGeometry(
        conn.frame.e, conn.frame.ecov, conn.spin_sigma, np.sqrt(np.abs(np.linalg.det(gm))), gm
    )


def _covariant_components(
    values: np.ndarray, spacing, geom: GridGeometry, kind: Kind
) -> np.ndarray:
    """``nabla_a`` of a (co)spinor field in frame components, on the cropped grid."""
    d = grid_gradient(values, spacing)  # [..., mu, i]
    gc = geom.crop(_STENCIL_RADIUS)
    da = _einsum("...am,...mi->...ai", gc.e, d)
    v = _crop(values, _STENCIL_RADIUS)
    if kind == "spinor":
        return da + _einsum("...aij,...j->...ai", gc.sigma, v)
    return da - _einsum("...j,...aji->...ai", v, gc.sigma)


def _slash_components(nab: np.ndarray, rep: GammaRep, kind: Kind) -> np.ndarray:
    if kind == "spinor":
        return _einsum("aij,...aj->...i", rep.upper, nab)
    return _einsum("...aj,aji->...i", nab, rep.upper)


def _geometry_for(field: SpinorGridField, g: MetricField, rep, order, geom):
    if geom is None:
        geom = grid_geometry(g, field.coords(), rep, order)
    return geom


def nabla_slash(
    field: SpinorGridField,
    g: MetricField,
    rep: Optional[GammaRep] = None,
    geom: Optional[GridGeometry] = None,
    order: Sequence[int] = (0, 1, 2, 3),
) -> SpinorGridField:
    """``gamma^a nabla_a u`` (spinor) or ``nabla_a v gamma^a`` (cospinor) on the cropped grid.

    Raises
    ------
    GridTooSmall
        If an axis has fewer than 5 points.
    """
    rep = _default_rep(rep)
    geom = _geometry_for(field, g, rep, order, geom)
    nab = _covariant_components(field.values, field.spacing, geom, field.kind)
    return field.with_values(_slash_components(nab, rep, field.kind), crop=_STENCIL_RADIUS)


def dirac_apply(
    field: SpinorGridField,
    g: MetricField,
    m: float,
    rep: Optional[GammaRep] = None,
    geom: Optional[GridGeometry] = None,
    order: Sequence[int] = (0, 1, 2, 3),
) -> SpinorGridField:
    """``(-i nabla_slash + m) u`` for spinors, ``(i nabla_slash + m) v`` for cospinors."""
    ns = nabla_slash(field, g, rep, geom, order)
    sign = -1j if field.kind == "spinor" else 1j
    return ns.with_values(sign * ns.values + m * _crop(field.values, _STENCIL_RADIUS))


def adjoint_field(field: SpinorGridField, ac: AdjointPair) -> SpinorGridField:
    """Dirac adjoint: ``u^+ = u^* A`` and ``v^+ = A^{-1} v^*``."""
    if field.kind == "spinor":
        vals = _einsum("...i,ij->...j", field.values.conj(), ac.A)
        return replace(field, values=vals, kind="cospinor")
    vals = _einsum("ij,...j->...i", np.linalg.inv(ac.A), field.values.conj())
    return replace(field, values=vals, kind="spinor")


def charge_conjugate_field(field: SpinorGridField, ac: AdjointPair) -> SpinorGridField:
    """Charge conjugation: ``u^c = C^{-1} conj(u)`` and ``v^c = conj(v) C``."""
    if field.kind == "spinor":
        vals = _einsum("ij,...j->...i", np.linalg.inv(ac.C), field.values.conj())
    else:
        vals = _einsum("...i,ij->...j", field.values.conj(), ac.C)
    return replace(field, values=vals)


def stencil_momentum(k_lower: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Effective momentum seen by the fourth-order stencil.

    The stencil maps ``exp(-i k_mu x^mu)`` to ``-i kt_mu exp(-i k_mu x^mu)`` with
    ``kt = (8 sin(k h) - sin(2 k h)) / (6 h)`` per axis.
    """
    k = np.asarray(k_lower, dtype=float)
    h = np.asarray(spacing, dtype=float)
    return (8 * np.sin(k * h) - np.sin(2 * k * h)) / (6 * h)


def stencil_on_shell(k_spatial: Sequence[float], m: float, spacing: Sequence[float]) -> np.ndarray:
    """Upper-index momentum whose stencil momentum satisfies ``kt.kt = m^2``.

    Plane waves built from it solve the discretised flat Dirac equation to
    rounding error, which isolates other error sources in tests.
    """
    ks = np.asarray(k_spatial, dtype=float)
    h = np.asarray(spacing, dtype=float)
    kt_sp = stencil_momentum(-ks, h[1:])

    def resid(k0):
        return stencil_momentum(np.array([k0]), h[:1])[0] ** 2 - kt_sp @ kt_sp - m * m

    k0 = brentq(resid, 0.0, 1.3 / h[0])
    return np.concatenate([[k0], ks])


def plane_wave(
    k: np.ndarray,
    m: float,
    shape,
    spacing,
    origin=(0.0, 0.0, 0.0, 0.0),
    kind: Kind = "spinor",
    which: int = 0,
    rep: Optional[GammaRep] = None,
    dispersion: Literal["continuum", "stencil"] = "continuum",
) -> SpinorGridField:
    """Minkowski plane-wave solution ``a exp(-i k.x)`` of the free Dirac equation.

    ``k`` has an upper index. With ``dispersion="continuum"`` it must satisfy
    ``k.k = m^2`` and the amplitude solves ``k_slash u0 = m u0`` (spinors) or
    ``v0 k_slash = -m v0`` (cospinors). With ``dispersion="stencil"`` the
    stencil momentum of ``k`` is used instead, see :func:`stencil_on_shell`.
    """
    rep = _default_rep(rep)
    k = np.asarray(k, dtype=float)
    kk = k if dispersion == "continuum" else ETA @ stencil_momentum(ETA @ k, spacing)
    ks = rep.slash(kk)  # k^a gamma_a
    tol = 1e-8 * max(1.0, abs(m))
    if kind == "spinor":
        w, V = np.linalg.eig(ks)
        cols = V[:, np.abs(w - m) < tol]
    else:
        w, V = np.linalg.eig(ks.T)
        cols = V[:, np.abs(w + m) < tol]
    if cols.shape[1] <= which:
        raise ValueError("momentum is not on the mass shell")
    amp = cols[:, which]
    x = grid_coords(shape, spacing, origin)
    phase = np.exp(-1j * _einsum("...m,mn,n->...", x, ETA, k))
    return SpinorGridField(phase[..., None] * amp, spacing, origin, kind)


# ----------------------------------------------------------------------
# metric variation of the Dirac operator
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Variations:
    dg_low: np.ndarray  # delta g_{ab}
    dg_up: np.ndarray  # delta g^{ab}
    de_cov: np.ndarray  # delta e^c_beta
    geom: GridGeometry


def _variations(
    family: Callable[[float], MetricField],
    coords: np.ndarray,
    rep: GammaRep,
    order: Sequence[int],
    deps: float,
) -> _Variations:
    gp, gm_ = family(deps), family(-deps)
    xp, xm = gp(coords), gm_(coords)
    dg_low = (xp - xm) / (2 * deps)
    dg_up = (np.linalg.inv(xp) - np.linalg.inv(xm)) / (2 * deps)
    de_cov = (vierbein(gp, coords, order).ecov - vierbein(gm_, coords, order).ecov) / (2 * deps)
    return _Variations(dg_low, dg_up, de_cov, grid_geometry(family(0.0), coords, rep, order))


def _divergence(Y: np.ndarray, spacing, geom: GridGeometry, kind: Kind) -> np.ndarray:
    """``nabla_b Y^b`` for a (co)spinor-valued vector ``Y[..., b, i]`` in frame components."""
    q = _einsum("...,...bm,...bi->...mi", geom.sqrt_det, geom.e, Y)
    d = grid_gradient(q, spacing)  # [..., nu, mu, i]
    div = _einsum("...mmi->...i", d) / _crop(geom.sqrt_det, _STENCIL_RADIUS)[..., None]
    gc = geom.crop(_STENCIL_RADIUS)
    Yc = _crop(Y, _STENCIL_RADIUS)
    if kind == "spinor":
        return div + _einsum("...bij,...bj->...i", gc.sigma, Yc)
    return div - _einsum("...bj,...bji->...i", Yc, gc.sigma)


def _dirac_op(values, spacing, geom, rep, kind, m):
    nab = _covariant_components(values, spacing, geom, kind)
    ns = _slash_components(nab, rep, kind)
    sign = -1j if kind == "spinor" else 1j
    return sign * ns + m * _crop(values, _STENCIL_RADIUS)


def _variation_terms(
    field: SpinorGridField,
    family: Callable[[float], MetricField],
    m: float,
    rep: GammaRep,
    order: Sequence[int],
    deps: float,
) -> dict[str, np.ndarray]:
    var = _variations(family, field.coords(), rep, order, deps)
    geom = var.geom
    e, ecov = geom.e, geom.ecov
    ginv = np.linalg.inv(geom.metric)
    X = _einsum("...cb,...ab->...ca", var.de_cov, e)  # delta e^c_beta e_a^beta -> X[c, a]
    phi = _einsum("...ab,...ab->...", var.dg_low, ginv)
    W = _einsum("...ab,...ca,...db->...cd", var.dg_up, ecov, ecov)  # W^{cd}
    v = field.values
    h = field.spacing
    kind = field.kind
    g = rep.gammas
    gu = rep.upper
    r = _STENCIL_RADIUS

    def D(vals):
        return _dirac_op(vals, h, geom, rep, kind, m)

    Dv = D(v)
    nab = _covariant_components(v, h, geom, kind)  # [..., a, i]
    phic, Wc = _crop(phi, r), _crop(W, r)
    if kind == "cospinor":
        M = _einsum("...cb,cij,bjk->...ik", X, g, gu)  # X^c_b gamma_c gamma^b
        Mc = _crop(M, r)
        Z = _einsum("...i,...ij->...j", v, M)
        Y = _einsum("...ab,...i,aij->...bj", W, v, g)  # W^{ab} v gamma_a, vector index b
        return {
            "frame_total": -0.25j * D(Z),
            "frame_local": 0.25j * _einsum("...i,...ij->...j", Dv, Mc),
            "trace_total": -0.125j * D(phi[..., None] * v),
            "trace_local": 0.125j * phic[..., None] * Dv,
            "grad": 0.25 * _einsum("...ab,...ai,bij->...j", Wc, nab, g),
            "div": 0.25 * _divergence(Y, h, geom, kind),
        }
    M = _einsum("...cb,bij,cjk->...ik", X, gu, g)  # X^c_b gamma^b gamma_c
    Mc = _crop(M, r)
    Z = _einsum("...ij,...j->...i", M, v)
    Y = _einsum("...ab,aij,...j->...bi", W, g, v)
    return {
        "frame_total": 0.25j * D(Z),
        "frame_local": -0.25j * _einsum("...ij,...j->...i", Mc, Dv),
        "trace_total": 0.125j * D(phi[..., None] * v),
        "trace_local": -0.125j * phic[..., None] * Dv,
        "grad": 0.25 * _einsum("...ab,bij,...aj->...i", Wc, g, nab),
        "div": 0.25 * _divergence(Y, h, geom, kind),
    }


def dirac_variation(
    family: Callable[[float], MetricField],
    field: SpinorGridField,
    m: float = 1.0,
    rep: Optional[GammaRep] = None,
    order: Sequence[int] = (0, 1, 2, 3),
    deps: float = 1e-4,
) -> SpinorGridField:
    """Closed-form first variation of the Dirac operator along a metric curve.

    For a cospinor ``v`` with ``D_c = i nabla_slash + m``::

        delta nabla_slash v = -i/4 D_c(X^c_b v gamma_c gamma^b) + i/4 X^c_b (D_c v) gamma_c gamma^b
                              - i/8 D_c(phi v) + i/8 phi D_c v
                              + 1/4 W^{ab} nabla_a v gamma_b + 1/4 nabla_b(W^{ab} v gamma_a)

    and for a spinor ``u`` with ``D_s = -i nabla_slash + m``::

        delta nabla_slash u = i/4 D_s(X^c_b gamma^b gamma_c u) - i/4 X^c_b gamma^b gamma_c D_s u
                              + i/8 D_s(phi u) - i/8 phi D_s u
                              + 1/4 W^{ab} gamma_b nabla_a u + 1/4 nabla_b(W^{ab} gamma_a u)

    where ``X^c_b = delta e^c_beta e_b^beta``, ``phi = delta g_{ab} g^{ab}`` and
    ``W^{ab} = delta g^{alpha beta} e^a_alpha e^b_beta``. The variations of the
    metric and of the Gram-Schmidt coframe are centred differences in
    ``eps`` with step ``deps``. The mass only enters through the total
    derivative terms and cancels from the sum.

    Raises
    ------
    GridTooSmall, FrameDegenerate
    """
    rep = _default_rep(rep)
    terms = _variation_terms(field, family, m, rep, order, deps)
    return field.with_values(sum(terms.values()), crop=_STENCIL_RADIUS)


def dirac_variation_on_shell_terms(
    family: Callable[[float], MetricField],
    field: SpinorGridField,
    m: float = 1.0,
    rep: Optional[GammaRep] = None,
    order: Sequence[int] = (0, 1, 2, 3),
    deps: float = 1e-4,
) -> dict[str, SpinorGridField]:
    """The individual terms of :func:`dirac_variation`, keyed by role.

    ``grad + div`` is the two-term form that survives on shell;
    ``frame_total`` and ``trace_total`` are total Dirac derivatives and
    ``frame_local``, ``trace_local`` are proportional to the field equation.
    """
    rep = _default_rep(rep)
    terms = _variation_terms(field, family, m, rep, order, deps)
    return {k: field.with_values(v, crop=_STENCIL_RADIUS) for k, v in terms.items()}


def fd_dirac_variation(
    family: Callable[[float], MetricField],
    field: SpinorGridField,
    eps: float = 1e-3,
    rep: Optional[GammaRep] = None,
    order: Sequence[int] = (0, 1, 2, 3),
) -> SpinorGridField:
    """``(nabla_slash_eps - nabla_slash_{-eps}) / (2 eps)`` with frames fixed by Gram-Schmidt per ``eps``."""
    rep = _default_rep(rep)
    x = field.coords()
    plus = nabla_slash(field, family(eps), rep, grid_geometry(family(eps), x, rep, order))
    minus = nabla_slash(field, family(-eps), rep, grid_geometry(family(-eps), x, rep, order))
    return plus.with_values((plus.values - minus.values) / (2 * eps))


def variation_tolerance(
    family: Callable[[float], MetricField],
    field: SpinorGridField,
    eps: float = 1e-3,
    floor: float = 1e-4,
    closed_form: Optional[SpinorGridField] = None,
    **kw,
) -> float:
    """Acceptance bound ``max(floor, 10 eps^2 + stencil)`` for closed form vs finite difference.

    The stencil error of a fourth-order scheme is estimated by Richardson
    extrapolation, ``|A_h - A_2h| / 15`` on the events shared with the grid
    subsampled by two.
    """
    fine = dirac_variation(family, field, **kw) if closed_form is None else closed_form
    coarse = dirac_variation(family, field.subsample(2), **kw).values
    on_coarse = fine.values[::2, ::2, ::2, ::2][1:, 1:, 1:, 1:]
    m = min(on_coarse.shape[0], coarse.shape[0])
    sl = (slice(0, m),) * 4
    stencil = float(np.max(np.abs(on_coarse[sl] - coarse[sl]))) / 15.0
    return max(floor, 10 * eps**2 + stencil)


# ----------------------------------------------------------------------
# classical stress-energy
# ----------------------------------------------------------------------


def semt_classical(
    u: SpinorGridField,
    g: MetricField,
    rep: Optional[GammaRep] = None,
    ac: Optional[AdjointPair] = None,
    geom: Optional[GridGeometry] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """``T_ab = i/2 (u^+ gamma_(a nabla_b) u - nabla_(a u^+ gamma_b) u)`` in frame components.

    Returns
    -------
    T : ndarray, shape (n0-4, ..., n3-4, 4, 4), complex
        Symmetrised stress-energy on the cropped grid (real on shell up to
        discretisation error).
    coords : ndarray
        Coordinates of the cropped grid points.
    """
    if u.kind != "spinor":
        raise ValueError("semt_classical expects a spinor field")
    rep = _default_rep(rep)
    ac = find_adjoint_conjugation(rep) if ac is None else ac
    geom = _geometry_for(u, g, rep, (0, 1, 2, 3), geom)
    nab = _covariant_components(u.values, u.spacing, geom, "spinor")  # nabla_b u
    uc = _crop(u.values, _STENCIL_RADIUS)
    ubar = _einsum("...i,ij->...j", uc.conj(), ac.A)
    nab_bar = _einsum("...bi,ij->...bj", nab.conj(), ac.A)  # nabla_b u^+
    t1 = _einsum("...i,aij,...bj->...ab", ubar, rep.gammas, nab)
    t2 = _einsum("...ai,bij,...j->...ab", nab_bar, rep.gammas, uc)
    raw = 0.5j * (t1 - t2)
    T = 0.5 * (raw + np.swapaxes(raw, -1, -2))
    return T, u.crop(_STENCIL_RADIUS).coords()


def semt_divergence(T: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Flat-space divergence ``eta^{ac} d_c T_ab`` on a twice-cropped grid."""
    d = grid_gradient(T, spacing)  # [..., c, a, b]
    return _einsum("ac,...cab->...b", ETA, d)
