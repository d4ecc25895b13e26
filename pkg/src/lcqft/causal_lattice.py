"""Discrete causal structure on 1+1 lattices and the slab-deformation certifier.

Events sit at ``(t_n, x_j) = (n dt, j dx)``. The metric
``beta dt^2 - h dx^2`` is sampled per event, giving a local light speed
``c = sqrt(beta / h)``. Causal reach is propagated row by row as a union of
closed intervals in continuous ``x``; between two rows an interval grows by
``dt * c_mode`` on each side, where ``c_mode`` is a local extremum of ``c``
around the interval:

``inner``
    ``(1 - eps) * min c``: slower cones, a subset of continuum reach.
``outer``
    ``(1 + eps) * max c``: faster cones, a superset of continuum reach.

``eps = dx / (2 c_ref T)`` with ``c_ref`` the largest light speed on the
lattice and ``T`` its time extent, so the accumulated drift of either mode
is at most half a cell. Every region-valued operation returns results with
``inner <= outer``; for domains of dependence this means the inner result
uses the faster cones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np

__all__ = [
    "LatticeSpacetime",
    "Region",
    "Verdict",
    "DeformationSpec",
    "DeformationResult",
    "NotAchronal",
    "GeometryError",
    "causal_future",
    "causal_past",
    "causal_complement",
    "is_causally_convex",
    "is_achronal",
    "domain_of_dependence",
    "deformed_spacetime",
    "certify_inclusion",
    "deform_and_certify",
    "standard_scenario",
]

Mode = Literal["inner", "outer"]


class NotAchronal(ValueError):
    """Two events of the region are causally related."""


class GeometryError(ValueError):
    """The regions are not separated by the interpolation slab."""


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LatticeSpacetime:
    """Per-event metric data ``beta`` and ``h`` on an ``(nt, nx)`` grid."""

    beta: np.ndarray
    h: np.ndarray
    dt: float
    dx: float

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if beta.shape != h.shape or beta.ndim != 2:
            raise ValueError("beta and h must be 2d arrays of equal shape (1+1 lattices only)")
        if np.any(beta <= 0) or np.any(h <= 0):
            raise ValueError("beta and h must be positive")
        beta.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "h", h)

    @classmethod
    def flat(cls, nt: int, nx: int, dt: float, dx: float, c: float = 1.0) -> "LatticeSpacetime":
        return cls(np.full((nt, nx), c * c), np.ones((nt, nx)), dt, dx)

    @property
    def shape(self) -> tuple[int, int]:
        return self.beta.shape

    @property
    def nt(self) -> int:
        return self.shape[0]

    @property
    def nx(self) -> int:
        return self.shape[1]

    @property
    def speed(self) -> np.ndarray:
        return np.sqrt(self.beta / self.h)

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def eps(self) -> float:
        T = max(self.nt - 1, 1) * self.dt
        return self.dx / (2.0 * float(self.speed.max()) * T)


@dataclass(frozen=True)
class Region:
    """Set of lattice events as a boolean mask of shape ``(nt, nx)``."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.mask, dtype=bool)
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @classmethod
    def empty(cls, l: LatticeSpacetime) -> "Region":
        return cls(np.zeros(l.shape, dtype=bool))

    @classmethod
    def box(cls, l: LatticeSpacetime, rows: tuple[int, int], cols: tuple[int, int]) -> "Region":
        """Events with ``rows[0] <= n <= rows[1]`` and ``cols[0] <= j <= cols[1]``."""
        m = np.zeros(l.shape, dtype=bool)
        m[rows[0] : rows[1] + 1, cols[0] : cols[1] + 1] = True
        return cls(m)

    @classmethod
    def diamond(cls, l: LatticeSpacetime, p: tuple[float, float], q: tuple[float, float], c: float = 1.0) -> "Region":
        """Open diamond ``I+(p) & I-(q)`` for constant speed ``c``; points are ``(t, x)``."""
        t = (np.arange(l.nt) * l.dt)[:, None]
        x = l.xs[None, :]
        m = (t - p[0] > np.abs(x - p[1]) / c) & (q[0] - t > np.abs(x - q[1]) / c)
        return cls(m)

    def __and__(self, other: "Region") -> "Region":
        return Region(self.mask & other.mask)

    def __or__(self, other: "Region") -> "Region":
        return Region(self.mask | other.mask)

    def __invert__(self) -> "Region":
        return Region(~self.mask)

    def __sub__(self, other: "Region") -> "Region":
        return Region(self.mask & ~other.mask)

    def __le__(self, other: "Region") -> bool:
        return bool(np.all(~self.mask | other.mask))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Region) and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        return hash(self.mask.tobytes())

    def __len__(self) -> int:
        return int(self.mask.sum())

    def is_empty(self) -> bool:
        return not self.mask.any()

    def events(self) -> list[tuple[int, int]]:
        return [tuple(map(int, e)) for e in np.argwhere(self.mask)]

    def rows(self) -> np.ndarray:
        return np.nonzero(self.mask.any(axis=1))[0]


# ----------------------------------------------------------------------
# interval propagation
# ----------------------------------------------------------------------

Intervals = list[tuple[float, float]]


def _merge(iv: Intervals) -> Intervals:
    if not iv:
        return []
    iv = sorted(iv)
    out = [list(iv[0])]
    for a, b in iv[1:]:
        if a <= out[-1][1] + 1e-12:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


class _Propagator:
    def __init__(self, l: LatticeSpacetime, cones: Literal["slow", "fast"]):
        self.l = l
        self.slow = cones == "slow"
        self.c = l.speed
        self.cmax = float(self.c.max())
        self.factor = (1 - l.eps) if self.slow else (1 + l.eps)
        self.lo = 0.0
        self.hi = (l.nx - 1) * l.dx

    def step(self, iv: Intervals, n: int, m: int) -> Intervals:
        """Grow intervals from row ``n`` to the adjacent row ``m``."""
        l = self.l
        reach = self.cmax * self.factor * l.dt
        out = []
        for a, b in iv:
            j0 = max(0, int(np.floor((a - reach) / l.dx)) - 1)
            j1 = min(l.nx - 1, int(np.ceil((b + reach) / l.dx)) + 1)
            block = self.c[[n, m], j0 : j1 + 1]
            c = float(block.min() if self.slow else block.max())
            r = c * self.factor * l.dt
            out.append((max(self.lo, a - r), min(self.hi, b + r)))
        return _merge(out)

    def mark(self, iv: Intervals) -> np.ndarray:
        x = self.l.xs
        row = np.zeros(self.l.nx, dtype=bool)
        for a, b in iv:
            row |= (x >= a - 1e-12) & (x <= b + 1e-12)
        return row


def _row_points(l: LatticeSpacetime, row_mask: np.ndarray) -> Intervals:
    return [(float(x), float(x)) for x in l.xs[row_mask]]


def _closure(l: LatticeSpacetime, O: Region, future: bool, cones: str) -> Region:
    prop = _Propagator(l, cones)
    out = O.mask.copy()
    rows = range(l.nt) if future else range(l.nt - 1, -1, -1)
    iv: Intervals = []
    prev: Optional[int] = None
    for n in rows:
        if prev is not None and iv:
            iv = prop.step(iv, prev, n)
            out[n] |= prop.mark(iv)
        iv = _merge(iv + _row_points(l, O.mask[n]))
        prev = n
    return Region(out)


def causal_future(l: LatticeSpacetime, O: Region, mode: Mode = "inner") -> Region:
    """``J+(O)``, including ``O``; ``inner`` uses slower cones than ``outer``.

    Examples
    --------
    On a flat lattice a single event's future is the discrete cone
    ``|dx| <= c dt`` (shrunk or widened by the safety factor).
    """
    return _closure(l, O, True, "slow" if mode == "inner" else "fast")


def causal_past(l: LatticeSpacetime, O: Region, mode: Mode = "inner") -> Region:
    """``J-(O)``, including ``O``."""
    return _closure(l, O, False, "slow" if mode == "inner" else "fast")


def causal_complement(l: LatticeSpacetime, O: Region, mode: Mode = "inner") -> Region:
    """``O^perp``: events causally unrelated to every event of ``O``.

    ``inner`` removes the larger (``outer``-cone) causal shadow, so the
    inner complement is contained in the outer one.
    """
    shadow_mode: Mode = "outer" if mode == "inner" else "inner"
    shadow = causal_future(l, O, shadow_mode) | causal_past(l, O, shadow_mode)
    return ~shadow


def is_causally_convex(l: LatticeSpacetime, O: Region) -> Verdict:
    """Check ``O == J+(O) & J-(O)`` with both cone modes.

    Returns TRUE if both modes confirm, FALSE if both refute, and
    INCONCLUSIVE otherwise.
    """
    results = []
    for mode in ("inner", "outer"):
        results.append((causal_future(l, O, mode) & causal_past(l, O, mode)) == O)
    if all(results):
        return Verdict.TRUE
    if not any(results):
        return Verdict.FALSE
    return Verdict.INCONCLUSIVE


def is_achronal(l: LatticeSpacetime, R: Region) -> bool:
    """No two distinct events of ``R`` are causally related (outer cones)."""
    for n, j in R.events():
        single = np.zeros(l.shape, dtype=bool)
        single[n, j] = True
        fut = causal_future(l, Region(single), "outer").mask.copy()
        fut[n, j] = False
        if np.any(fut & R.mask):
            return False
    return True


# ----------------------------------------------------------------------
# domains of dependence
# ----------------------------------------------------------------------


def _subtract_segments(iv: Intervals, segs: Intervals) -> Intervals:
    out = iv
    for s0, s1 in segs:
        nxt = []
        for a, b in out:
            if b < s0 or a > s1:
                nxt.append((a, b))
                continue
            if a < s0:
                nxt.append((a, s0 - 1e-12))
            if b > s1:
                nxt.append((s1 + 1e-12, b))
        out = nxt
    return out


def _row_segments(l: LatticeSpacetime, R: Region, n: int) -> Intervals:
    half = 0.5 * l.dx
    return _merge([(x - half, x + half) for x in l.xs[R.mask[n]]])


def _blocked(l: LatticeSpacetime, R: Region, start: Intervals, n0: int, future: bool, prop: _Propagator) -> bool:
    """Whether every inextendible causal curve from ``start`` at row ``n0`` meets ``R``."""
    iv = _subtract_segments(_merge(start), _row_segments(l, R, n0))
    rows = range(n0 + 1, l.nt) if future else range(n0 - 1, -1, -1)
    prev = n0
    for n in rows:
        if not iv:
            return True
        iv = prop.step(iv, prev, n)
        iv = _subtract_segments(iv, _row_segments(l, R, n))
        prev = n
    return not iv


def _in_domain(l: LatticeSpacetime, R: Region, start: Intervals, n0: int, prop: _Propagator) -> bool:
    return _blocked(l, R, start, n0, False, prop) or _blocked(l, R, start, n0, True, prop)


def domain_of_dependence(
    l: LatticeSpacetime, R: Region, mode: Mode = "inner", check_achronal: bool = True
) -> Region:
    """``D(R) = D+(R) | D-(R)``: events all of whose inextendible causal curves meet ``R``.

    ``R``'s events cover the closed cell segments ``[x - dx/2, x + dx/2]``.
    Curves are confined to the spatial extent of the lattice and become
    inextendible at the first or last row. The ``inner`` result uses the
    faster cones and is contained in the ``outer`` result.

    Raises
    ------
    NotAchronal
        If two events of ``R`` are causally related.
    """
    if check_achronal and not is_achronal(l, R):
        raise NotAchronal("region is not achronal")
    prop = _Propagator(l, "fast" if mode == "inner" else "slow")
    out = np.zeros(l.shape, dtype=bool)
    if R.is_empty():
        return Region(out)
    for n in range(l.nt):
        for j in range(l.nx):
            x = float(l.xs[j])
            out[n, j] = _in_domain(l, R, [(x, x)], n, prop)
    return Region(out)


# ----------------------------------------------------------------------
# slab deformation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationSpec:
    """Interpolation between two lattice metrics across a slab of rows.

    ``g' = beta_scale(slab) * beta - (f h1 + (1 - f) h2)`` with ``f = 1`` on and
    below row ``slab[0]``, ``f = 0`` on and above row ``slab[1]`` and a
    quintic profile in between. ``beta`` is taken from ``g1`` below the slab
    midpoint and from ``g2`` above it; the scale multiplies rows inside the
    closed slab.
    """

    g1: LatticeSpacetime
    g2: LatticeSpacetime
    slab: tuple[int, int]
    beta_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.g1.shape != self.g2.shape or self.g1.dt != self.g2.dt or self.g1.dx != self.g2.dx:
            raise ValueError("metrics must live on the same lattice")
        lo, hi = self.slab
        if not 0 <= lo < hi < self.g1.nt:
            raise ValueError("slab rows out of range")

    def profile(self) -> np.ndarray:
        lo, hi = self.slab
        n = np.arange(self.g1.nt)
        s = np.clip((n - lo) / (hi - lo), 0.0, 1.0)
        return 1.0 - s**3 * (10 - 15 * s + 6 * s**2)

    def with_scale(self, s: float) -> "DeformationSpec":
        return replace(self, beta_scale=s)


def deformed_spacetime(spec: DeformationSpec) -> LatticeSpacetime:
    """Lattice metric ``g'`` for the current ``beta_scale``."""
    f = spec.profile()[:, None]
    lo, hi = spec.slab
    mid = 0.5 * (lo + hi)
    rows = np.arange(spec.g1.nt)[:, None]
    beta = np.where(rows <= mid, spec.g1.beta, spec.g2.beta).astype(float)
    beta[lo : hi + 1] *= spec.beta_scale
    h = f * spec.g1.h + (1 - f) * spec.g2.h
    return LatticeSpacetime(beta, h, spec.g1.dt, spec.g1.dx)


def certify_inclusion(l: LatticeSpacetime, K1: Region, K2: Region, mode: Mode) -> bool:
    """Whether the closed cells of ``K1`` lie in ``D(K2)``."""
    if K2.is_empty():
        return False
    prop = _Propagator(l, "fast" if mode == "inner" else "slow")
    half = 0.5 * l.dx
    for n in K1.rows():
        for x in l.xs[K1.mask[n]]:
            if not _in_domain(l, K2, [(float(x) - half, float(x) + half)], int(n), prop):
                return False
    return True


@dataclass(frozen=True)
class DeformationResult:
    beta_scale: float
    certified: bool
    halvings: int
    history: tuple[tuple[float, bool, bool], ...]


def deform_and_certify(
    spec: DeformationSpec, K1: Region, K2: Region, floor: float = 2.0**-20
) -> DeformationResult:
    """Halve ``beta`` on the slab until ``closure(K1) <= D(K2)`` in both cone modes.

    ``K1`` must lie on or below the slab's first row and ``K2`` on or above
    its last row. ``history`` records ``(scale, inner_ok, outer_ok)``.

    Raises
    ------
    GeometryError
        If the regions are not separated by the slab.
    """
    lo, hi = spec.slab
    if K1.is_empty():
        raise GeometryError("K1 is empty")
    if K1.rows().max() > lo:
        raise GeometryError("K1 must lie on or below the slab")
    if not K2.is_empty() and K2.rows().min() < hi:
        raise GeometryError("K2 must lie on or above the slab")
    scale = spec.beta_scale
    history = []
    halvings = 0
    while True:
        l = deformed_spacetime(spec.with_scale(scale))
        inner = certify_inclusion(l, K1, K2, "inner")
        outer = certify_inclusion(l, K1, K2, "outer")
        history.append((scale, inner, outer))
        if inner and outer:
            return DeformationResult(scale, True, halvings, tuple(history))
        if scale / 2 < floor:
            return DeformationResult(scale, False, halvings, tuple(history))
        scale /= 2
        halvings += 1


def standard_scenario(
    k2_half_width: float = 0.5, k1_half_width: float = 0.3, bump: float = 0.5
) -> tuple[DeformationSpec, Region, Region]:
    """Flat/flat 1+1 scenario: 101 x 60 events, ``dx = 0.1``, ``dt = 0.05``, slab rows 20..40.

    ``K1`` sits on row 20 and ``K2`` on row 40, both centred at ``x = 5``.
    The two metrics differ only in the spatial factor, ``h2`` carrying a
    compact bump of height ``bump`` (``bump = 0`` gives the flat/flat case).
    """
    nt, nx, dt, dx = 60, 101, 0.05, 0.1
    g1 = LatticeSpacetime.flat(nt, nx, dt, dx)
    x = np.arange(nx) * dx
    bump = np.where(np.abs(x - 5.0) < 2.0, bump * np.cos(np.pi * (x - 5.0) / 4.0) ** 2, 0.0)
    g2 = LatticeSpacetime(np.ones((nt, nx)), np.ones((nt, nx)) * (1.0 + bump[None, :]), dt, dx)
    spec = DeformationSpec(g1, g2, (20, 40))
    centre = 50

    def row_region(row, half):
        k = int(round(half / dx))
        return Region.box(g1, (row, row), (centre - k, centre + k))

    return spec, row_region(20, k1_half_width), row_region(40, k2_half_width)
