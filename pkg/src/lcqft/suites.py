"""Verification suites behind the command-line driver.

Each suite is a function ``(params, rng) -> list[Check]``. A check carries a
non-negative ``metric`` and a ``tolerance``; it passes when
``metric <= tolerance``. Boolean properties are reported as violation
counts with tolerance 0. All randomness flows from the seeded generator
handed in by :func:`run_suite`, so identical seeds give identical reports.
"""

from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

__all__ = ["metric_preset", "Check", "SuiteReport", "SUITES", "DEFAULTS", "UnknownSuite", "run_suite", "suite_names"]


class UnknownSuite(KeyError):
    """The requested suite name is not registered."""


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    metric: float
    tolerance: float

    @classmethod
    def bound(cls, name: str, metric: float, tolerance: float) -> "Check":
        metric = float(metric)
        ok = bool(np.isfinite(metric)) and abs(metric) <= tolerance
        return cls(name, "pass" if ok else "fail", metric, float(tolerance))

    @classmethod
    def count(cls, name: str, violations: int) -> "Check":
        return cls.bound(name, float(violations), 0.0)

    @classmethod
    def flag(cls, name: str, ok: bool) -> "Check":
        return cls(name, "pass" if ok else "fail", 0.0 if ok else 1.0, 0.0)


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    checks: tuple[Check, ...]
    wall_time_ms: float = 0.0
    seed: int = 0

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema": "lcqft.suite-report/1",
            "suite": self.suite,
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
            "checks": [asdict(c) for c in self.checks],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteReport":
        return cls(
            d["suite"],
            tuple(Check(c["name"], c["status"], c["metric"], c["tolerance"]) for c in d["checks"]),
            d.get("wall_time_ms", 0.0),
            d.get("seed", 0),
        )


# ----------------------------------------------------------------------
# default parameters and tolerances
# ----------------------------------------------------------------------

DEFAULTS: dict[str, dict[str, float]] = {
    "clifford": {
        "trials": 50,
        "conjugated_reps": 20,
        "tol_exact": 1e-13,
        "tol_intertwiner": 1e-10,
        "tol_ac": 1e-12,
    },
    "spin": {"samples": 1000, "tol": 1e-10, "tol_lift": 1e-8},
    "geometry": {"points": 20, "tol_flat": 1e-9, "tol_frw": 1e-7, "tol_covgamma": 1e-6, "tol_antisym": 1e-8},
    "semt-var": {"bumps": 3, "n": 14, "h": 0.1, "eps": 1e-3, "tol_floor": 1e-4, "n_onshell": 15, "tol_semt": 1e-10},
    "ccr": {"max_n": 8, "cumulant_n": 6, "tol_phase": 1e-13, "tol_osc": 1e-6, "tol_roundtrip": 1e-12, "N": 64},
    "car": {"modes": 4, "trials": 20, "tol_norm": 1e-12, "tol_exact": 1e-13, "tol_local": 1e-12},
    "minkowski": {"gaussians": 100, "nodes": 40, "tol_pos": 1e-10, "tol_comm": 1e-8, "tol_smooth": 1e-8},
    "lattice-kg": {"nx": 64, "nt": 96, "dx": 0.1, "dt": 0.05, "m": 1.0, "tol_green": 1e-12, "tol_slice": 1e-10},
    "cones": {"samples": 10000, "product_samples": 1000, "hadamard_samples": 1000},
    "wf-scan": {"width": 1.0, "n_star": 6.0},
    "deform": {"max_halvings": 12},
}


def _tol(params: dict, key: str, check: str) -> float:
    return float(params.get("tol." + check, params[key]))


# ----------------------------------------------------------------------
# clifford: Clifford relations, intertwiners, A and C
# ----------------------------------------------------------------------


def _random_conjugator(rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    Q, R = np.linalg.qr(Z)
    return Q @ np.diag(rng.uniform(0.5, 2.0, size=4))


def suite_clifford(p: dict, rng: np.random.Generator) -> list[Check]:
    from .dirac_algebra import (
        ETA,
        CliffordElement,
        conjugated_representation,
        find_adjoint_conjugation,
        find_intertwiner,
        standard_representation,
        weyl_representation,
    )

    out = []
    t_exact = lambda c: _tol(p, "tol_exact", c)
    reps = {"weyl": weyl_representation(), "standard": standard_representation()}
    res = max(r.clifford_residual() for r in reps.values())
    out.append(Check.bound("clifford_relations", res, t_exact("clifford_relations")))
    g5 = max(float(np.max(np.abs(r.gamma5 @ r.gamma5 + np.eye(4)))) for r in reps.values())
    out.append(Check.bound("gamma5_squared", g5, t_exact("gamma5_squared")))

    # abstract algebra: g5^2 = -1 through the multiplication table
    e5 = CliffordElement.g5()
    alg = float(np.max(np.abs((e5 * e5).coeffs + CliffordElement.scalar(1.0).coeffs)))
    out.append(Check.bound("gamma5_squared_algebra", alg, t_exact("gamma5_squared_algebra")))

    tr = 0.0
    for r in reps.values():
        g = r.gammas
        for a, b in itertools.product(range(4), repeat=2):
            tr = max(tr, abs(np.trace(g[a] @ g[b]) - 4 * ETA[a, b]))
        for a, b, c, d in itertools.product(range(4), repeat=4):
            comm = g[b] @ g[c] - g[c] @ g[b]
            lhs = np.trace(comm @ g[d] @ g[a])
            rhs = 8 * (ETA[c, d] * ETA[b, a] - ETA[b, d] * ETA[c, a])
            tr = max(tr, abs(lhs - rhs))
    out.append(Check.bound("trace_identities", tr, t_exact("trace_identities")))

    weyl = reps["weyl"]
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(int(p["trials"])):
        M = _random_conjugator(rng)
        rep1 = conjugated_representation(weyl, M)
        L = find_intertwiner(rep1, weyl).L
        # L must be a multiple of M
        k = np.vdot(M.ravel(), L.ravel()) / np.vdot(M.ravel(), M.ravel())
        worst = max(worst, float(np.max(np.abs(L - k * M)) / np.max(np.abs(L))))
    elapsed = time.perf_counter() - t0
    out.append(Check.bound("intertwiner_recovers_conjugator", worst, _tol(p, "tol_intertwiner", "intertwiner")))
    out.append(Check.bound("intertwiner_time_s", elapsed, 1.0))

    ac_res = 0.0
    reps_ac = [weyl] + [
        conjugated_representation(weyl, _random_conjugator(rng)) for _ in range(int(p["conjugated_reps"]))
    ]
    for r in reps_ac:
        pair = find_adjoint_conjugation(r)
        ac_res = max(ac_res, max(pair.residuals(r).values()))
    out.append(Check.bound("adjoint_conjugation_relations", ac_res, _tol(p, "tol_ac", "ac")))
    return out


# ----------------------------------------------------------------------
# spin: covering map, Lie algebra, lift
# ----------------------------------------------------------------------


def _generators() -> list[np.ndarray]:
    from .dirac_algebra import ETA

    gens = []
    for a, b in itertools.combinations(range(4), 2):
        low = np.zeros((4, 4))
        low[a, b], low[b, a] = 1.0, -1.0
        gens.append(ETA @ low)
    return gens


def suite_spin(p: dict, rng: np.random.Generator) -> list[Check]:
    from .spin_group import (
        covering_map,
        d_lambda,
        d_lambda_inverse,
        lift,
        random_lorentz,
        random_spin_zero,
    )
    from .spin_group import _weyl

    _, ac = _weyl()
    n = int(p["samples"])
    tol = float(p["tol"])
    acp = hom = ker = lifted = 0.0
    for _ in range(n):
        S1, S2 = random_spin_zero(rng), random_spin_zero(rng)
        scale = max(1.0, float(np.abs(S1.S).max()) ** 2)
        acp = max(acp, float(np.max(np.abs(S1.S.conj().T @ ac.A @ S1.S - ac.A))) / scale)
        L12 = covering_map(S1 @ S2).L
        L1, L2 = covering_map(S1).L, covering_map(S2).L
        hom = max(hom, float(np.max(np.abs(L12 - L1 @ L2))) / max(1.0, np.abs(L1).max() * np.abs(L2).max()))
        ker = max(ker, float(np.max(np.abs(covering_map(-S1).L - L1))) / max(1.0, np.abs(L1).max()))
        # lift round trip: lift(Lambda(S)) = +-S
        T = lift(L1).S
        d = min(np.max(np.abs(T - S1.S)), np.max(np.abs(T + S1.S))) / max(1.0, np.abs(S1.S).max())
        lifted = max(lifted, float(d))
    out = [
        Check.bound("spin_preserves_A", acp, _tol(p, "tol", "spin_preserves_A")),
        Check.bound("covering_homomorphism", hom, _tol(p, "tol", "covering_homomorphism")),
        Check.bound("covering_kernel_pm_identity", ker, _tol(p, "tol", "covering_kernel")),
    ]
    from .spin_group import SpinElement

    eye = covering_map(SpinElement(np.eye(4))).L
    out.append(
        Check.bound(
            "covering_identity_fibre",
            max(float(np.max(np.abs(eye - np.eye(4)))), float(np.max(np.abs(covering_map(SpinElement(-np.eye(4))).L - np.eye(4))))),
            tol,
        )
    )
    gen = 0.0
    for lam in _generators():
        gen = max(gen, float(np.max(np.abs(d_lambda(d_lambda_inverse(lam).matrix()) - lam))))
    out.append(Check.bound("dlambda_inverse_roundtrip", gen, tol))
    out.append(Check.bound("lift_roundtrip_spin", lifted, _tol(p, "tol_lift", "lift")))
    worst = 0.0
    for _ in range(n):
        L = random_lorentz(rng)
        worst = max(worst, float(np.max(np.abs(covering_map(lift(L)).L - L.L))) / max(1.0, np.abs(L.L).max()))
    out.append(Check.bound("lift_roundtrip_lorentz", worst, _tol(p, "tol_lift", "lift")))
    return out


# ----------------------------------------------------------------------
# geometry
# ----------------------------------------------------------------------


_PRESET = re.compile(r"\s*([a-z]+)\s*(?:\(([^()]*)\))?\s*$")


def metric_preset(text: str):
    """Build a metric from a preset string.

    Accepted forms are ``minkowski``, ``frw(a0, adot)`` and
    ``bump(t, x, y, z, width, amplitude)``; a bump sits on flat space.

    Raises
    ------
    ValueError
        For an unknown preset or a wrong argument count.
    """
    from .frame_geometry import bump, frw, minkowski

    m = _PRESET.match(text)
    if not m:
        raise ValueError(f"cannot parse metric preset {text!r}")
    name, args = m.group(1), m.group(2)
    vals = [float(a) for a in args.split(",")] if args and args.strip() else []
    if name == "minkowski" and not vals:
        return minkowski()
    if name == "frw" and len(vals) in (0, 2):
        return frw(*vals)
    if name == "bump" and len(vals) == 6:
        return bump(vals[:4], vals[4], vals[5])
    raise ValueError(f"unknown metric preset or wrong arguments: {text!r}")


def suite_geometry(p: dict, rng: np.random.Generator) -> list[Check]:
    from .frame_geometry import (
        antisymmetry_residual,
        bump,
        christoffel,
        covgamma_residual,
        frw,
        minkowski,
        spin_connection,
    )

    n = int(p["points"])
    pts = rng.uniform(-0.5, 0.5, size=(n, 4))
    flat = spin_connection(minkowski(), pts)
    flat_res = max(float(np.max(np.abs(flat.christoffel))), float(np.max(np.abs(flat.spin_sigma))))
    out = [Check.bound("minkowski_connection_zero", flat_res, _tol(p, "tol_flat", "flat"))]

    a0, adot = 1.0, 0.1
    G = christoffel(frw(a0, adot), pts)
    a = a0 + adot * pts[:, 0]
    exp = np.zeros((n, 4, 4, 4))
    for i in range(1, 4):
        exp[:, 0, i, i] = a * adot
        exp[:, i, 0, i] = adot / a
        exp[:, i, i, 0] = adot / a
    out.append(Check.bound("frw_christoffel", float(np.max(np.abs(G - exp))), _tol(p, "tol_frw", "frw")))

    cov = anti = 0.0
    metrics = [frw(a0, adot)]
    for text in str(p.get("metrics", "")).split(";"):
        if text.strip():
            metrics.append(metric_preset(text))
    for _ in range(2):
        H = rng.normal(size=(4, 4))
        metrics.append(bump(rng.uniform(-0.2, 0.2, 4), 1.5, 0.1, 0.5 * (H + H.T), frw(a0, adot)))
    for g in metrics:
        conn = spin_connection(g, pts)
        cov = max(cov, covgamma_residual(conn))
        anti = max(anti, antisymmetry_residual(conn))
    out.append(Check.bound("covariant_gamma", cov, _tol(p, "tol_covgamma", "covgamma")))
    out.append(Check.bound("frame_connection_antisymmetry", anti, _tol(p, "tol_antisym", "antisym")))
    return out


# ----------------------------------------------------------------------
# semt-var: metric variation of the Dirac operator
# ----------------------------------------------------------------------


def suite_semt_var(p: dict, rng: np.random.Generator) -> list[Check]:
    from .dirac_algebra import ETA, find_adjoint_conjugation, weyl_representation
    from .frame_geometry import (
        SpinorGridField,
        bump_family,
        dirac_variation,
        dirac_variation_on_shell_terms,
        fd_dirac_variation,
        frw,
        grid_coords,
        minkowski,
        plane_wave,
        semt_classical,
        stencil_momentum,
        stencil_on_shell,
        variation_tolerance,
    )

    n, h, eps = int(p["n"]), float(p["h"]), float(p["eps"])
    origin = (-(n - 1) * h / 2,) * 4
    sp = (h,) * 4
    X = grid_coords((n,) * 4, sp, origin)
    out = []
    worst_ratio = 0.0
    worst_diff = 0.0
    worst_tol = np.inf
    for b in range(int(p["bumps"])):
        Hm = rng.normal(size=(4, 4))
        Hm = 0.5 * (Hm + Hm.T)
        base = frw() if b % 2 == 0 else minkowski()
        fam = bump_family(base, rng.uniform(-0.15, 0.15, 4), float(rng.uniform(2.0, 3.0)), Hm)
        k = rng.normal(scale=0.5, size=4)
        amp = rng.normal(size=4) + 1j * rng.normal(size=4)
        vals = np.exp(-np.sum(X**2, -1))[..., None] * np.exp(1j * X @ k)[..., None] * amp
        for kind in ("spinor", "cospinor"):
            f = SpinorGridField(vals, sp, origin, kind)
            cf = dirac_variation(fam, f)
            fd = fd_dirac_variation(fam, f, eps=eps)
            diff = float(np.max(np.abs(cf.values - fd.values)))
            tol = variation_tolerance(fam, f, eps=eps, floor=float(p["tol_floor"]), closed_form=cf)
            worst_diff = max(worst_diff, diff)
            worst_tol = min(worst_tol, tol)
            worst_ratio = max(worst_ratio, diff / tol)
    out.append(Check("variation_closed_form_vs_fd", "pass" if worst_ratio <= 1 else "fail", worst_diff, worst_tol))

    # on-shell reduction: pair with stencil-exact solutions of the opposite kind
    m_ = 1.0
    no = int(p["n_onshell"])
    ho = 0.12
    origin_o = (-(no - 1) * ho / 2,) * 4
    spo = (ho,) * 4
    worst = 0.0
    for kind in ("spinor", "cospinor"):
        Hm = rng.normal(size=(4, 4))
        fam = bump_family(minkowski(), rng.uniform(-0.05, 0.05, 4), 0.45, 0.5 * (Hm + Hm.T))
        k1 = stencil_on_shell(rng.uniform(-0.5, 0.5, 3), m_, spo)
        k2 = stencil_on_shell(rng.uniform(-0.5, 0.5, 3), m_, spo)
        u = plane_wave(k1, m_, (no,) * 4, spo, origin_o, kind=kind, dispersion="stencil")
        other = "cospinor" if kind == "spinor" else "spinor"
        w = plane_wave(k2, m_, (no,) * 4, spo, origin_o, kind=other, dispersion="stencil").crop(2).values
        terms = dirac_variation_on_shell_terms(fam, u, m=m_)
        P = {key: np.sum(w * v.values) for key, v in terms.items()}
        full = sum(P.values())
        worst = max(worst, float(abs(full - P["grad"] - P["div"]) / max(abs(full), 1e-300)))
    out.append(Check.bound("onshell_two_term_reduction", worst, float(p["tol_floor"])))

    # classical stress-energy of a stencil-exact plane wave
    rep = weyl_representation()
    ac = find_adjoint_conjugation(rep)
    kk = stencil_on_shell([0.3, -0.2, 0.4], m_, (0.1,) * 4)
    u = plane_wave(kk, m_, (9,) * 4, (0.1,) * 4, dispersion="stencil")
    T, _ = semt_classical(u, minkowski(), rep, ac)
    u0 = u.values[0, 0, 0, 0]
    j = np.array([u0.conj() @ ac.A @ g @ u0 for g in rep.gammas])
    kt = stencil_momentum(ETA @ kk, (0.1,) * 4)
    exp = 0.5 * (np.outer(kt, j) + np.outer(j, kt))
    out.append(Check.bound("semt_plane_wave", float(np.max(np.abs(T - exp))), float(p["tol_semt"])))
    return out


# ----------------------------------------------------------------------
# ccr: combinatorics and Weyl algebra
# ----------------------------------------------------------------------


def _empirical_moment(X: np.ndarray, k: int) -> np.ndarray:
    """Sample average of the k-fold tensor power of the rows of ``X``."""
    T = np.ones((X.shape[0],))
    for _ in range(k):
        T = T[..., None] * X.reshape((X.shape[0],) + (1,) * (T.ndim - 1) + (X.shape[1],))
    return T.mean(axis=0)


def suite_ccr(p: dict, rng: np.random.Generator) -> list[Check]:
    from .quantum_algebras import (
        SymplecticSpace,
        WeylWord,
        moments_from_cumulants,
        oscillator_weyl_check,
        pairings,
        quasifree_npoint,
        quasifree_npoint_bruteforce,
        truncated_npoint,
        weyl_normal_form,
    )

    out = []
    max_n = int(p["max_n"])
    mism = 0
    for n in range(0, max_n + 1):
        for fermionic in (False, True):
            W = rng.integers(-3, 4, size=(3, 3)) + 1j * rng.integers(-3, 4, size=(3, 3))
            fs = [rng.integers(-2, 3, size=3) for _ in range(n)]
            if quasifree_npoint(W, fs, fermionic) != quasifree_npoint_bruteforce(W, fs, fermionic):
                mism += 1
    out.append(Check.count("quasifree_equals_bruteforce", mism))
    bad = sum(
        len(list(pairings(range(2 * m)))) != math.prod(range(1, 2 * m, 2)) for m in range(1, 6)
    )
    out.append(Check.count("pairing_count_double_factorial", bad))

    d = 2
    W = rng.integers(-3, 4, size=(d, d)) + 1j * rng.integers(-3, 4, size=(d, d))
    E = np.eye(d, dtype=int)
    nmax = int(p["cumulant_n"])
    moments = []
    for k in range(1, nmax + 1):
        T = np.zeros((d,) * k, dtype=complex)
        for idx in itertools.product(range(d), repeat=k):
            T[idx] = quasifree_npoint(W, [E[i] for i in idx])
        moments.append(T)
    cum = truncated_npoint(moments)
    nonzero = sum(int(np.count_nonzero(c)) for k, c in enumerate(cum, start=1) if k != 2)
    out.append(Check.count("quasifree_cumulants_vanish", nonzero))
    # empirical moments of a sampled random vector, so the inputs are genuine moments
    X = rng.normal(size=(16, d))
    real_moments = [_empirical_moment(X, k) for k in range(1, nmax + 1)]
    back = moments_from_cumulants(truncated_npoint(real_moments))
    rt = max(float(np.max(np.abs(a - b))) for a, b in zip(back, real_moments))
    out.append(Check.bound("moment_cumulant_roundtrip", rt, _tol(p, "tol_roundtrip", "roundtrip")))

    space = SymplecticSpace.standard(2)
    phase = 0.0
    for _ in range(50):
        f, g = rng.normal(size=4), rng.normal(size=4)
        a = weyl_normal_form(space, [WeylWord.generator(f), WeylWord.generator(g)])
        b = weyl_normal_form(space, [WeylWord.generator(g), WeylWord.generator(f)])
        phase = max(phase, abs(a.phase / b.phase - np.exp(-1j * space.form(f, g))))
    out.append(Check.bound("weyl_braiding_phase", phase, _tol(p, "tol_phase", "phase")))

    osc = 0.0
    for _ in range(3):
        rep = oscillator_weyl_check(rng.normal(scale=0.7, size=2), rng.normal(scale=0.7, size=2), N=int(p["N"]))
        osc = max(osc, rep.omega2_error, rep.commutator_error, abs(rep.first_derivative))
    out.append(Check.bound("oscillator_two_point", osc, _tol(p, "tol_osc", "osc")))
    return out


# ----------------------------------------------------------------------
# car
# ----------------------------------------------------------------------


def suite_car(p: dict, rng: np.random.Generator) -> list[Check]:
    from .quantum_algebras import DoubledSpace, anticommutator, car_fock, charge_conjugation_and_parity, commutator

    n = int(p["modes"])
    Q = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    K = Q @ Q.T  # symmetric unitary
    sp = DoubledSpace(n, K)
    F = car_fock(sp)
    cp = charge_conjugation_and_parity(F)
    I = np.eye(2**n)
    rnd = lambda: rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
    anti = alpha = norm = 0.0
    for _ in range(int(p["trials"])):
        f, g = rnd(), rnd()
        Bf, Bg = F.B(f), F.B(g)
        anti = max(
            anti,
            float(np.max(np.abs(anticommutator(Bf.dag, Bg).matrix - sp.inner(f, g) * I))),
            float(np.max(np.abs(anticommutator(Bf, Bg).matrix - sp.inner(sp.plus(f), g) * I))),
            float(np.max(np.abs(Bf.dag.matrix - F.B(sp.plus(f)).matrix))),
        )
        alpha = max(alpha, float(np.max(np.abs(cp.alpha_C(cp.alpha_C(Bf)).matrix - cp.tau(Bf).matrix))))
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        c = sp.inner(sp.split(v=v), sp.split(v=v)).real
        norm = max(norm, abs(F.psi(v).norm() - math.sqrt(c)))
    Y = F.B(rnd()) @ F.B(rnd()) + F.B(rnd()) * 0.5
    alpha = max(alpha, float(np.max(np.abs(cp.alpha_C(cp.alpha_C(Y)).matrix - cp.tau(Y).matrix))))
    tol = _tol(p, "tol_exact", "exact")
    out = [
        Check.bound("car_anticommutators", anti, tol),
        Check.bound("alpha_C_squared_is_parity", alpha, tol),
        Check.bound("psi_norm", norm, _tol(p, "tol_norm", "norm")),
    ]
    # spacelike-even locality: modes {0,1} vs {2,...}
    half = n // 2
    loc = 0.0
    for _ in range(int(p["trials"])):
        def local(lo, hi):
            u = np.zeros(n, complex)
            v = np.zeros(n, complex)
            u[lo:hi] = rng.normal(size=hi - lo) + 1j * rng.normal(size=hi - lo)
            v[lo:hi] = rng.normal(size=hi - lo) + 1j * rng.normal(size=hi - lo)
            return sp.split(u, v)

        f1, f2, g1, g2 = local(0, half), local(0, half), local(half, n), local(half, n)
        A = F.B(f1) @ F.B(f2)
        B = F.B(g1) @ F.B(g2)
        loc = max(loc, commutator(A, B).maxabs())
    out.append(Check.bound("spacelike_even_commutator", loc, _tol(p, "tol_local", "local")))
    neg = 0
    for _ in range(int(p["trials"])):
        f = rnd()
        neg += F.vacuum_expectation(F.B(f).dag @ F.B(f)).real < -1e-14
    out.append(Check.count("vacuum_positivity", int(neg)))
    return out


# ----------------------------------------------------------------------
# minkowski: shell quadrature
# ----------------------------------------------------------------------


def suite_minkowski(p: dict, rng: np.random.Generator) -> list[Check]:
    from .field_solutions import (
        FourierTestFunction,
        KGParams,
        QuadratureConfig,
        commutator_pairing,
        smoothed_two_point,
        two_point_matrix,
        vacuum_two_point,
    )
    from .quantum_algebras import TwoPointForm

    kg = KGParams(1.0)
    nodes = int(p["nodes"])
    fast = QuadratureConfig(nodes=max(8, nodes // 2), check=False)
    cfg = QuadratureConfig(nodes=nodes)
    worst = 0.0
    for _ in range(int(p["gaussians"])):
        f = FourierTestFunction.random(rng)
        val = vacuum_two_point(f.conj(), f, kg, fast)
        worst = min(worst, val.real)
    out = [Check.bound("positivity", max(0.0, -worst), _tol(p, "tol_pos", "pos"))]

    fh = FourierTestFunction.gaussian(rng.normal(size=4), np.eye(4) * 0.7, half_space="upper")
    ann = abs(vacuum_two_point(fh.conj(), fh, kg, cfg))
    out.append(Check.bound("half_space_annihilation", ann, 0.0))

    comm = kgz = 0.0
    for _ in range(3):
        f, h = FourierTestFunction.random(rng), FourierTestFunction.random(rng)
        w12, w21 = vacuum_two_point(f, h, kg, cfg), vacuum_two_point(h, f, kg, cfg)
        E = commutator_pairing(f, h, kg, cfg)
        comm = max(comm, abs(w12 - w21 - 1j * E))
        kgz = max(kgz, abs(vacuum_two_point(f.apply_kg(kg.m), h, kg, cfg)))
    out.append(Check.bound("commutator_identity", comm, _tol(p, "tol_comm", "comm")))
    out.append(Check.bound("klein_gordon_on_shell", kgz, _tol(p, "tol_comm", "kg")))

    fr = [FourierTestFunction.random(rng) for _ in range(3)]
    basis = [f + f.conj() for f in fr]  # real test functions
    Wm = two_point_matrix(basis, kg, cfg)
    E = np.array([[commutator_pairing(a, b, kg, cfg).real for b in basis] for a in basis])
    tpf = TwoPointForm(Wm)
    inv = max(tpf.commutator_residual(E), max(0.0, -tpf.min_eigenvalue()))
    out.append(Check.bound("two_point_form_invariants", inv, _tol(p, "tol_comm", "tpf")))

    f = FourierTestFunction.random(rng)
    x = rng.normal(scale=0.5, size=4)
    direct = smoothed_two_point(x, 2, f, kg, cfg)
    via = vacuum_two_point(FourierTestFunction.point(x), f.gaussian_smooth(2), kg, cfg)
    out.append(Check.bound("smoothing_multiplier", abs(direct - via), _tol(p, "tol_smooth", "smooth")))

    def cr(s):
        F = lambda z: smoothed_two_point(x + np.array([z, 0, 0, 0]), 2, f, kg, cfg)
        return abs((F(s) - F(-s)) / (2 * s) - (F(1j * s) - F(-1j * s)) / (2j * s))

    r1, r2 = cr(2e-2), cr(1e-2)
    order = math.log2(r1 / r2) if r2 > 0 else float("inf")
    out.append(Check.bound("cauchy_riemann_second_order", abs(order - 2.0), 0.2))
    return out


# ----------------------------------------------------------------------
# lattice-kg
# ----------------------------------------------------------------------


def suite_lattice_kg(p: dict, rng: np.random.Generator) -> list[Check]:
    from .field_solutions import (
        Lattice1p1,
        cauchy_symplectic,
        lattice_cone,
        lattice_green,
        smoothstep_profile,
        spacetime_pairing,
        timeslice_decompose,
    )

    dx = float(p["dx"])
    dt = float(p["cfl"]) * dx if "cfl" in p else float(p["dt"])
    L = Lattice1p1(int(p["nx"]), int(p["nt"]), dx, dt, float(p["m"]))
    G = lattice_green(L)
    f = L.random_source(rng, (30, 40), (20, 40))
    h = L.random_source(rng, (45, 55), (10, 30))
    green = max(
        float(np.max(np.abs(L.K_disc(G.retarded(f)) - f)[1:-1])),
        float(np.max(np.abs(L.K_disc(G.advanced(f)) - f)[1:-1])),
    )
    out = [Check.bound("green_inverse", green, _tol(p, "tol_green", "green"))]
    outside = 0
    for _ in range(5):
        n0, j0 = int(rng.integers(5, L.nt - 5)), int(rng.integers(5, L.nx - 5))
        imp = G.impulse(n0, j0)
        outside += int(np.sum((imp != 0) & ~lattice_cone(L, n0, j0, dilate=1)))
        adv = G.impulse(n0, j0, "advanced")
        outside += int(np.sum((adv != 0) & ~lattice_cone(L, n0, j0, future=False, dilate=1)))
    out.append(Check.count("cone_support", outside))
    sym = float(np.max(np.abs(G.impulse(40, 30, "advanced") - G.impulse(L.nt - 1 - 40, 30)[::-1])))
    out.append(Check.bound("time_reversal", sym, 0.0))

    S = cauchy_symplectic(L, [f, h], [20, 50, 60, 75, 90])
    ref = S[60]
    scale = float(np.max(np.abs(ref)))
    rel = max(float(np.max(np.abs(S[c] - ref))) for c in S) / scale
    out.append(Check.bound("cauchy_slice_independence", rel, _tol(p, "tol_slice", "slice")))
    pair = abs(ref[0, 1] - spacetime_pairing(L, f, G.causal(h))) / scale
    out.append(Check.bound("cauchy_equals_spacetime_pairing", pair, _tol(p, "tol_slice", "pairing")))

    fp, hh = timeslice_decompose(f, (45, 60), L)
    resid = float(np.max(np.abs(f - fp - L.K_disc(hh))[1:-1]))
    out.append(Check.bound("timeslice_residual", resid, 1e-10))
    rows = np.nonzero(np.any(fp != 0, axis=1))[0]
    out.append(Check.count("timeslice_support_in_slab", int(np.sum((rows < 45) | (rows > 60)))))
    Ef = G.causal(f)
    out.append(
        Check.bound("timeslice_same_solution", float(np.max(np.abs(G.causal(fp) - Ef)) / np.max(np.abs(Ef))), 1e-10)
    )
    chi_plus = 1.0 - smoothstep_profile(L, 45, 60)[:, None]
    ident = float(np.max(np.abs(G.causal(L.K_disc(chi_plus * Ef)) + Ef)) / np.max(np.abs(Ef)))
    out.append(Check.bound("future_cutoff_identity", ident, 1e-10))
    return out


# ----------------------------------------------------------------------
# cones
# ----------------------------------------------------------------------


def suite_cones(p: dict, rng: np.random.Generator) -> list[Check]:
    from .microlocal_cones import (
        CovectorConfig,
        hadamard_to_config,
        in_gamma_n,
        in_gamma_n_lp,
        in_hadamard_set,
        interleave,
        random_member,
    )

    convex = negated = 0
    for _ in range(int(p["samples"])):
        n = int(rng.integers(2, 4))
        A = random_member(rng, n)
        B = random_member(rng, n, A.points)
        a, b = rng.uniform(0.01, 3.0, 2)
        C = A.combine(B, a, b)
        if C.is_zero_section():
            continue
        convex += not in_gamma_n(C).member
        negated += in_gamma_n(C.negated()).member
    out = [Check.count("gamma_convex_cone", convex), Check.count("gamma_no_opposite", negated)]

    prod = 0
    for _ in range(int(p["product_samples"])):
        n1 = int(rng.integers(2, 4))
        n2 = int(rng.integers(1, 5 - n1))  # at most four points in total
        A = random_member(rng, n1)
        if n2 >= 2:
            B = random_member(rng, n2)
        else:
            B = CovectorConfig(rng.normal(size=(1, 4)), np.zeros((1, 4)))  # zero-section factor
        slots = sorted(rng.choice(n1 + n2, size=n1, replace=False).tolist())
        C = interleave(A, B, slots)
        prod += not in_gamma_n(C).member
    out.append(Check.count("gamma_product_closure", prod))

    had = 0
    for _ in range(int(p["hadamard_samples"])):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        lam = rng.uniform(0.1, 3.0)
        xi_p = lam * np.concatenate([[1.0], -u])  # covector whose raised vector is lam (1, u)
        y = rng.normal(size=4)
        if rng.random() < 0.2:
            x = y.copy()
        else:
            x = y + rng.uniform(-2, 2) * np.concatenate([[1.0], u])
        if not in_hadamard_set(x, -xi_p, y, xi_p):
            had += 1
            continue
        cfg = hadamard_to_config(x, -xi_p, y, xi_p)
        had += not in_gamma_n(cfg).member
        had += not in_gamma_n(cfg, null_geodesic_variant=True).member
    out.append(Check.count("hadamard_in_gamma2", had))

    lp = 0
    for _ in range(50):
        A = random_member(rng, 3)
        v = in_gamma_n_lp(A)
        if v.member and not in_gamma_n(A).member:
            lp += 1
        if v.member and v.balance_residual(A) > 1e-9:
            lp += 1
    out.append(Check.count("lp_certificates_sound", lp))
    return out


# ----------------------------------------------------------------------
# wf-scan
# ----------------------------------------------------------------------


def suite_wf_scan(p: dict, rng: np.random.Generator) -> list[Check]:
    from .microlocal_cones import (
        GaussianFunction,
        HeavisideGaussian,
        PlaneDelta,
        PointDelta,
        SumDistribution,
        wf_decay_scan,
        wf_pullback_check,
    )

    kw = dict(width=float(p["width"]), n_star=float(p["n_star"]))
    x0 = np.zeros(4)
    out = []
    r = wf_decay_scan(PointDelta(x0), x0, **kw)
    out.append(Check.count("delta_all_singular", int(np.sum(~r.singular))))
    r = wf_decay_scan(GaussianFunction(np.eye(4)), x0, **kw)
    out.append(Check.count("gaussian_all_regular", int(np.sum(r.singular))))
    step = HeavisideGaussian.time_step()
    r = wf_decay_scan(step, x0, **kw)
    expected = np.array([abs(abs(d[0]) - 1.0) < 1e-12 for d in r.directions])
    out.append(Check.count("step_singular_in_time_directions", int(np.sum(r.singular != expected))))

    shear = np.eye(4)
    shear[0, 1] = 0.7
    rot = np.eye(4)
    c, s = math.cos(0.6), math.sin(0.6)
    rot[1:3, 1:3] = [[c, -s], [s, c]]
    boost = np.eye(4)
    ch, sh = math.cosh(0.4), math.sinh(0.4)
    boost[:2, :2] = [[ch, sh], [sh, ch]]
    mism = 0
    for A in (shear, rot, boost):
        for u in (step, PlaneDelta(np.array([0.0, 1.0, 1.0, 0.0])), PointDelta(x0)):
            mism += wf_pullback_check(A, u, x0, **kw).mismatches
    out.append(Check.count("pullback_covariance", mism))

    mix = SumDistribution(((1.0 + 0.5j, step), (2.0j, PlaneDelta(np.array([0.0, 0.0, 1.0, 0.0])))))
    full = wf_decay_scan(mix, x0, **kw).singular
    re = wf_decay_scan(mix.real_part(), x0, **kw).singular
    im = wf_decay_scan(mix.imag_part(), x0, **kw).singular
    out.append(Check.count("real_imag_parts_within_scan", int(np.sum((re | im) & ~full))))
    return out


# ----------------------------------------------------------------------
# deform
# ----------------------------------------------------------------------


def suite_deform(p: dict, rng: np.random.Generator) -> list[Check]:
    from .causal_lattice import (
        LatticeSpacetime,
        Region,
        Verdict,
        causal_complement,
        causal_future,
        causal_past,
        certify_inclusion,
        deform_and_certify,
        deformed_spacetime,
        domain_of_dependence,
        is_causally_convex,
        standard_scenario,
    )

    spec, K1, K2 = standard_scenario()
    res = deform_and_certify(spec, K1, K2)
    out = [
        Check.count("standard_scenario_certified", int(not res.certified)),
        Check.bound("halvings", res.halvings, float(p["max_halvings"])),
    ]
    bad = 0
    scale = res.beta_scale
    for _ in range(4):
        scale /= 2
        l = deformed_spacetime(spec.with_scale(scale))
        bad += not (certify_inclusion(l, K1, K2, "inner") and certify_inclusion(l, K1, K2, "outer"))
    out.append(Check.count("certification_monotone", bad))

    wide = deform_and_certify(*standard_scenario(k2_half_width=5.0, bump=0.0))
    out.append(Check.count("wide_K2_certified_at_unit_scale", int(not (wide.certified and wide.halvings == 0))))
    empty = deform_and_certify(spec, K1, Region.empty(spec.g1))
    out.append(Check.count("empty_K2_not_certified", int(empty.certified)))

    l = LatticeSpacetime.flat(30, 41, 0.05, 0.1)
    inc = 0
    for _ in range(20):
        O = Region.box(l, (int(rng.integers(0, 25)),) * 2, tuple(sorted(rng.integers(0, 41, 2).tolist())))
        for op in (causal_future, causal_past):
            inc += not (op(l, O, "inner") <= op(l, O, "outer"))
    out.append(Check.count("inner_within_outer", inc))
    D = Region.diamond(l, (0.2, 2.025), (1.2, 2.025))
    conv = int(is_causally_convex(l, D) is not Verdict.TRUE)
    conv += int(is_causally_convex(l, causal_complement(l, D)) is not Verdict.TRUE)
    R = Region.box(l, (10, 10), (10, 30))
    Di, Do = domain_of_dependence(l, R, "inner"), domain_of_dependence(l, R, "outer")
    conv += int(not Di <= Do)
    conv += int(is_causally_convex(l, Di) is not Verdict.TRUE)
    out.append(Check.count("convexity_examples", conv))
    return out


SUITES: dict[str, Callable[[dict, np.random.Generator], list[Check]]] = {
    "clifford": suite_clifford,
    "spin": suite_spin,
    "geometry": suite_geometry,
    "semt-var": suite_semt_var,
    "ccr": suite_ccr,
    "car": suite_car,
    "minkowski": suite_minkowski,
    "lattice-kg": suite_lattice_kg,
    "cones": suite_cones,
    "wf-scan": suite_wf_scan,
    "deform": suite_deform,
}


def suite_names() -> list[str]:
    return list(SUITES) + ["all"]


def run_suite(name: str, params: Optional[dict[str, dict]] = None, seed: int = 0) -> SuiteReport:
    """Run one suite, or every suite in registry order for ``"all"``.

    ``params`` maps suite names to overrides of :data:`DEFAULTS`; keys of
    the form ``tol.<check>`` override a single check's tolerance.

    Raises
    ------
    UnknownSuite
    """
    params = params or {}
    if name == "all":
        checks = []
        total = 0.0
        for key in SUITES:
            rep = run_suite(key, params, seed)
            total += rep.wall_time_ms
            checks += [Check(f"{key}.{c.name}", c.status, c.metric, c.tolerance) for c in rep.checks]
        return SuiteReport("all", tuple(checks), round(total, 3), seed)
    if name not in SUITES:
        raise UnknownSuite(name)
    p = dict(DEFAULTS[name])
    p.update(params.get(name, {}))
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    checks = SUITES[name](p, rng)
    # apply explicit per-check tolerance overrides
    final = []
    for c in checks:
        key = "tol." + c.name
        if key in p:
            final.append(Check.bound(c.name, c.metric, float(p[key])))
        else:
            final.append(c)
    return SuiteReport(name, tuple(final), round((time.perf_counter() - t0) * 1e3, 3), seed)
