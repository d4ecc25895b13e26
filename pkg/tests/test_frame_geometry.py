import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.dirac_algebra import ETA, find_adjoint_conjugation, weyl_representation
from lcqft.frame_geometry import (
    SpinorGridField,
    antisymmetry_residual,
    bump,
    bump_family,
    christoffel,
    covgamma_residual,
    dirac_apply,
    dirac_variation,
    fd_dirac_variation,
    frw,
    grid_coords,
    minkowski,
    plane_wave,
    semt_classical,
    spin_connection,
    stencil_momentum,
    stencil_on_shell,
    variation_tolerance,
    vierbein,
)

# frozen oracle: FRW with a(t) = 1 + 0.1 t at t = 0
FRW_G0_11 = 0.1


def test_minkowski_christoffel_zero():
    assert np.all(christoffel(minkowski(), np.zeros(4)) == 0)


def test_frw_christoffel_example():
    G = christoffel(frw(1.0, 0.1), np.zeros(4))
    assert G[0, 1, 1] == pytest.approx(FRW_G0_11, abs=1e-9)
    assert G[1, 0, 1] == pytest.approx(0.1, abs=1e-9)


@given(st.floats(-1, 1), st.floats(0.5, 2), st.floats(-0.3, 0.3))
def test_frw_christoffel_analytic(t, a0, adot):
    a = a0 + adot * t
    G = christoffel(frw(a0, adot), np.array([t, 0.2, -0.1, 0.3]))
    exp = np.zeros((4, 4, 4))
    for i in range(1, 4):
        exp[0, i, i] = a * adot
        exp[i, 0, i] = exp[i, i, 0] = adot / a
    np.testing.assert_allclose(G, exp, atol=1e-7)


def test_vierbein_examples():
    np.testing.assert_allclose(vierbein(minkowski(), np.zeros(4)).e, np.eye(4), atol=1e-14)
    a = 1.0 + 0.1 * 0.5
    e = vierbein(frw(1.0, 0.1), np.array([0.5, 0, 0, 0])).e
    np.testing.assert_allclose(e, np.diag([1, 1 / a, 1 / a, 1 / a]), atol=1e-12)


def test_connection_examples():
    flat = spin_connection(minkowski(), np.zeros((3, 4)))
    assert np.all(flat.spin_sigma == 0)
    curved = spin_connection(frw(), np.random.default_rng(0).uniform(-0.5, 0.5, (5, 4)))
    assert covgamma_residual(curved) < 1e-6
    assert antisymmetry_residual(curved) < 1e-8


@given(st.integers(0, 2**31))
def test_covgamma_on_random_bumps(seed):
    r = np.random.default_rng(seed)
    H = r.normal(size=(4, 4))
    g = bump(r.uniform(-0.2, 0.2, 4), 1.5, 0.1, H + H.T)
    conn = spin_connection(g, r.uniform(-0.5, 0.5, (4, 4)))
    assert covgamma_residual(conn) < 1e-6
    assert antisymmetry_residual(conn) < 1e-8


def test_constant_spinor_massless_is_annihilated():
    vals = np.ones((7, 7, 7, 7, 4), complex)
    f = SpinorGridField(vals, (0.1,) * 4, (0.0,) * 4, "spinor")
    assert np.abs(dirac_apply(f, minkowski(), 0.0).values).max() < 1e-12


def test_plane_wave_residual_is_fourth_order():
    k = np.array([0.0, 0.4, -0.3, 0.2])
    k[0] = np.sqrt(1.0 + k[1:] @ k[1:])
    res = []
    for h in (0.2, 0.1):
        u = plane_wave(k, 1.0, (9,) * 4, (h,) * 4)
        res.append(np.abs(dirac_apply(u, minkowski(), 1.0).values).max())
    assert 12 < res[0] / res[1] < 20


def test_stencil_plane_wave_is_exact():
    s = (0.1,) * 4
    k = stencil_on_shell([0.3, 0.1, -0.2], 1.0, s)
    u = plane_wave(k, 1.0, (9,) * 4, s, dispersion="stencil")
    assert np.abs(dirac_apply(u, minkowski(), 1.0).values).max() < 1e-12


def test_constant_family_variation_is_zero():
    fam = bump_family(minkowski(), np.zeros(4), 1.0, np.zeros((4, 4)))
    X = grid_coords((8,) * 4, (0.1,) * 4, (-0.35,) * 4)
    f = SpinorGridField(np.exp(-np.sum(X**2, -1))[..., None] * np.ones(4), (0.1,) * 4, (-0.35,) * 4, "spinor")
    assert np.abs(dirac_variation(fam, f).values).max() < 1e-13


@pytest.mark.parametrize("kind", ["spinor", "cospinor"])
def test_variation_matches_finite_difference(kind):
    r = np.random.default_rng(7)
    H = r.normal(size=(4, 4))
    fam = bump_family(frw(), np.zeros(4), 2.0, H + H.T)
    n, h = 14, 0.1
    o = (-(n - 1) * h / 2,) * 4
    X = grid_coords((n,) * 4, (h,) * 4, o)
    vals = np.exp(-np.sum(X**2, -1))[..., None] * (r.normal(size=4) + 1j * r.normal(size=4))
    f = SpinorGridField(vals, (h,) * 4, o, kind)
    cf, fd = dirac_variation(fam, f), fd_dirac_variation(fam, f, eps=1e-3)
    assert np.abs(cf.values - fd.values).max() <= variation_tolerance(fam, f, eps=1e-3, closed_form=cf)


def test_semt_plane_wave():
    rep = weyl_representation()
    ac = find_adjoint_conjugation(rep)
    s = (0.1,) * 4
    k = stencil_on_shell([0.3, -0.2, 0.4], 1.0, s)
    u = plane_wave(k, 1.0, (9,) * 4, s, dispersion="stencil")
    T, _ = semt_classical(u, minkowski(), rep, ac)
    u0 = u.values[0, 0, 0, 0]
    j = np.array([u0.conj() @ ac.A @ g @ u0 for g in rep.gammas])
    kt = stencil_momentum(ETA @ k, s)
    assert np.abs(T - 0.5 * (np.outer(kt, j) + np.outer(j, kt))).max() < 1e-10
