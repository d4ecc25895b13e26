import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from lcqft.field_solutions import (
    CFLViolation,
    FourierTestFunction,
    KGParams,
    Lattice1p1,
    QuadratureConfig,
    QuadratureNotConverged,
    SlabTooThin,
    cauchy_symplectic,
    commutator_pairing,
    lattice_cone,
    lattice_green,
    smoothed_two_point,
    smoothstep_profile,
    spacetime_pairing,
    timeslice_decompose,
    vacuum_two_point,
)

# frozen lattice oracles for dt = 0.05, dx = 0.1, derived by hand from the leapfrog update
IMPULSE_NEXT_ROW = 0.0025
IMPULSE_DIAGONAL = 0.000625

KG = KGParams(1.0)


def _radial_oracle(s, m=1.0):
    """(2 pi)^-3 int |f^(w, l)|^2 d^3l / (2w) for f^ = exp(-s |l|_E^2)."""

    def integrand(k):
        w2 = k * k + m * m
        return 4 * np.pi * k * k * np.exp(-2 * s * (w2 + k * k)) / (2 * np.sqrt(w2))

    return quad(integrand, 0, np.inf, epsabs=1e-15, epsrel=1e-13)[0] / (2 * np.pi) ** 3


@pytest.mark.parametrize("s", [0.3, 0.7, 1.5])
def test_two_point_matches_radial_oracle(s):
    f = FourierTestFunction.gaussian(np.zeros(4), s * np.eye(4))
    val = vacuum_two_point(f.conj(), f, KG)
    assert val.real == pytest.approx(_radial_oracle(s), rel=1e-8)
    assert abs(val.imag) < 1e-12


def test_upper_half_space_annihilates():
    f = FourierTestFunction.gaussian([0.5, 0.2, 0, 0], np.eye(4) * 0.7, half_space="upper")
    assert vacuum_two_point(f.conj(), f, KG) == 0


@settings(max_examples=6)
@given(st.integers(0, 2**31))
def test_commutator_identity_and_antisymmetry(seed):
    r = np.random.default_rng(seed)
    f, h = FourierTestFunction.random(r), FourierTestFunction.random(r)
    E = commutator_pairing(f, h, KG)
    assert abs(vacuum_two_point(f, h, KG) - vacuum_two_point(h, f, KG) - 1j * E) < 1e-8
    assert abs(commutator_pairing(f, f, KG)) < 1e-12


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_positivity(seed):
    f = FourierTestFunction.random(np.random.default_rng(seed), n_terms=2)
    assert vacuum_two_point(f.conj(), f, KG).real >= -1e-10


def test_klein_gordon_image_is_null():
    r = np.random.default_rng(4)
    f, h = FourierTestFunction.random(r), FourierTestFunction.random(r)
    assert abs(vacuum_two_point(f.apply_kg(1.0), h, KG)) < 1e-10


def test_smoothing_multiplier_matches_direct():
    r = np.random.default_rng(9)
    f = FourierTestFunction.random(r)
    x = np.array([0.2, -0.1, 0.3, 0.0])
    direct = smoothed_two_point(x, 2, f, KG)
    via = vacuum_two_point(FourierTestFunction.point(x), f.gaussian_smooth(2), KG)
    assert abs(direct - via) < 1e-8


def test_cauchy_riemann_residual_is_second_order():
    f = FourierTestFunction.random(np.random.default_rng(2))
    x = np.array([0.1, 0.0, 0.2, 0.0])

    def cr(s):
        F = lambda z: smoothed_two_point(x + np.array([z, 0, 0, 0]), 2, f, KG)
        return abs((F(s) - F(-s)) / (2 * s) - (F(1j * s) - F(-1j * s)) / (2j * s))

    assert cr(2e-2) / cr(1e-2) == pytest.approx(4.0, rel=0.1)


def test_quadrature_not_converged_with_too_few_nodes():
    f = FourierTestFunction.gaussian(np.zeros(4), 0.02 * np.eye(4), shift=[3.0, 2.0, 0, 0])
    with pytest.raises(QuadratureNotConverged):
        vacuum_two_point(f.conj(), f, KG, QuadratureConfig(nodes=4))


# ----------------------------------------------------------------------
# lattice
# ----------------------------------------------------------------------


def test_impulse_oracle():
    L = Lattice1p1()
    phi = lattice_green(L).impulse(40, 30)
    assert np.all(phi[:41] == 0)
    assert phi[41, 30] == pytest.approx(IMPULSE_NEXT_ROW, rel=1e-14)
    assert phi[42, 29] == pytest.approx(IMPULSE_DIAGONAL, rel=1e-14)
    assert phi[42, 31] == pytest.approx(IMPULSE_DIAGONAL, rel=1e-14)


def test_cfl_violation():
    with pytest.raises(CFLViolation):
        Lattice1p1(dx=0.1, dt=0.06)


@given(st.integers(0, 2**31))
def test_green_operators_invert_k(seed):
    L = Lattice1p1(nx=32, nt=48)
    G = lattice_green(L)
    f = L.random_source(np.random.default_rng(seed), (10, 30), (5, 25))
    for E in (G.retarded, G.advanced):
        assert np.abs(L.K_disc(E(f)) - f)[1:-1].max() < 1e-12
    assert np.abs(L.K_disc(G.causal(f))[1:-1]).max() < 1e-12


def test_impulse_support_within_cone():
    L = Lattice1p1()
    G = lattice_green(L)
    phi = G.impulse(30, 20)
    assert not np.any((phi != 0) & ~lattice_cone(L, 30, 20, dilate=1))


def test_cauchy_form_slice_independent():
    L = Lattice1p1()
    r = np.random.default_rng(0)
    f, h = L.random_source(r, (30, 40), (20, 40)), L.random_source(r, (45, 55), (10, 30))
    S = cauchy_symplectic(L, [f, h], [20, 60, 90])
    ref = S[60]
    for c in S:
        assert np.abs(S[c] - ref).max() < 1e-10 * np.abs(ref).max()
    G = lattice_green(L)
    assert ref[0, 1] == pytest.approx(spacetime_pairing(L, f, G.causal(h)), rel=1e-10)


def test_timeslice_decomposition():
    L = Lattice1p1()
    G = lattice_green(L)
    f = L.random_source(np.random.default_rng(1), (30, 40), (20, 40))
    fp, h = timeslice_decompose(f, (45, 60), L)
    assert np.abs(f - fp - L.K_disc(h))[1:-1].max() < 1e-10
    rows = np.nonzero(np.any(fp != 0, axis=1))[0]
    assert rows.min() >= 45 and rows.max() <= 60
    np.testing.assert_allclose(G.causal(fp), G.causal(f), atol=1e-10 * np.abs(G.causal(f)).max())
    chi_plus = 1 - smoothstep_profile(L, 45, 60)[:, None]
    Ef = G.causal(f)
    assert np.abs(G.causal(L.K_disc(chi_plus * Ef)) + Ef).max() < 1e-10 * np.abs(Ef).max()


def test_slab_too_thin():
    L = Lattice1p1()
    f = L.random_source(np.random.default_rng(1), (30, 40), (20, 40))
    with pytest.raises(SlabTooThin):
        timeslice_decompose(f, (50, 51), L)
