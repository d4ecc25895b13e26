import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.quantum_algebras import (
    DimTooLarge,
    DoubledSpace,
    SymplecticSpace,
    TruncationTooSmall,
    TwoPointForm,
    WeylWord,
    anticommutator,
    car_fock,
    charge_conjugation_and_parity,
    commutator,
    moments_from_cumulants,
    oscillator_weyl_check,
    pairings,
    quasifree_npoint,
    quasifree_npoint_bruteforce,
    set_partitions,
    truncated_npoint,
    weyl_normal_form,
    weyl_star,
)

# frozen oracles
PAIRINGS_M3 = 15
BELL = [1, 1, 2, 5, 15, 52]
VACUUM_W2_X_P = 0.5j  # omega_2((1,0), (0,1)) for the oscillator vacuum

vec = st.lists(st.floats(-3, 3), min_size=2, max_size=2).map(np.array)


def test_weyl_examples():
    sp = SymplecticSpace.standard(1)
    f, h = np.array([0.4, -1.2]), np.array([0.7, 0.3])
    w = weyl_normal_form(sp, [WeylWord.generator(f), WeylWord.generator(-f)])
    assert abs(w.phase - 1.0) < 1e-14 and np.all(w.vector == 0)
    star = weyl_star(WeylWord.generator(f))
    np.testing.assert_array_equal(star.vector, -f)
    words = [WeylWord.generator(v) for v in (f, h, -f, -h)]
    grp = weyl_normal_form(sp, words)
    assert abs(grp.phase - np.exp(-1j * sp.form(f, h))) < 1e-13
    assert np.abs(grp.vector).max() < 1e-15


@given(vec, vec, vec)
def test_weyl_fold_independent_and_braided(f, h, k):
    sp = SymplecticSpace.standard(1)
    words = [WeylWord.generator(v) for v in (f, h, k)]
    a, b = weyl_normal_form(sp, words, "left"), weyl_normal_form(sp, words, "right")
    assert abs(a.phase - b.phase) < 1e-12
    fh = weyl_normal_form(sp, words[:2])
    hf = weyl_normal_form(sp, words[1::-1])
    assert abs(fh.phase / hf.phase - np.exp(-1j * sp.form(f, h))) < 1e-12


def test_pairing_counts():
    assert len(list(pairings(range(6)))) == PAIRINGS_M3
    for m in range(1, 6):
        assert len(list(pairings(range(2 * m)))) == math.prod(range(1, 2 * m, 2))
    assert [len(list(set_partitions(range(n)))) for n in range(6)] == BELL


def test_quasifree_odd_and_four_point():
    W = np.array([[1.0, 2.0 + 1j], [0.5, -1.0]])
    e = np.eye(2)
    assert quasifree_npoint(W, [e[0], e[1], e[0]]) == 0
    f = [e[0], e[1], e[1], e[0]]
    w = lambda a, b: a @ W @ b
    exp = w(f[0], f[1]) * w(f[2], f[3]) + w(f[0], f[2]) * w(f[1], f[3]) + w(f[0], f[3]) * w(f[1], f[2])
    assert quasifree_npoint(W, f) == exp


@given(st.integers(0, 8), st.booleans(), st.integers(0, 2**31))
def test_quasifree_matches_bruteforce(n, fermionic, seed):
    r = np.random.default_rng(seed)
    W = r.integers(-3, 4, (3, 3)) + 1j * r.integers(-3, 4, (3, 3))
    fs = [r.integers(-2, 3, 3) for _ in range(n)]
    assert quasifree_npoint(W, fs, fermionic) == quasifree_npoint_bruteforce(W, fs, fermionic)


def test_quasifree_cumulants_vanish_beyond_two():
    W = np.array([[2.0, 1 + 1j], [1 - 1j, 3.0]])
    e = np.eye(2)
    moments = [
        np.array([quasifree_npoint(W, [e[i] for i in idx]) for idx in itertools.product(range(2), repeat=k)]).reshape(
            (2,) * k
        )
        for k in range(1, 7)
    ]
    cum = truncated_npoint(moments)
    for k, c in enumerate(cum, start=1):
        if k != 2:
            assert np.count_nonzero(c) == 0
    np.testing.assert_array_equal(cum[1], W)


@given(st.integers(0, 2**31))
def test_moment_cumulant_roundtrip(seed):
    X = np.random.default_rng(seed).normal(size=(16, 2))
    moments = []
    for k in range(1, 7):
        T = np.ones(16)
        for _ in range(k):
            T = T[..., None] * X.reshape((16,) + (1,) * (T.ndim - 1) + (2,))
        moments.append(T.mean(0))
    back = moments_from_cumulants(truncated_npoint(moments))
    assert max(np.abs(a - b).max() for a, b in zip(back, moments)) < 1e-12


def test_oscillator_vacuum_form():
    w = TwoPointForm.oscillator_vacuum()
    e = np.eye(2)
    assert w(e[0], e[1]) == VACUUM_W2_X_P
    assert w.check(SymplecticSpace.standard(1).sigma)


def test_oscillator_reproduces_two_point():
    rep = oscillator_weyl_check([0.3, -0.5], [0.8, 0.2], N=64)
    assert abs(rep.first_derivative) < 1e-6
    assert rep.omega2_error < 1e-6
    assert rep.commutator_error < 1e-8


def test_oscillator_rejects_tiny_truncation():
    with pytest.raises(ValueError):
        oscillator_weyl_check([1.0, 0.0], [0.0, 1.0], N=16)


def test_oscillator_truncation_too_small():
    with pytest.raises(TruncationTooSmall):
        oscillator_weyl_check([400.0, 0.0], [0.0, 1.0], N=32)


def _space(n, seed=0):
    r = np.random.default_rng(seed)
    Q = np.linalg.qr(r.normal(size=(n, n)) + 1j * r.normal(size=(n, n)))[0]
    return DoubledSpace(n, Q @ Q.T)


@given(st.integers(0, 2**31))
def test_car_relations(seed):
    r = np.random.default_rng(seed)
    sp = _space(3)
    F = car_fock(sp)
    f, g = (r.normal(size=6) + 1j * r.normal(size=6) for _ in range(2))
    I = np.eye(8)
    assert np.abs(anticommutator(F.B(f).dag, F.B(g)).matrix - sp.inner(f, g) * I).max() < 1e-13
    assert np.abs(anticommutator(F.B(f), F.B(g)).matrix - sp.inner(sp.plus(f), g) * I).max() < 1e-13
    v = r.normal(size=3) + 1j * r.normal(size=3)
    assert F.psi(v).norm() == pytest.approx(np.linalg.norm(v), abs=1e-12)


def test_alpha_c_and_parity():
    sp = _space(3, 1)
    F = car_fock(sp)
    cp = charge_conjugation_and_parity(F)
    r = np.random.default_rng(5)
    f, g = (r.normal(size=6) + 1j * r.normal(size=6) for _ in range(2))
    Bf = F.B(f)
    np.testing.assert_allclose(cp.alpha_C(cp.alpha_C(Bf)).matrix, -Bf.matrix, atol=1e-13)
    even = Bf @ F.B(g)
    np.testing.assert_allclose(cp.tau(even).matrix, even.matrix, atol=1e-13)
    np.testing.assert_allclose(cp.alpha_C(cp.alpha_C(even)).matrix, even.matrix, atol=1e-13)


def test_separated_even_products_commute():
    sp = _space(4, 2)
    F = car_fock(sp)
    r = np.random.default_rng(3)

    def local(lo, hi):
        u, v = np.zeros(4, complex), np.zeros(4, complex)
        u[lo:hi] = r.normal(size=hi - lo)
        v[lo:hi] = r.normal(size=hi - lo)
        return sp.split(u, v)

    A = F.B(local(0, 2)) @ F.B(local(0, 2))
    B = F.B(local(2, 4)) @ F.B(local(2, 4))
    assert commutator(A, B).maxabs() == 0


def test_fock_dimension_limit():
    with pytest.raises(DimTooLarge):
        car_fock(DoubledSpace(13, np.eye(13)))
