import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.dirac_algebra import (
    ETA,
    CliffordElement,
    NoIntertwiner,
    conjugated_representation,
    find_adjoint_conjugation,
    find_intertwiner,
    represent_trace_det,
    standard_representation,
    weyl_representation,
)

# frozen oracle values
WEYL_G0 = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
DET_2G0 = 16.0
TRACE_G0G0 = 4.0


def g(a):
    return CliffordElement.generator(a)


def test_generator_squares():
    assert (g(0) * g(0)).allclose(CliffordElement.scalar(1.0))
    assert (g(1) * g(1)).allclose(CliffordElement.scalar(-1.0))


def test_distinct_generators_give_a_basis_monomial():
    assert (g(0) * g(1)).allclose(CliffordElement.monomial([0, 1]))
    assert (g(1) * g(0)).allclose(CliffordElement.monomial([0, 1], -1.0))


def test_gamma5_squared_is_minus_one():
    e5 = CliffordElement.g5()
    assert (e5 * e5).allclose(CliffordElement.scalar(-1.0))


def test_weyl_gamma0_blocks():
    np.testing.assert_array_equal(weyl_representation().gammas[0], WEYL_G0)


def test_weyl_clifford_relations():
    G = weyl_representation().gammas
    np.testing.assert_allclose(G[1] @ G[1], -np.eye(4), atol=0)
    np.testing.assert_allclose(G[0] @ G[1] + G[1] @ G[0], 0, atol=0)


def test_trace_and_det_examples():
    rep = weyl_representation()
    _, tr, _ = represent_trace_det(g(0) * g(0), rep)
    assert tr == pytest.approx(TRACE_G0G0)
    comm = g(1) * g(2) - g(2) * g(1)
    _, tr, _ = represent_trace_det(comm * g(3) * g(0), rep)
    assert abs(tr) < 1e-13
    _, _, det = represent_trace_det(CliffordElement.vector([2.0, 0, 0, 0]), rep)
    assert det == pytest.approx(DET_2G0)


@pytest.mark.parametrize("rep", [weyl_representation(), standard_representation()])
def test_trace_identities(rep):
    G = rep.gammas
    for a, b in itertools.product(range(4), repeat=2):
        assert abs(np.trace(G[a] @ G[b]) - 4 * ETA[a, b]) < 1e-13
    for a, b, c, d in itertools.product(range(4), repeat=4):
        lhs = np.trace((G[b] @ G[c] - G[c] @ G[b]) @ G[d] @ G[a])
        assert abs(lhs - 8 * (ETA[c, d] * ETA[b, a] - ETA[b, d] * ETA[c, a])) < 1e-13


def test_intertwiner_identity_case():
    L = find_intertwiner(weyl_representation(), weyl_representation()).L
    np.testing.assert_allclose(L, np.eye(4), atol=1e-12)


def test_intertwiner_to_standard_rep():
    rep1, rep2 = standard_representation(), weyl_representation()
    it = find_intertwiner(rep1, rep2)
    assert it.residual < 1e-10
    for a in range(4):
        np.testing.assert_allclose(rep1.gammas[a] @ it.L, it.L @ rep2.gammas[a], atol=1e-10)


def test_no_intertwiner_for_non_representation():
    bad = weyl_representation()
    with pytest.raises((NoIntertwiner, ValueError)):
        find_intertwiner(bad, type(bad)(np.array([np.eye(4)] * 4)))


def test_weyl_adjoint_and_conjugation():
    rep = weyl_representation()
    pair = find_adjoint_conjugation(rep)
    np.testing.assert_allclose(pair.A, rep.gammas[0], atol=1e-12)
    c = np.vdot(rep.gammas[2].ravel(), pair.C.ravel())
    np.testing.assert_allclose(pair.C, c / 4 * rep.gammas[2], atol=1e-12)
    np.testing.assert_allclose(pair.A, -pair.C.conj().T @ pair.A.conj() @ pair.C, atol=1e-12)


def _conjugator(seed):
    r = np.random.default_rng(seed)
    return r.normal(size=(4, 4)) + 1j * r.normal(size=(4, 4)) + 2 * np.eye(4)


@given(st.integers(0, 2**31))
def test_intertwiner_recovers_conjugator(seed):
    M = _conjugator(seed)
    L = find_intertwiner(conjugated_representation(weyl_representation(), M), weyl_representation()).L
    k = np.vdot(M.ravel(), L.ravel()) / np.vdot(M.ravel(), M.ravel())
    assert np.max(np.abs(L - k * M)) / np.max(np.abs(L)) < 1e-9


@given(st.integers(0, 2**31))
def test_adjoint_pair_transports(seed):
    rep = conjugated_representation(weyl_representation(), _conjugator(seed))
    pair = find_adjoint_conjugation(rep)
    assert max(pair.residuals(rep).values()) < 1e-10
    np.testing.assert_allclose(pair.A, -pair.C.conj().T @ pair.A.conj() @ pair.C, atol=1e-10)


@given(st.integers(0, 2**31))
def test_product_associative_and_graded(seed):
    r = np.random.default_rng(seed)
    a, b, c = (CliffordElement(r.normal(size=16)) for _ in range(3))
    assert ((a * b) * c).allclose(a * (b * c), atol=1e-12)
    ea, eb = a.even_part(), b.odd_part()
    assert (ea * eb).is_odd and (ea * ea).is_even
