import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.dirac_algebra import ETA, CliffordElement
from lcqft.spin_group import (
    BadGenerator,
    Membership,
    NotInSpinGroup,
    SpinElement,
    boost_curve,
    covering_map,
    d_lambda,
    d_lambda_inverse,
    lift,
    random_lorentz,
    random_spin_zero,
    rotation_curve,
    spin_membership,
)

# frozen oracle: the symmetric (0,1) boost generator maps to -1/2 g0g1
BOOST01_COEFF = -0.5


def _boost01():
    lam = np.zeros((4, 4))
    lam[0, 1] = lam[1, 0] = 1.0
    return lam


def test_identity_covers_identity():
    np.testing.assert_allclose(covering_map(SpinElement(np.eye(4))).L, np.eye(4), atol=1e-14)


def test_boost_curve_covers_double_rapidity_boost():
    t = 0.3
    L = covering_map(boost_curve(1, t)).L
    assert L[0, 0] == pytest.approx(np.cosh(2 * t))
    assert abs(L[0, 1]) == pytest.approx(np.sinh(2 * t))
    np.testing.assert_allclose(L.T @ ETA @ L, ETA, atol=1e-12)


def test_d_lambda_inverse_examples():
    assert np.allclose(d_lambda_inverse(np.zeros((4, 4))).to_clifford().coeffs, 0)
    b = d_lambda_inverse(_boost01()).to_clifford()
    assert b.allclose(CliffordElement.monomial((0, 1), BOOST01_COEFF), atol=1e-14)


def test_boost_coefficient_matches_finite_difference():
    h = 1e-6
    dL = (covering_map(boost_curve(1, h)).L - covering_map(boost_curve(1, -h)).L) / (2 * h)
    b = d_lambda_inverse(dL).to_clifford()
    assert b.allclose(CliffordElement.monomial((0, 1), 1.0), atol=1e-6)


def test_non_generator_rejected():
    with pytest.raises(BadGenerator):
        d_lambda_inverse(np.eye(4))


def test_lift_examples():
    np.testing.assert_allclose(lift(np.eye(4)).S, np.eye(4), atol=1e-14)
    S = boost_curve(1, 0.7).S
    T = lift(covering_map(boost_curve(1, 0.7))).S
    assert min(np.abs(T - S).max(), np.abs(T + S).max()) < 1e-8


def test_membership_examples():
    from lcqft.dirac_algebra import weyl_representation

    assert spin_membership(np.eye(4)) is Membership.SpinZero
    assert spin_membership(weyl_representation().gamma5) is Membership.SpinNotIdentityComponent
    S = boost_curve(1, 0.4).S @ rotation_curve(1, 2, 1.1).S
    assert spin_membership(S) is Membership.SpinZero


def test_gamma5_not_covered():
    from lcqft.dirac_algebra import weyl_representation

    with pytest.raises(NotInSpinGroup):
        covering_map(weyl_representation().gamma5)


@given(st.integers(0, 2**31))
def test_covering_is_homomorphism_with_kernel_pm1(seed):
    r = np.random.default_rng(seed)
    S1, S2 = random_spin_zero(r), random_spin_zero(r)
    L1, L2 = covering_map(S1).L, covering_map(S2).L
    scale = max(1.0, np.abs(L1).max() * np.abs(L2).max())
    assert np.abs(covering_map(S1 @ S2).L - L1 @ L2).max() / scale < 1e-10
    np.testing.assert_allclose(covering_map(-S1).L, L1, atol=1e-10 * max(1.0, np.abs(L1).max()))


@given(st.integers(0, 2**31))
def test_lift_roundtrip(seed):
    L = random_lorentz(np.random.default_rng(seed))
    assert np.abs(covering_map(lift(L)).L - L.L).max() / max(1.0, np.abs(L.L).max()) < 1e-8


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_d_lambda_roundtrip(c):
    lam = np.zeros((4, 4))
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for v, (a, b) in zip(c, pairs):
        low = np.zeros((4, 4))
        low[a, b], low[b, a] = v, -v
        lam += ETA @ low
    np.testing.assert_allclose(d_lambda(d_lambda_inverse(lam).matrix()), lam, atol=1e-10)
