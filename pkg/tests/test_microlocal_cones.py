import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.microlocal_cones import (
    CausalClass,
    CovectorConfig,
    GaussianFunction,
    HeavisideGaussian,
    PlaneDelta,
    PointDelta,
    SingularMap,
    SumDistribution,
    ZeroSection,
    classify_covector,
    direction_grid,
    hadamard_to_config,
    in_gamma_n,
    in_gamma_n_lp,
    in_hadamard_set,
    interleave,
    random_member,
    wf_decay_scan,
    wf_pullback_check,
)

K_NULL = np.array([1.0, 0.0, 0.0, 1.0])
ORIGIN = np.zeros(4)


def pair_config(k, x=ORIGIN, y=np.array([0.0, 1.0, 0.0, 0.0])):
    return CovectorConfig.from_pairs([(x, k), (y, -k)])


def test_classification_examples():
    assert classify_covector(K_NULL) is CausalClass.Nplus
    assert classify_covector(-K_NULL) is CausalClass.Nminus
    assert classify_covector(np.zeros(4)) is CausalClass.Zero
    assert classify_covector([0.0, 1.0, 0.0, 0.0]) is CausalClass.Spacelike
    assert classify_covector([2.0, 1.0, 0.0, 0.0]) is CausalClass.Vplus_timelike


def test_two_point_member_with_certificate():
    v = in_gamma_n(pair_config(K_NULL))
    assert v.member
    np.testing.assert_allclose(v.certificate[(0, 1)], K_NULL)
    assert v.balance_residual(pair_config(K_NULL)) == 0


def test_spacelike_first_covector_excluded():
    k = np.array([0.0, 1.0, 0.0, 0.0])
    assert not in_gamma_n(pair_config(k)).member
    assert not in_gamma_n_lp(pair_config(k)).member


def test_zero_section_rejected():
    with pytest.raises(ZeroSection):
        in_gamma_n(pair_config(np.zeros(4)))


def test_interleaved_product_of_members():
    A = pair_config(K_NULL)
    B = pair_config(np.array([2.0, 1.0, 1.0, 0.5]))
    C = interleave(A, B, [0, 2])
    assert C.n == 4 and in_gamma_n(C).member


@given(st.integers(0, 2**31), st.floats(0.01, 5), st.floats(0.01, 5))
def test_cone_closed_under_positive_combinations(seed, a, b):
    r = np.random.default_rng(seed)
    A = random_member(r, 3)
    B = random_member(r, 3, A.points)
    C = A.combine(B, a, b)
    assert in_gamma_n(C).member
    assert not in_gamma_n(C.negated()).member


@given(st.integers(0, 2**31))
def test_lp_is_sound(seed):
    A = random_member(np.random.default_rng(seed), 3)
    v = in_gamma_n_lp(A)
    if v.member:
        assert in_gamma_n(A).member
        assert v.balance_residual(A) < 1e-9


def test_hadamard_examples():
    xi_p = 0.8 * np.array([1.0, -1.0, 0.0, 0.0])
    assert in_hadamard_set(ORIGIN, -xi_p, ORIGIN, xi_p)
    y = ORIGIN + np.array([1.0, 1.0, 0.0, 0.0])
    assert in_hadamard_set(ORIGIN, -xi_p, y, xi_p)
    timelike = np.array([2.0, -1.0, 0.0, 0.0])
    assert not in_hadamard_set(ORIGIN, -timelike, ORIGIN, timelike)


@given(st.floats(-2, 2), st.floats(0.1, 3))
def test_hadamard_pairs_lie_in_gamma2(s, lam):
    u = np.array([0.0, 0.6, 0.8])
    xi_p = lam * np.concatenate([[1.0], -u])
    x = np.array([0.1, 0.2, -0.3, 0.4])
    y = x + s * np.concatenate([[1.0], u])
    assert in_hadamard_set(x, -xi_p, y, xi_p)
    cfg = hadamard_to_config(x, -xi_p, y, xi_p)
    assert in_gamma_n(cfg).member and in_gamma_n(cfg, null_geodesic_variant=True).member


# ----------------------------------------------------------------------
# wave front scanner
# ----------------------------------------------------------------------


def test_scanner_reference_distributions():
    assert wf_decay_scan(PointDelta(ORIGIN), ORIGIN).singular.all()
    assert not wf_decay_scan(GaussianFunction(np.eye(4)), ORIGIN).singular.any()
    r = wf_decay_scan(HeavisideGaussian.time_step(), ORIGIN)
    expected = np.abs(np.abs(r.directions[:, 0]) - 1) < 1e-12
    np.testing.assert_array_equal(r.singular, expected)


def test_direction_grid_is_unit_and_symmetric():
    d = direction_grid(4)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
    assert {tuple(np.round(v, 12)) for v in d} == {tuple(np.round(-v, 12)) for v in d}


@pytest.mark.parametrize(
    "A",
    [
        np.eye(4),
        np.eye(4) + 0.7 * np.outer(np.eye(4)[0], np.eye(4)[1]),  # shear t -> t + 0.7 x
        np.array([[1, 0, 0, 0], [0, 0.8, -0.6, 0], [0, 0.6, 0.8, 0], [0, 0, 0, 1.0]]),
    ],
)
def test_pullback_covariance(A):
    for u in (HeavisideGaussian.time_step(), PlaneDelta(np.array([0.0, 1.0, 1.0, 0.0]))):
        assert wf_pullback_check(A, u, ORIGIN).mismatches == 0


def test_pullback_rejects_singular_map():
    with pytest.raises(SingularMap):
        wf_pullback_check(np.zeros((4, 4)), PointDelta(ORIGIN), ORIGIN)


def test_sum_parts_singular_only_where_sum_is():
    step = HeavisideGaussian.time_step()
    mix = SumDistribution(((1.0 + 0.5j, step), (2.0j, PlaneDelta(np.array([0.0, 0.0, 1.0, 0.0])))))
    full = wf_decay_scan(mix, ORIGIN).singular
    for part in (mix.real_part(), mix.imag_part()):
        assert not np.any(wf_decay_scan(part, ORIGIN).singular & ~full)
