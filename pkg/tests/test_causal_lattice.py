import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lcqft.causal_lattice import (
    LatticeSpacetime,
    NotAchronal,
    Region,
    Verdict,
    causal_complement,
    causal_future,
    causal_past,
    certify_inclusion,
    deform_and_certify,
    deformed_spacetime,
    domain_of_dependence,
    is_achronal,
    is_causally_convex,
    standard_scenario,
)

FLAT = LatticeSpacetime.flat(30, 41, 0.05, 0.1)


def _exact_cone(l, n0, j0, dilate=0):
    n, j = np.indices(l.shape)
    return (n >= n0) & (np.abs(j - j0) * l.dx <= (n - n0) * l.dt + dilate * l.dx + 1e-12)


def test_single_cell_future_brackets_discrete_cone():
    O = Region.box(FLAT, (2, 2), (20, 20))
    exact = _exact_cone(FLAT, 2, 20)
    inner = causal_future(FLAT, O, "inner").mask
    outer = causal_future(FLAT, O, "outer").mask
    assert not np.any(inner & ~exact)
    assert not np.any(exact & ~outer)
    assert not np.any(outer & ~_exact_cone(FLAT, 2, 20, dilate=1))


@given(st.integers(0, 25), st.integers(0, 40), st.integers(0, 40))
def test_inner_within_outer(row, a, b):
    O = Region.box(FLAT, (row, row), (min(a, b), max(a, b)))
    for op in (causal_future, causal_past):
        assert op(FLAT, O, "inner") <= op(FLAT, O, "outer")
        assert O <= op(FLAT, O, "inner")


def test_diamond_and_its_complement_are_convex():
    D = Region.diamond(FLAT, (0.2, 2.025), (1.2, 2.025))
    assert len(D) > 0
    assert is_causally_convex(FLAT, D) is Verdict.TRUE
    assert is_causally_convex(FLAT, causal_complement(FLAT, D)) is Verdict.TRUE


def test_timelike_related_diamonds_are_not_convex():
    lo = Region.diamond(FLAT, (0.1, 2.0), (0.4, 2.0))
    hi = Region.diamond(FLAT, (1.0, 2.0), (1.3, 2.0))
    assert is_causally_convex(FLAT, lo | hi) is Verdict.FALSE


def test_full_slice_determines_everything():
    S = Region.box(FLAT, (10, 10), (0, 40))
    D = domain_of_dependence(FLAT, S)
    assert len(D) == FLAT.nt * FLAT.nx


def test_interval_domain_is_a_diamond():
    R = Region.box(FLAT, (10, 10), (10, 30))
    inner, outer = domain_of_dependence(FLAT, R, "inner"), domain_of_dependence(FLAT, R, "outer")
    assert inner <= outer
    assert is_causally_convex(FLAT, inner) is Verdict.TRUE
    # widths shrink by one cell on each side per two rows (c dt / dx = 1/2)
    for row in range(10, 20):
        cols = np.nonzero(outer.mask[row])[0]
        if cols.size:
            assert cols.min() >= 10 + (row - 10) // 2 - 1 and cols.max() <= 30 - (row - 10) // 2 + 1


def test_non_achronal_set_rejected():
    R = Region.box(FLAT, (10, 14), (20, 20))
    assert not is_achronal(FLAT, R)
    with pytest.raises(NotAchronal):
        domain_of_dependence(FLAT, R)


def test_standard_scenario_certifies():
    spec, K1, K2 = standard_scenario()
    res = deform_and_certify(spec, K1, K2)
    assert res.certified and res.halvings <= 12
    s = res.beta_scale
    for _ in range(3):
        s /= 2
        l = deformed_spacetime(spec.with_scale(s))
        assert certify_inclusion(l, K1, K2, "inner") and certify_inclusion(l, K1, K2, "outer")


def test_wide_k2_needs_no_halving():
    res = deform_and_certify(*standard_scenario(k2_half_width=5.0, bump=0.0))
    assert res.certified and res.halvings == 0 and res.beta_scale == 1.0


def test_empty_k2_never_certifies():
    spec, K1, _ = standard_scenario()
    assert not deform_and_certify(spec, K1, Region.empty(spec.g1)).certified
