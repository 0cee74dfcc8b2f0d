import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import half_norm_sq_gradient_fd
from representer_lab.errors import IndexOutOfRange, InvalidSpace
from representer_lab.spaces import (
    DualFunctional,
    FiniteLp,
    PrimalVector,
    SequenceL1,
    combine,
    conjugate_exponent,
    directional_derivative,
    dual_norm,
    duality_map,
    in_duality_set,
    norm,
    pair,
    sample_member,
)
from representer_lab.tails import TailRule

P_VALUES = [1.0, 1.5, 2.0, 4.0]
vecs = arrays(np.float64, st.integers(1, 6), elements=st.floats(-10, 10, allow_nan=False, allow_subnormal=False))
# entries away from the kinks of |.| so that difference quotients are meaningful
kinkless = arrays(
    np.float64,
    st.integers(1, 6),
    elements=st.one_of(st.just(0.0), st.floats(1e-2, 10), st.floats(-10, -1e-2)),
)


def test_conjugate_exponents():
    assert conjugate_exponent(1.0) == math.inf
    assert conjugate_exponent(2.0) == 2.0
    assert conjugate_exponent(4.0) == pytest.approx(4 / 3)


def test_primal_vector_is_one_based_and_sparse():
    f = PrimalVector((3, 1), (2.0, -1.0))
    assert f.indices == (1, 3)
    assert list(f.to_dense(4)) == [-1.0, 0.0, 2.0, 0.0]
    with pytest.raises(IndexOutOfRange):
        PrimalVector((0,), (1.0,))


def test_sequence_dual_norm_not_attained():
    L = DualFunctional.sequence((), TailRule.rational(1, 0, 1, 1))
    dn = dual_norm(L)
    assert dn.value == 1.0 and dn.attained is False and dn.witness is None


def test_sequence_dual_norm_attained_in_prefix():
    L = DualFunctional.sequence((0.5, -2.0), TailRule.rational(1, 0, 1, 1, start=3))
    dn = dual_norm(L)
    assert dn.value == 2.0 and dn.attained and dn.witness == 2


def test_pair_is_exact_sum():
    L = DualFunctional.finite([1e16, 1.0, -1e16])
    f = PrimalVector.from_dense([1.0, 1.0, 1.0])
    assert pair(L, f) == 1.0


def test_mismatched_dimension_rejected():
    with pytest.raises(IndexOutOfRange):
        norm(FiniteLp(2, 2), PrimalVector.from_dense([1.0, 2.0, 3.0]))
    with pytest.raises(InvalidSpace):
        dual_norm(DualFunctional.finite([1.0, 2.0, 3.0]), FiniteLp(2, 2))


@pytest.mark.parametrize("p", P_VALUES)
@given(x=vecs)
def test_duality_members_satisfy_definition(p, x):
    n = x.size
    space = FiniteLp(p, n)
    f = PrimalVector.from_dense(x)
    desc = duality_map(space, f)
    r = norm(space, f)
    rng = np.random.default_rng(0)
    for _ in range(5):
        L = sample_member(desc, rng)
        assert pair(L, f) == pytest.approx(r * r, rel=1e-9, abs=1e-9)
        assert dual_norm(L, space).value == pytest.approx(r, rel=1e-9, abs=1e-9)
        assert in_duality_set(desc, L)


@given(x=vecs)
def test_sequence_duality_members(x):
    f = PrimalVector.from_dense(x)
    space = SequenceL1()
    desc = duality_map(space, f)
    r = norm(space, f)
    L = sample_member(desc, np.random.default_rng(1))
    assert pair(L, f) == pytest.approx(r * r, rel=1e-9, abs=1e-9)
    assert dual_norm(L).value == pytest.approx(r, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_duality_map_is_gradient_of_half_norm_squared(p):
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.normal(size=4)
        L = duality_map(FiniteLp(p, 4), PrimalVector.from_dense(x)).smooth_point
        assert np.allclose(L.prefix, half_norm_sq_gradient_fd(x, p), atol=1e-4)


def test_l1_duality_set_is_box():
    space = FiniteLp(1, 3)
    desc = duality_map(space, PrimalVector.from_dense([2.0, 0.0, -1.0]))
    assert desc.radius == 3.0
    assert in_duality_set(desc, DualFunctional.finite([3.0, 0.5, -3.0]))
    assert not in_duality_set(desc, DualFunctional.finite([3.0, 3.5, -3.0]))
    assert not in_duality_set(desc, DualFunctional.finite([3.0, 0.0, 3.0]))


def test_duality_map_of_zero_is_zero():
    desc = duality_map(FiniteLp(2, 2), PrimalVector.zero())
    assert desc.is_zero
    assert in_duality_set(desc, DualFunctional.finite([0.0, 0.0]))


@given(x=kinkless, h=vecs)
def test_directional_derivative_is_support_function(x, h):
    n = min(x.size, h.size)
    x, h = x[:n], h[:n]
    space = FiniteLp(1, n)
    f, d = PrimalVector.from_dense(x), PrimalVector.from_dense(h)
    dd = directional_derivative(space, f, d)
    # one-sided difference quotient from above
    t = 1e-7
    F = lambda z: 0.5 * np.abs(z).sum() ** 2
    fd = (F(x + t * h) - F(x)) / t
    assert dd == pytest.approx(fd, rel=1e-4, abs=1e-4 * (1 + np.abs(h).sum() * np.abs(x).sum()))


def test_combine_mixes_prefix_and_tail():
    L1 = DualFunctional.sequence((1.0,), TailRule.rational(1, 0, 1, 1, start=2))
    L2 = DualFunctional.sequence((0.0, 2.0))
    M = combine([2.0, -1.0], [L1, L2])
    assert M.at(1) == 2.0
    assert M.at(2) == pytest.approx(2 * 2 / 3 - 2.0)
    assert M.at(10) == pytest.approx(2 * 10 / 11)
