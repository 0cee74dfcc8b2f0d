import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from representer_lab.certificates import (
    NotRepresentable,
    certificate_distance,
    certify_approx,
    certify_exact,
    counterexample_functional,
    run_counterexample,
)
from representer_lab.errors import ZeroVector
from representer_lab.spaces import DualFunctional, FiniteLp, PrimalVector, SequenceL1, duality_map, in_duality_set
from representer_lab.tails import TailRule

from oracles import counterexample_exact, l1_sequence_distance_lp

# frozen from ``counterexample_exact`` (exact rational arithmetic)
FROZEN = {
    10: (0.05238095238095238, 1.1523809523809523, 0.11),
    100: (0.005024875621890548, 1.0150248756218905, 0.0101),
    1000: (0.0005002498750624688, 1.0015002498750625, 0.001001),
}


def test_frozen_values_match_oracle():
    for N, (dist, coef, bound) in FROZEN.items():
        ex = counterexample_exact(N)
        assert float(ex["distance"]) == dist
        assert float(ex["coefficient"]) == coef
        assert float(ex["clamp_bound"]) == bound


@pytest.mark.parametrize("N", sorted(FROZEN))
def test_counterexample_distance(N):
    dist, coef, bound = FROZEN[N]
    table = run_counterexample([N])
    row = table.rows[0]
    assert row.norm == pytest.approx((N + 1) / N, abs=1e-12)
    assert row.distance == pytest.approx(dist, abs=1e-12)
    assert row.coefficient == pytest.approx(coef, abs=1e-12)
    assert row.distance_bound == pytest.approx(bound, abs=1e-12)
    assert row.distance <= row.distance_bound
    assert not row.exact
    assert table.dual_norm == (1.0, False)


def test_counterexample_csv():
    text = run_counterexample([10, 100]).to_csv()
    lines = text.strip().splitlines()
    assert lines[0].startswith("N,point_index")
    assert len(lines) == 3
    assert lines[1].split(",")[-1] == "false"


def test_counterexample_rejects_bad_N():
    with pytest.raises(ValueError):
        run_counterexample([0])


def test_hilbert_distance_is_projection_residual():
    space = FiniteLp(2, 3)
    fs = [DualFunctional.finite([1.0, 0.0, 0.0])]
    f0 = PrimalVector.from_dense([1.0, 2.0, 0.0])
    d = certificate_distance(f0, fs, space)
    assert d.distance == pytest.approx(2.0, abs=1e-10)
    assert d.coefficients[0] == pytest.approx(1.0, abs=1e-10)


def test_exact_certificate_verifies():
    space = FiniteLp(1, 3)
    fs = [DualFunctional.finite([1.0, 0.5, 0.0])]
    f0 = PrimalVector.from_dense([2.0, 0.0, 0.0])
    cert = certify_exact(f0, fs, space)
    assert cert and cert.mode == "exact"
    assert cert.verify(f0, fs, space)
    assert in_duality_set(duality_map(space, f0), cert.witness)


def test_not_representable_is_falsy():
    space = FiniteLp(2, 2)
    fs = [DualFunctional.finite([1.0, 1.0])]
    f0 = PrimalVector.from_dense([0.0, -1.0])
    res = certify_exact(f0, fs, space)
    assert isinstance(res, NotRepresentable) and not res
    assert res.distance == pytest.approx(2**-0.5, abs=1e-10)


def test_zero_point_certifies_trivially():
    cert = certify_exact(PrimalVector.zero(), [DualFunctional.finite([1.0, 2.0])], FiniteLp(2, 2))
    assert cert and cert.distance == 0.0
    with pytest.raises(ZeroVector):
        certificate_distance(PrimalVector.zero(), [DualFunctional.finite([1.0, 2.0])], FiniteLp(2, 2))


def test_approx_certificate_on_sequence_space():
    L = counterexample_functional()
    f = PrimalVector.unit(100, 1.01)
    space = SequenceL1()
    assert not certify_exact(f, [L], space)
    cert = certify_approx(f, [L], space, 0.01)
    assert cert and cert.mode == "approx" and cert.epsilon == 0.01
    assert cert.verify(f, [L], space)
    assert not certify_approx(f, [L], space, 1e-4)


@given(
    seed=st.integers(0, 2**31 - 1),
    p=st.sampled_from([1.0, 1.5, 2.0, 3.0]),
    n=st.integers(2, 6),
    m=st.integers(1, 3),
)
def test_distance_is_invariant_under_positive_scaling(seed, p, n, m):
    # J is positively homogeneous, so the distance scales with f0
    rng = np.random.default_rng(seed)
    space = FiniteLp(p, n)
    fs = [DualFunctional.finite(rng.normal(size=n)) for _ in range(m)]
    x = rng.normal(size=n)
    d1 = certificate_distance(PrimalVector.from_dense(x), fs, space).distance
    d2 = certificate_distance(PrimalVector.from_dense(2.0 * x), fs, space).distance
    assert d2 == pytest.approx(2.0 * d1, abs=1e-6 * (1 + d1))


@given(seed=st.integers(0, 2**31 - 1), p=st.sampled_from([1.0, 1.5, 2.0, 4.0]), n=st.integers(2, 6))
def test_point_in_span_of_own_dual_is_representable(seed, p, n):
    rng = np.random.default_rng(seed)
    space = FiniteLp(p, n)
    f0 = PrimalVector.from_dense(rng.normal(size=n))
    g = duality_map(space, f0).smooth_point
    extra = DualFunctional.finite(rng.normal(size=n))
    cert = certify_exact(f0, [extra, g], space)
    assert cert, cert.distance
    assert cert.verify(f0, [extra, g], space)



@settings(max_examples=25)
@given(
    data=st.data(),
    m=st.integers(1, 2),
    support=st.lists(st.integers(1, 30), min_size=1, max_size=3, unique=True),
)
def test_sequence_distance_matches_full_lp(data, m, support):
    # the oracle lists every coordinate up to K; coordinates beyond K differ
    # from the tail limit by O(1/K), so it is a lower bound up to that gap
    fs = []
    for _ in range(m):
        prefix = data.draw(st.lists(st.integers(-4, 4), max_size=4))
        a, b, d = data.draw(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 4)))
        start = data.draw(st.integers(1, len(prefix) + 1))
        rule = TailRule.rational(a, b, 1, d, start)
        fs.append(DualFunctional.sequence(tuple(float(v) for v in prefix), rule))
    vals = data.draw(st.lists(st.sampled_from([-2.0, -0.5, 1.0, 3.0]), min_size=len(support), max_size=len(support)))
    f0 = PrimalVector(tuple(support), tuple(vals))
    got = certificate_distance(f0, fs, SequenceL1())
    K = 2000
    dense = [L.dense(K) for L in fs]
    want = l1_sequence_distance_lp(
        f0.to_dense(max(support)), [lambda i, v=v: v[i - 1] for v in dense], [L.limit() for L in fs], K
    )
    assert got.distance >= want - 1e-9
    c_scale = 1.0 + sum(abs(c) for c in got.coefficients)
    assert got.distance <= want + 40.0 * c_scale / K
