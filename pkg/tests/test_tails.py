from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from representer_lab.errors import InvalidTailRule
from representer_lab.tails import Tail, TailRule

small = st.integers(-6, 6)


def test_counterexample_rule_values_and_limit():
    rule = TailRule.rational(1, 0, 1, 1, monotone="increasing")
    assert rule.value(1) == 0.5
    assert rule.exact_value(9) == Fraction(9, 10)
    assert rule.exact_limit() == 1
    sup, attained, arg = Tail.from_rule(rule).sup_abs(1)
    assert (sup, attained, arg) == (1.0, False, None)


def test_decreasing_rule_attains_at_start():
    rule = TailRule.rational(0, 1, 1, 0)  # 1/n
    sup, attained, arg = Tail.from_rule(rule).sup_abs(3)
    assert attained and arg == 3 and sup == pytest.approx(1 / 3)


def test_declared_direction_must_match():
    with pytest.raises(InvalidTailRule):
        TailRule.rational(1, 0, 1, 1, monotone="decreasing")


@pytest.mark.parametrize(
    "args",
    [(1, 0, 0, 1), (0, 1, 0, 0), (1, 0, 1, -3)],
    ids=["unbounded", "zero-denominator", "sign-change"],
)
def test_invalid_rules_rejected(args):
    with pytest.raises(InvalidTailRule):
        TailRule.rational(*args)


@given(a=small, b=small, g=st.integers(1, 6), d=st.integers(0, 6), start=st.integers(1, 5))
def test_sup_matches_brute_force(a, b, g, d, start):
    rule = TailRule.rational(a, b, g, d)
    tail = Tail.from_rule(rule)
    sup, attained, arg = tail.sup_abs(start)
    ns = np.arange(start, start + 4000)
    vals = np.abs(rule.values(ns))
    assert sup >= vals.max() - 1e-12
    assert sup == pytest.approx(max(vals.max(), abs(rule.limit())), abs=1e-12)
    if attained:
        assert abs(rule.value(arg)) == pytest.approx(sup, abs=1e-12)
    else:
        assert vals.max() < sup


@given(a=small, b=small, g=st.integers(1, 6), d=st.integers(0, 6), c=st.floats(-3, 3))
def test_tail_scaling_is_linear(a, b, g, d, c):
    tail = Tail.from_rule(TailRule.rational(a, b, g, d))
    scaled = tail.scaled(c)
    for n in (1, 5, 50):
        assert scaled.value(n) == pytest.approx(c * tail.value(n), abs=1e-12)


def test_clamped_tail_bounds_values():
    tail = Tail.from_rule(TailRule.rational(3, 0, 1, 1)).clamp(2.0)
    for n in (1, 2, 10, 1000):
        assert abs(tail.value(n)) <= 2.0
    assert tail.limit() == 2.0
