import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from representer_lab.regularizers import (
    Expression,
    Mollifier,
    MollifiedProfile,
    PiecewiseLinear,
    RegularizerSpec,
    mollify_radial,
)
from representer_lab.spaces import FiniteLp, PrimalVector, SequenceL1

L1_3 = FiniteLp(1, 3)


def test_expression_rejects_unsafe_syntax():
    for bad in ("__import__('os')", "r.real", "[r]", "lambda: 1"):
        with pytest.raises(ValueError):
            Expression(bad)


def test_expression_coordinates_and_norm():
    omega = RegularizerSpec.custom("x1 + 2*x3 + norm")
    assert omega.min_length == 3
    assert omega.evaluate(PrimalVector.from_dense([1.0, 0.0, -1.0]), L1_3) == pytest.approx(1 - 2 + 2)


def test_piecewise_jump_is_right_continuous():
    h = PiecewiseLinear(((0, 0), (1, 1), (1, 2), (3, 2)))
    assert h(1.0) == 2.0
    assert h(np.nextafter(1.0, 0)) == pytest.approx(1.0)
    assert h(5.0) == 2.0
    assert h.limits(1.0) == (pytest.approx(1.0), 2.0)
    assert h.is_nondecreasing()


def test_monotone_variant_rejects_decreasing_table():
    with pytest.raises(ValueError):
        RegularizerSpec.radial(((0, 1), (1, 0)))


def test_mollifier_weights_must_normalize():
    with pytest.raises(ValueError):
        Mollifier((0.5, 0.4))
    with pytest.raises(ValueError):
        Mollifier((1.5, -0.5))


def test_step_profile_mollified_exact_integral():
    step = RegularizerSpec.radial(((0, 0), (1, 0), (1, 1), (2, 1)))
    f = PrimalVector.from_dense([0.25, -0.25, 0.0])
    assert mollify_radial(step, f, L1_3, Mollifier.uniform()) == pytest.approx(0.5, abs=1e-12)


def test_step_expression_with_breakpoint():
    step = RegularizerSpec.radial("step(r - 1)", breakpoints=[1.0])
    f = PrimalVector.from_dense([0.5, 0.0, 0.0])
    assert mollify_radial(step, f, L1_3, Mollifier.uniform()) == pytest.approx(0.5, abs=1e-6)


@given(r=st.floats(0.0, 50.0))
def test_mollified_identity_adds_half(r):
    h = MollifiedProfile(PiecewiseLinear(((0, 0), (100, 100))), Mollifier.uniform())
    assert h(r) == pytest.approx(r + 0.5, abs=1e-12)


def test_mollified_norm_expression():
    omega = RegularizerSpec.norm()
    f = PrimalVector.from_dense([0.3, 0.2, 0.0])
    assert mollify_radial(omega, f, L1_3, Mollifier.uniform()) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("x", [[1.0, 2.0, 2.0], [0.1, 0.0, 0.0], [0.0, -3.0, 0.5]])
def test_point_mass_mollifier_is_identity(x):
    # the limit table puts its mass on the last bin of width 1e-4; the error is
    # at most the Lipschitz constant of r**2 near ||f|| times that width
    omega = RegularizerSpec.norm_squared()
    m = Mollifier.point_mass()
    f = PrimalVector.from_dense(x)
    r = sum(abs(v) for v in x)
    width = 1.0 / len(m.weights)
    assert mollify_radial(omega, f, L1_3, m) == pytest.approx(r * r, abs=2 * (r + 1) * width)


def test_mollify_at_zero_uses_first_axis():
    omega = RegularizerSpec.custom("x1")
    # integral of (-t) * 1 over [-1, 0] with direction e_1
    assert mollify_radial(omega, PrimalVector.zero(), L1_3, Mollifier.uniform()) == pytest.approx(0.5, abs=1e-9)


def test_mollified_custom_matches_scalar_path():
    omega = RegularizerSpec.custom("x1**2 - x2")
    mol = omega.mollified(Mollifier.uniform(65))
    X = np.array([[0.5, 1.0, 0.0], [0.0, 0.0, 0.0], [-1.0, 2.0, 3.0]])
    direct = [mollify_radial(omega, PrimalVector.from_dense(x), L1_3, Mollifier.uniform(65)) for x in X]
    assert np.allclose(mol.values(X, L1_3), direct, atol=1e-12)


def test_values_reject_non_finite():
    omega = RegularizerSpec.custom("log(x1)")
    with pytest.raises(ValueError):
        omega.evaluate(PrimalVector.from_dense([-1.0, 0.0, 0.0]), L1_3)


def test_sequence_space_evaluation():
    omega = RegularizerSpec.custom("x4")
    assert omega.evaluate(PrimalVector.unit(4, 2.0), SequenceL1()) == 2.0
