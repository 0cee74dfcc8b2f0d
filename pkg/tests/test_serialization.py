import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from representer_lab.admissibility import admissibility_verdict
from representer_lab.errors import SchemaError
from representer_lab.proximinality import image_ball_closed
from representer_lab.regularizers import Mollifier, RegularizerSpec
from representer_lab.serialization import (
    certificate_from_dict,
    certificate_to_dict,
    dumps,
    functional_from_dict,
    functional_to_dict,
    load_problem,
    proximinality_from_dict,
    proximinality_to_dict,
    regularizer_from_dict,
    regularizer_to_dict,
    rule_from_dict,
    rule_to_dict,
    solve_result_from_dict,
    solve_result_to_dict,
    to_jsonable,
    witness_report_from_dict,
)
from representer_lab.solvers import solve
from representer_lab.spaces import FiniteLp, SequenceL1
from representer_lab.tails import TailRule

from conftest import DATA

PROBLEM_FILES = sorted(p for p in DATA.glob("*.json") if p.name != "unknown_field.json")


@pytest.mark.parametrize("path", PROBLEM_FILES, ids=lambda p: p.stem)
def test_problem_roundtrip_is_identity(path):
    pf = load_problem(path)
    text = dumps(pf.to_dict())
    again = load_problem(text)
    assert again.to_dict() == pf.to_dict()
    assert dumps(again.to_dict()) == text


def test_unknown_field_error_location():
    with pytest.raises(SchemaError) as info:
        load_problem(DATA / "unknown_field.json")
    assert (info.value.line, info.value.column) == (6, 3)
    assert "solver" in str(info.value)


def test_nested_error_location():
    text = '{\n  "version": "1",\n  "space": {"kind": "finite_lp", "p": 0.5, "dim": 2},\n' \
           '  "functionals": [{"prefix": [1, 1]}],\n  "targets": [1.0]\n}'
    with pytest.raises(SchemaError) as info:
        load_problem(text)
    assert info.value.line == 3
    assert info.value.column == text.splitlines()[2].index("0.5") + 1


def test_malformed_json_location():
    with pytest.raises(SchemaError) as info:
        load_problem('{\n  "version": "1",\n  oops\n}')
    assert info.value.line == 3


def test_semantic_errors_become_schema_errors():
    bad = {
        "version": "1",
        "space": {"kind": "finite_lp", "p": 2, "dim": 2},
        "functionals": [{"prefix": [1, 1]}],
        "targets": [1.0, 2.0],
    }
    with pytest.raises(SchemaError):
        load_problem(json.dumps(bad))


def test_non_finite_floats_are_strings():
    assert to_jsonable({"a": float("inf"), "b": [float("nan"), 1.0]}) == {"a": "inf", "b": ["nan", 1.0]}
    json.loads(dumps({"x": float("-inf")}))


rules = st.one_of(
    st.just(TailRule.zero()),
    st.builds(TailRule.constant, st.floats(-5, 5, allow_nan=False)),
    st.builds(
        lambda a, b, d, mono: TailRule.rational(a, b, 1, d, monotone=mono),
        st.integers(-5, 5),
        st.integers(-5, 5),
        st.integers(1, 5),
        st.none(),
    ),
)


@given(rule=rules)
def test_rule_roundtrip(rule):
    again = rule_from_dict(json.loads(dumps(rule_to_dict(rule))))
    assert [again.value(n) for n in (1, 2, 17)] == [rule.value(n) for n in (1, 2, 17)]
    assert rule_to_dict(again) == rule_to_dict(rule)


@given(prefix=st.lists(st.floats(-10, 10, allow_nan=False), max_size=4), rule=rules)
def test_functional_roundtrip(prefix, rule):
    from representer_lab.spaces import DualFunctional

    L = DualFunctional.sequence(tuple(prefix), rule)
    again = functional_from_dict(json.loads(dumps(functional_to_dict(L))))
    assert again.prefix == L.prefix
    assert again.dense(len(prefix) + 5).tolist() == L.dense(len(prefix) + 5).tolist()


@pytest.mark.parametrize(
    "omega",
    [
        RegularizerSpec.norm(),
        RegularizerSpec.norm_squared(),
        RegularizerSpec.radial("r**3"),
        RegularizerSpec.radial(((0, 0), (1, 1), (1, 2)), mollifier=Mollifier.uniform(33)),
        RegularizerSpec.radial("step(r - 1)", monotone=False, breakpoints=(1.0,)),
        RegularizerSpec.custom("x1**2 + norm"),
    ],
    ids=lambda o: o.label,
)
def test_regularizer_roundtrip(omega):
    d = regularizer_to_dict(omega)
    again = regularizer_from_dict(json.loads(json.dumps(d)))
    assert regularizer_to_dict(again) == d


def test_certificates_reverify_after_reload():
    for name in ("finite_l1", "counterexample", "attained"):
        pf = load_problem(DATA / f"{name}.json")
        prob = pf.problem
        res = solve(prob, epsilon=pf.options.get("epsilon", 0.25))
        back = solve_result_from_dict(json.loads(dumps(solve_result_to_dict(res))))
        assert back.point == res.point
        cert = back.certificate
        assert cert.verify(back.point, prob.functionals, prob.space)
        assert certificate_to_dict(certificate_from_dict(certificate_to_dict(cert))) == certificate_to_dict(cert)


def test_proximinality_report_roundtrip():
    pf = load_problem(DATA / "two_functionals.json")
    rep = image_ball_closed(pf.problem.space, pf.problem.functionals)
    back = proximinality_from_dict(json.loads(dumps(proximinality_to_dict(rep))))
    assert back.conclusion is rep.conclusion and back.method is rep.method
    assert back.verify(pf.problem.functionals)


@pytest.mark.parametrize("space", [FiniteLp(1, 3), SequenceL1()], ids=str)
def test_witness_reverifies_after_reload(space):
    omega = RegularizerSpec.custom("x1")
    rep = admissibility_verdict(omega, space, budget=50)
    for name, chk in rep.checks.items():
        if chk.passed:
            continue
        back = witness_report_from_dict(json.loads(dumps(chk.to_dict())), space)
        target = omega.mollified() if name.startswith("mollified") else omega
        assert back.witness.recheck(target, space), name
