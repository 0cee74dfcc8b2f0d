"""JSON problem and report files.

Problem files are validated against ``schema/problem.schema.json`` before
anything is built; validation errors carry the 1-based line and column of
the offending value.  Floats are written with ``repr`` precision, so
``load -> dump -> load`` is the identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .admissibility import Witness, WitnessReport
from .certificates import Certificate, NotRepresentable
from .errors import SchemaError
from .proximinality import Conclusion, Method, ProximinalityReport
from .regularizers import Mollifier, PiecewiseLinear, RegularizerSpec
from .solvers import InterpolationProblem, SolveResult
from .spaces import DualFunctional, FiniteLp, PrimalVector, SequenceL1
from .tails import Tail, TailRule

__all__ = [
    "ProblemFile",
    "load_problem",
    "parse_problem",
    "problem_to_dict",
    "load_schema",
    "dumps",
    "to_jsonable",
    "rule_to_dict",
    "rule_from_dict",
    "functional_to_dict",
    "functional_from_dict",
    "vector_to_dict",
    "vector_from_dict",
    "regularizer_to_dict",
    "regularizer_from_dict",
    "certificate_to_dict",
    "certificate_from_dict",
    "solve_result_to_dict",
    "solve_result_from_dict",
    "proximinality_to_dict",
    "proximinality_from_dict",
    "witness_report_from_dict",
]

FORMAT_VERSION = "1"


def load_schema():
    text = resources.files("representer_lab").joinpath("schema/problem.schema.json").read_text()
    return json.loads(text)


# --------------------------------------------------------------- positions


def _skip_ws(text, i):
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _locate(text):
    """Map JSON paths (tuples of keys/indices) to character offsets.

    Values map under their path; object keys map under ``path + (key, "#key")``.
    """
    dec = json.JSONDecoder()
    where = {}

    def value(i, path):
        i = _skip_ws(text, i)
        where[path] = i
        ch = text[i]
        if ch == "{":
            i = _skip_ws(text, i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                i = _skip_ws(text, i)
                key, j = dec.raw_decode(text, i)
                where[path + (key, "#key")] = i
                j = _skip_ws(text, j) + 1  # ':'
                i = _skip_ws(text, value(j, path + (key,)))
                if text[i] == "}":
                    return i + 1
                i += 1  # ','
        if ch == "[":
            i = _skip_ws(text, i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = _skip_ws(text, value(i, path + (k,)))
                k += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, j = dec.raw_decode(text, i)
        return j

    value(0, ())
    return where


def _line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _schema_error(text, err):
    path = tuple(err.absolute_path)
    key_path = None
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(k for k in err.instance if k not in allowed)
        if extra:
            key_path = path + (extra[0], "#key")
    line = col = None
    if text is not None:
        try:
            where = _locate(text)
        except (ValueError, IndexError):
            where = {}
        off = where.get(key_path, where.get(path))
        if off is not None:
            line, col = _line_col(text, off)
    loc = "/".join(str(p) for p in path) or "<root>"
    return SchemaError(f"{loc}: {err.message}", path=list(path), line=line, column=col)


# --------------------------------------------------------------- primitives


def to_jsonable(x):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(x, float):
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return to_jsonable(x.item())
    return x


def _num(x):
    if isinstance(x, str):
        return float(x)
    return None if x is None else float(x)


def dumps(obj, indent=2):
    return json.dumps(to_jsonable(obj), indent=indent, allow_nan=False)


def rule_to_dict(rule):
    if rule.kind == "zero":
        return {"kind": "zero"}
    if rule.kind == "constant":
        return {"kind": "constant", "beta": rule.beta, "start": rule.start}
    d = {"kind": "rational", "alpha": rule.alpha, "beta": rule.beta, "gamma": rule.gamma, "delta": rule.delta,
         "start": rule.start}
    if rule.monotone is not None:
        d["monotone"] = rule.monotone
    return d


def rule_from_dict(d):
    kind = d.get("kind", "zero")
    if kind == "zero":
        return TailRule.zero()
    if kind == "constant":
        return TailRule("constant", beta=d.get("beta", 0.0), start=d.get("start", 1))
    return TailRule(
        "rational", d.get("alpha", 0.0), d.get("beta", 0.0), d.get("gamma", 0.0), d.get("delta", 1.0),
        d.get("start", 1), d.get("monotone"),
    )


def _tail_to_dict(tail):
    return {
        "linear": [[c, rule_to_dict(r)] for c, r in tail.linear],
        "clamped": [[c, rule_to_dict(r)] for c, r in tail.clamped],
        "bound": tail.bound,
    }


def _tail_from_dict(d):
    return Tail(
        tuple((float(c), rule_from_dict(r)) for c, r in d.get("linear", ())),
        tuple((float(c), rule_from_dict(r)) for c, r in d.get("clamped", ())),
        d.get("bound"),
    )


def functional_to_dict(L):
    d = {"prefix": list(L.prefix)}
    if L.tail is None:
        d["tail"] = None
        return d
    rule = L.tail.single_rule
    if rule is not None:
        d["tail"] = rule_to_dict(rule)
    else:
        d["tail_terms"] = _tail_to_dict(L.tail)
    return d


def functional_from_dict(d):
    if "tail_terms" in d:
        return DualFunctional(tuple(d["prefix"]), _tail_from_dict(d["tail_terms"]))
    if d.get("tail") is None:
        return DualFunctional.finite(d["prefix"])
    return DualFunctional.sequence(tuple(d["prefix"]), rule_from_dict(d["tail"]))


def vector_to_dict(f):
    return {"indices": list(f.indices), "values": list(f.values)}


def vector_from_dict(d):
    if isinstance(d, list):
        return PrimalVector.from_dense(d)
    return PrimalVector(tuple(d["indices"]), tuple(d["values"]))


def space_to_dict(space):
    if space.is_finite:
        return {"kind": "finite_lp", "p": space.p, "dim": space.dim}
    return {"kind": "sequence_l1"}


def space_from_dict(d):
    if d["kind"] == "finite_lp":
        return FiniteLp(float(d["p"]), int(d["dim"]))
    if d.get("p", 1) != 1:
        raise SchemaError("space/p: sequence spaces are l^1 only", path=["space", "p"])
    return SequenceL1()


def regularizer_to_dict(omega):
    if omega.label == "norm":
        d = {"variant": "norm"}
    elif omega.label == "norm^2":
        d = {"variant": "norm_squared"}
    elif omega.variant == "custom":
        d = {"variant": "custom", "expression": omega.expression.source}
    else:
        d = {"variant": omega.variant}
        if isinstance(omega.h, PiecewiseLinear):
            d["table"] = [list(k) for k in omega.h.knots]
        elif hasattr(omega.h, "source"):
            d["h"] = omega.h.source
        else:
            raise TypeError(f"profile {omega.h!r} has no file representation")
        if omega.breakpoints:
            d["breakpoints"] = list(omega.breakpoints)
    if omega.mollifier is not None:
        d["mollifier"] = {"weights": list(omega.mollifier.weights), "points": omega.mollifier.points}
    return d


def regularizer_from_dict(d):
    mol = None
    if "mollifier" in d:
        m = d["mollifier"]
        mol = Mollifier(tuple(m["weights"]), m.get("points", 257))
    v = d["variant"]
    if v in ("norm", "norm_squared"):
        base = RegularizerSpec.norm() if v == "norm" else RegularizerSpec.norm_squared()
        if mol is None:
            return base
        return RegularizerSpec(base.variant, h=base.h, mollifier=mol, label=base.label)
    if v == "custom":
        if "expression" not in d:
            raise SchemaError("regularizer: custom variant needs 'expression'", path=["regularizer"])
        return RegularizerSpec.custom(d["expression"], mollifier=mol)
    if ("h" in d) == ("table" in d):
        raise SchemaError("regularizer: give exactly one of 'h' and 'table'", path=["regularizer"])
    h = PiecewiseLinear(tuple(tuple(k) for k in d["table"])) if "table" in d else d["h"]
    return RegularizerSpec.radial(h, monotone=(v == "radial_monotone"), mollifier=mol,
                                  breakpoints=tuple(d.get("breakpoints", ())))


# --------------------------------------------------------------- problems


@dataclass
class ProblemFile:
    problem: InterpolationProblem
    options: dict = field(default_factory=dict)
    point: PrimalVector | None = None
    version: str = FORMAT_VERSION

    def to_dict(self):
        return problem_to_dict(self)


def problem_to_dict(pf):
    p = pf.problem
    d = {
        "version": pf.version,
        "space": space_to_dict(p.space),
        "functionals": [functional_to_dict(L) for L in p.functionals],
        "targets": list(p.targets),
        "regularizer": regularizer_to_dict(p.regularizer),
    }
    if pf.point is not None:
        d["point"] = vector_to_dict(pf.point)
    if pf.options:
        d["options"] = dict(pf.options)
    return d


def parse_problem(data, text=None):
    """Validate a decoded problem document and build a :class:`ProblemFile`."""
    validator = jsonschema.Draft202012Validator(load_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        raise _schema_error(text, err)
    try:
        space = space_from_dict(data["space"])
        fs = []
        for L in data["functionals"]:
            if space.is_finite:
                if L.get("tail") is not None:
                    raise SchemaError("functionals: finite spaces take no tail rule", path=["functionals"])
                fs.append(DualFunctional.finite(L["prefix"]))
            else:
                rule = rule_from_dict(L["tail"]) if L.get("tail") is not None else None
                fs.append(DualFunctional.sequence(tuple(L["prefix"]), rule))
        omega = regularizer_from_dict(data.get("regularizer", {"variant": "norm"}))
        problem = InterpolationProblem(space, tuple(fs), tuple(data["targets"]), omega)
        point = vector_from_dict(data["point"]) if "point" in data else None
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"invalid problem: {exc}") from exc
    return ProblemFile(problem, dict(data.get("options", {})), point, data["version"])


def load_problem(path_or_text):
    """Read a problem file (path, or JSON text starting with ``{``)."""
    text = str(path_or_text)
    if not text.lstrip().startswith("{"):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    return parse_problem(data, text)


# --------------------------------------------------------------- results


def certificate_to_dict(cert):
    if isinstance(cert, NotRepresentable):
        return {"kind": "not_representable", "distance": cert.distance, "coefficients": list(cert.coefficients),
                "witness": functional_to_dict(cert.witness)}
    return {"kind": "certificate", "mode": cert.mode, "epsilon": cert.epsilon, "distance": cert.distance,
            "coefficients": list(cert.coefficients), "witness": functional_to_dict(cert.witness)}


def certificate_from_dict(d):
    w = functional_from_dict(d["witness"])
    if d["kind"] == "not_representable":
        return NotRepresentable(_num(d["distance"]), tuple(d["coefficients"]), w)
    return Certificate(tuple(d["coefficients"]), w, _num(d["distance"]), d["mode"], _num(d.get("epsilon")))


def solve_result_to_dict(res):
    return {
        "point": vector_to_dict(res.point),
        "objective": res.objective,
        "inf_estimate": res.inf_estimate,
        "gap": res.gap,
        "mode": res.mode,
        "epsilon": res.epsilon,
        "norm": res.norm,
        "iterations": res.iterations,
        "truncation": res.truncation,
        "dual_coefficients": None if res.dual_coefficients is None else list(res.dual_coefficients),
        "certificate": None if res.certificate is None else certificate_to_dict(res.certificate),
        "warnings": list(res.warnings),
        "info": res.info,
    }


def solve_result_from_dict(d):
    return SolveResult(
        point=vector_from_dict(d["point"]),
        objective=_num(d["objective"]),
        inf_estimate=_num(d["inf_estimate"]),
        gap=_num(d["gap"]),
        mode=d["mode"],
        epsilon=_num(d["epsilon"]),
        norm=_num(d["norm"]),
        iterations=d["iterations"],
        truncation=d["truncation"],
        dual_coefficients=None if d["dual_coefficients"] is None else tuple(d["dual_coefficients"]),
        certificate=None if d["certificate"] is None else certificate_from_dict(d["certificate"]),
        warnings=list(d["warnings"]),
        info=d["info"],
    )


def proximinality_to_dict(rep):
    ev = dict(rep.evidence)
    if "hulls" in ev:
        ev["hulls"] = {str(N): [[float(x) for x in v] for v in verts] for N, verts in ev["hulls"].items()}
    return {"conclusion": rep.conclusion.value, "method": rep.method.value, "witness": rep.witness,
            "notes": rep.notes, "evidence": ev}


def proximinality_from_dict(d):
    w = d["witness"]
    if w is not None:
        w = {k: (tuple(v) if isinstance(v, list) else v) for k, v in w.items()}
    return ProximinalityReport(Conclusion(d["conclusion"]), Method(d["method"]), w, d["notes"], d["evidence"])


def witness_report_from_dict(d, space):
    w = d["witness"]
    wit = None
    if w is not None:
        L = None
        if w["L"] is not None:
            L = DualFunctional.finite(w["L"]) if space.is_finite else DualFunctional.sequence(tuple(w["L"]))
        wit = Witness(
            PrimalVector.from_dict({int(k): v for k, v in w["f"].items()}),
            L,
            PrimalVector.from_dict({int(k): v for k, v in w["f_T"].items()}),
            _num(w["before"]),
            _num(w["after"]),
            w["kind"],
        )
    return WitnessReport(d["passed"], wit, d["samples_run"], d["checker"], d["details"])
