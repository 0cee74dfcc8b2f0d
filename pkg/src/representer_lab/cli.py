"""Command line: ``representer-lab {solve,certify,proximinal,admissible,counterexample}``.

Exit codes: 0 success, 1 invalid input, 2 infeasible constraints,
3 budget exhausted, 4 point not representable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .admissibility import DEFAULT_TOL, admissibility_verdict
from .certificates import EXACT_TOL, certify_approx, certify_exact, run_counterexample
from .errors import BudgetExceeded, Infeasible, RepresenterLabError, SchemaError
from .proximinality import image_ball_closed, kernel_proximinal_single, reflexivity_note
from .serialization import (
    certificate_to_dict,
    dumps,
    load_problem,
    proximinality_to_dict,
    solve_result_to_dict,
    vector_from_dict,
)
from .solvers import FEAS_TOL, solve
from .spaces import norm

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_NOT_REPRESENTABLE = 0, 1, 2, 3, 4

log = logging.getLogger("representer_lab")


class _Stages:
    def __init__(self):
        self.times = {}

    def run(self, name, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.times[name] = time.perf_counter() - t0


def _report(command, pf, results, status, stages, caught=()):
    return {
        "tool": "representer-lab",
        "version": __version__,
        "command": command,
        "status": status,
        "problem": None if pf is None else pf.to_dict(),
        "results": results,
        "warnings": [str(w.message) for w in caught],
        "timings": stages.times,
    }


def _option(args, pf, name, default):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return pf.options.get(name, default) if pf is not None else default


def _error_record(exc):
    d = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, Infeasible) and exc.residual is not None:
        d["residual"] = np.atleast_1d(np.asarray(exc.residual, dtype=float)).tolist()
    return d


def run_solve(path, args):
    stages = _Stages()
    pf = stages.run("parse", load_problem, path)
    eps = _option(args, pf, "epsilon", None)
    feas = _option(args, pf, "feas_tol", FEAS_TOL)
    tmax = _option(args, pf, "truncation_max", 2**20)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            res = stages.run("solve", solve, pf.problem, epsilon=eps, feas_tol=feas, truncation_max=tmax)
        except Infeasible as exc:
            return EXIT_INFEASIBLE, _report("solve", pf, {"error": _error_record(exc)}, "infeasible", stages, caught)
        except BudgetExceeded as exc:
            best = None if exc.best is None else solve_result_to_dict(exc.best)
            rec = {"error": _error_record(exc), "n_max": exc.n_max, "best": best}
            return EXIT_BUDGET, _report("solve", pf, rec, "budget_exceeded", stages, caught)
    return EXIT_OK, _report("solve", pf, {"solve": solve_result_to_dict(res)}, "ok", stages, caught)


def _read_point(spec):
    p = Path(spec)
    data = json.loads(p.read_text(encoding="utf-8") if p.exists() else spec)
    return vector_from_dict(data)


def run_certify(path, args):
    stages = _Stages()
    pf = stages.run("parse", load_problem, path)
    point = _read_point(args.point) if args.point else pf.point
    if point is None:
        raise SchemaError("certify needs a point (--point or a 'point' block in the problem file)")
    prob = pf.problem
    tol = _option(args, pf, "tol", EXACT_TOL)
    # only an explicit flag asks for the approximate certificate; the file's
    # epsilon belongs to the solver
    eps = args.epsilon
    cert = stages.run("certify_exact", certify_exact, point, prob.functionals, prob.space, tol)
    results = {"point": {"indices": list(point.indices), "values": list(point.values)},
               "residual": [float(r) for r in prob.residual(point)],
               "certify_exact": certificate_to_dict(cert)}
    if cert:
        return EXIT_OK, _report("certify", pf, results, "exact", stages)
    results["distance"] = cert.distance
    print(f"distance from J(f0) to span{{L_i}}: {cert.distance!r}", file=sys.stderr)
    if eps is not None and norm(prob.space, point) > 0:
        approx = stages.run("certify_approx", certify_approx, point, prob.functionals, prob.space, eps)
        results["certify_approx"] = certificate_to_dict(approx)
        if approx:
            return EXIT_OK, _report("certify", pf, results, "approx", stages)
    return EXIT_NOT_REPRESENTABLE, _report("certify", pf, results, "not_representable", stages)


def run_proximinal(path, args):
    stages = _Stages()
    pf = stages.run("parse", load_problem, path)
    prob = pf.problem
    seed = _option(args, pf, "seed", 0)
    truncations = tuple(pf.options.get("truncations", (8, 64, 512)))
    if prob.m == 1:
        rep = stages.run("criterion", kernel_proximinal_single, prob.functionals[0], prob.space)
    else:
        rep = stages.run("criterion", image_ball_closed, prob.space, prob.functionals, truncations, seed)
    results = {"proximinality": proximinality_to_dict(rep), "reflexivity": reflexivity_note(prob.space)}
    return EXIT_OK, _report("proximinal", pf, results, rep.conclusion.value, stages)


def run_admissible(path, args):
    stages = _Stages()
    pf = stages.run("parse", load_problem, path)
    prob = pf.problem
    seed = _option(args, pf, "seed", 0)
    tol = _option(args, pf, "tol", DEFAULT_TOL)
    budget = _option(args, pf, "budget", 400)
    rep = stages.run("checks", admissibility_verdict, prob.regularizer, prob.space, budget, seed, tol)
    return EXIT_OK, _report("admissible", pf, {"admissibility": rep.to_dict()}, rep.verdict, stages)


COMMANDS = {
    "solve": run_solve,
    "certify": run_certify,
    "proximinal": run_proximinal,
    "admissible": run_admissible,
}


def _run_one(command, path, args):
    """One problem file; never raises for expected failures."""
    try:
        return COMMANDS[command](str(path), args)
    except SchemaError as exc:
        rec = {"error": {"type": "SchemaError", "message": str(exc), "line": exc.line, "column": exc.column}}
        return EXIT_INPUT, _report(command, None, rec, "schema_error", _Stages())
    except (RepresenterLabError, ValueError, OSError) as exc:
        return EXIT_INPUT, _report(command, None, {"error": _error_record(exc)}, "error", _Stages())


def _emit(report, out):
    text = dumps(report) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _run_batch(command, directory, args):
    files = sorted(Path(directory).glob("*.json"))
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    jobs = max(1, int(args.jobs or 1))
    if jobs == 1:
        outcomes = [_run_one(command, f, args) for f in files]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, [command] * len(files), files, [args] * len(files)))
    worst = EXIT_OK
    for f, (code, rep) in zip(files, outcomes):
        worst = max(worst, code)
        if out_dir is None:
            sys.stdout.write(dumps({"file": f.name, "exit_code": code, "report": rep}, indent=None) + "\n")
        else:
            _emit(rep, out_dir / f"{f.stem}.report.json")
    return worst


def cmd_counterexample(args):
    table = run_counterexample(args.N)
    text = table.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="representer-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=False, tol=False):
        p.add_argument("path", help="problem file, or a directory of *.json problems")
        p.add_argument("--out", help="report file (or directory in batch mode); default stdout")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for batch directories")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="sampling seed (default 0)")
        if tol:
            p.add_argument("--tol", type=float, default=None, help="acceptance tolerance")

    p = sub.add_parser("solve", help="regularized interpolation with a certificate")
    common(p)
    p.add_argument("--epsilon", type=float, default=None, help="approximation level for sequence l^1")
    p.add_argument("--feas-tol", dest="feas_tol", type=float, default=None,
                   help=f"constraint residual tolerance (default {FEAS_TOL:g})")
    p.add_argument("--truncation-max", dest="truncation_max", type=int, default=None,
                   help="largest truncation tried for sequence problems (default 2**20)")

    p = sub.add_parser("certify", help="representer certificate for a given point")
    common(p, tol=True)
    p.add_argument("--point", help="JSON file (or inline JSON) with the point")
    p.add_argument("--epsilon", type=float, default=None, help="also try an approximate certificate")

    p = sub.add_parser("proximinal", help="proximinality of the constraint kernel")
    common(p, seed=True)

    p = sub.add_parser("admissible", help="sampling checks of the regularizer")
    common(p, seed=True, tol=True)
    p.add_argument("--budget", type=int, default=None, help="tangent samples per checker (default 400)")

    p = sub.add_parser("counterexample", help="distance table for L_n = n/(n+1) on sequence l^1")
    p.add_argument("--N", type=int, nargs="+", default=[10, 100, 1000], help="truncation indices")
    p.add_argument("--out", help="CSV file; default stdout")
    return ap


def main(argv=None):
    level = os.environ.get("REPRESENTER_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "counterexample":
        try:
            return cmd_counterexample(args)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
    if Path(args.path).is_dir():
        return _run_batch(args.command, args.path, args)
    code, rep = _run_one(args.command, args.path, args)
    if rep.get("status") in ("schema_error", "error"):
        err = rep["results"]["error"]
        print(f"error: {err['message']}", file=sys.stderr)
    log.info("%s finished with exit code %d", args.command, code)
    _emit(rep, args.out)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
