"""Representer certificates: distance from ``J(f0)`` to ``span{L_i}``.

For l^1-type spaces the distance is a finite minimax.  Free coordinates of
the dual element clamp to the box ``[-r, r]``, so for fixed coefficients
``c`` the distance is

    max( max_fixed |s_i - M_i|,  max(0, sup_free |M_n| - r) ),   M = sum c_j L_j

which is solved exactly as a linear program in ``(c, t)``.  Sequence
functionals add constraints lazily: the tail limit is always present and
any finite index that violates the current bound is cut in.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from .errors import SolverDiverged, ZeroVector
from .simplex import simplex
from .spaces import (
    DualFunctional,
    PrimalVector,
    combine,
    dual_norm,
    duality_map,
    in_duality_set,
    norm,
)
from .tails import TailRule

__all__ = [
    "Certificate",
    "NotRepresentable",
    "certificate_distance",
    "certify_exact",
    "certify_approx",
    "counterexample_functional",
    "CounterexampleRow",
    "CounterexampleTable",
    "run_counterexample",
]

EXACT_TOL = 1e-8


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    coefficients: tuple
    witness: DualFunctional
    lp_value: float | None = None

    def __iter__(self):
        yield self.distance
        yield self.coefficients
        yield self.witness


@dataclass(frozen=True)
class Certificate:
    """Coefficients ``c`` and a witness ``L^ in J(f0)`` with ``||L^ - sum c_i L_i|| = distance``."""

    coefficients: tuple
    witness: DualFunctional
    distance: float
    mode: str  # "exact" | "approx"
    epsilon: float | None = None

    def residual(self, functionals, space):
        M = combine(self.coefficients, functionals) if functionals else None
        diff = self.witness - M if M is not None else self.witness
        return dual_norm(diff, space if space.is_finite else None).value

    def verify(self, f0, functionals, space, tol=1e-9):
        """Re-check membership, the recorded distance and the mode bound."""
        if not in_duality_set(duality_map(space, f0), self.witness, tol):
            return False
        if abs(self.residual(functionals, space) - self.distance) > tol:
            return False
        if self.mode == "exact":
            return self.distance <= EXACT_TOL
        return self.distance < self.epsilon


@dataclass(frozen=True)
class NotRepresentable:
    """No dual element of ``f0`` lies within tolerance of ``span{L_i}``."""

    distance: float
    coefficients: tuple
    witness: DualFunctional

    def __bool__(self):
        return False


def _lp_rows(space, functionals, f0, r, idx):
    """Coefficient rows ``L_j(i)`` for the listed coordinates."""
    return np.array([[L.at(int(i)) for L in functionals] for i in idx]).reshape(len(idx), len(functionals))


def _solve_minimax(fixed_rows, fixed_vals, free_rows, r):
    """LP ``min t`` s.t. ``|s - F c| <= t``, ``|G c| - r <= t``; returns ``(c, t)``."""
    ineq_A, ineq_b = [], []
    for a, s in zip(fixed_rows, fixed_vals):
        ineq_A.append(np.concatenate([-a, [-1.0]]))
        ineq_b.append(-s)
        ineq_A.append(np.concatenate([a, [-1.0]]))
        ineq_b.append(s)
    for a in free_rows:
        ineq_A.append(np.concatenate([a, [-1.0]]))
        ineq_b.append(r)
        ineq_A.append(np.concatenate([-a, [-1.0]]))
        ineq_b.append(r)
    G = np.array(ineq_A)
    m = G.shape[1] - 1
    k = len(ineq_b)
    # variables: c+ (m), c- (m), t, slacks (k)
    A = np.hstack([G[:, :m], -G[:, :m], G[:, m:], np.eye(k)])
    cost = np.zeros(2 * m + 1 + k)
    cost[2 * m] = 1.0
    res = simplex(cost, A, np.array(ineq_b))
    if not res.success:
        raise SolverDiverged(f"certificate LP ended with status {res.status}")
    c = res.x[:m] - res.x[m : 2 * m]
    return c, res.x[2 * m]


def _l1_distance(f0, functionals, space, max_cuts=200):
    desc = duality_map(space, f0)
    r = desc.radius
    fixed = dict(desc.fixed)
    S = sorted(fixed)
    fixed_rows = _lp_rows(space, functionals, f0, r, S)
    fixed_vals = np.array([fixed[i] for i in S])
    if space.is_finite:
        free = [i for i in range(1, space.dim + 1) if i not in fixed]
        free_rows = _lp_rows(space, functionals, f0, r, free)
        c, t = _solve_minimax(fixed_rows, fixed_vals, free_rows, r)
    else:
        # prefix coordinates and the tail limit up front; the loop cuts in the rest
        top = max(L.k for L in functionals) + 1
        free = [i for i in range(1, top + 1) if i not in fixed]
        limits = np.array([[L.limit() for L in functionals]])
        free_rows = np.vstack([_lp_rows(space, functionals, f0, r, free), limits])
        for _ in range(max_cuts):
            c, t = _solve_minimax(fixed_rows, fixed_vals, free_rows, r)
            M = combine(list(c), functionals)
            sup, attained, arg = M.sup_abs(exclude=S)
            if not attained or sup - r <= t + 1e-12 * max(1.0, r) or arg in free:
                break
            free.append(arg)
            free_rows = np.vstack([free_rows, _lp_rows(space, functionals, f0, r, [arg])])
    c = np.where(np.abs(c) < 1e-15, 0.0, c)
    M = combine(list(c), functionals)
    witness = _clamp_witness(M, fixed, r, space)
    return c, witness, float(t)


def _clamp_witness(M, fixed, r, space):
    """Member of ``J(f0)`` closest to ``M`` coordinate-wise (fixed values, clamped elsewhere)."""
    if space.is_finite:
        vals = np.clip(M.dense(space.dim), -r, r)
        for i, v in fixed.items():
            vals[i - 1] = v
        return DualFunctional.finite(vals)
    k = max([M.k] + list(fixed))
    vals = np.clip(M.dense(k), -r, r) if k else np.zeros(0)
    for i, v in fixed.items():
        vals[i - 1] = v
    return DualFunctional(tuple(vals), M.tail.clamp(r))


def _lq_distance(g, A, q):
    """``min_c ||g - A.T c||_q`` starting from least squares."""
    c0, *_ = np.linalg.lstsq(A.T, g, rcond=None)
    res0 = g - A.T @ c0
    scale = max(1.0, float(np.abs(g).max(initial=0.0)))
    if q == 2.0 or np.abs(res0).max(initial=0.0) <= 1e-14 * scale:
        return c0

    def obj(c):
        res = g - A.T @ c
        return float(np.sum(np.abs(res / scale) ** q))

    def grad(c):
        res = (g - A.T @ c) / scale
        return -(A @ (q * np.abs(res) ** (q - 1.0) * np.sign(res))) / scale

    out = minimize(obj, c0, jac=grad, method="BFGS", options={"gtol": 1e-14, "maxiter": 2000})
    c = out.x if obj(out.x) <= obj(c0) else c0
    return c


def certificate_distance(f0, functionals, space):
    """Minimize ``||g - sum c_i L_i||`` over ``g in J(f0)`` and ``c``.

    Returns a :class:`DistanceResult` (unpacks as ``distance, c, witness``);
    ``distance`` is re-evaluated from the materialized witness.
    """
    functionals = list(functionals)
    if norm(space, f0) == 0.0:
        raise ZeroVector("certificate distance needs f0 != 0")
    lp_value = None
    if space.p == 1.0:
        c, witness, lp_value = _l1_distance(f0, functionals, space)
    else:
        witness = duality_map(space, f0).smooth_point
        A = np.vstack([L.dense(space.dim) for L in functionals])
        c = _lq_distance(np.asarray(witness.prefix), A, space.q)
    M = combine(list(c), functionals)
    dist = dual_norm(witness - M, space if space.is_finite else None).value
    return DistanceResult(float(dist), tuple(float(x) for x in c), witness, lp_value)


def _zero_certificate(space, functionals):
    if space.is_finite:
        w = DualFunctional.finite(np.zeros(space.dim))
    else:
        w = DualFunctional.sequence(())
    return Certificate(tuple(0.0 for _ in functionals), w, 0.0, "exact")


def certify_exact(f0, functionals, space, tol=EXACT_TOL):
    """Exact certificate when the distance is at most ``tol``, else :class:`NotRepresentable`."""
    functionals = list(functionals)
    if norm(space, f0) == 0.0:
        return _zero_certificate(space, functionals)
    d = certificate_distance(f0, functionals, space)
    if d.distance <= tol:
        return Certificate(d.coefficients, d.witness, d.distance, "exact")
    return NotRepresentable(d.distance, d.coefficients, d.witness)


def certify_approx(f0, functionals, space, epsilon):
    """``approx(epsilon)`` certificate when the distance is strictly below ``epsilon``."""
    functionals = list(functionals)
    if norm(space, f0) == 0.0:
        return _zero_certificate(space, functionals)
    d = certificate_distance(f0, functionals, space)
    if d.distance <= EXACT_TOL:
        return Certificate(d.coefficients, d.witness, d.distance, "exact")
    if d.distance < epsilon:
        return Certificate(d.coefficients, d.witness, d.distance, "approx", float(epsilon))
    return NotRepresentable(d.distance, d.coefficients, d.witness)


def counterexample_functional():
    """``L_n = n / (n + 1)`` on sequence l^1."""
    return DualFunctional.sequence((), TailRule.rational(1, 0, 1, 1, monotone="increasing"))


@dataclass(frozen=True)
class CounterexampleRow:
    N: int
    point: PrimalVector
    norm: float
    distance: float
    distance_bound: float
    coefficient: float
    exact: bool


@dataclass
class CounterexampleTable:
    rows: list
    dual_norm: tuple
    infimum: float
    facts: dict = field(default_factory=dict)

    def to_csv(self, handle=None):
        out = handle or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["N", "point_index", "point_value", "norm", "distance", "distance_bound", "coefficient", "exact"])
        for r in self.rows:
            w.writerow(
                [r.N, r.N, repr(r.point.values[0]), repr(r.norm), repr(r.distance), repr(r.distance_bound),
                 repr(r.coefficient), str(r.exact).lower()]
            )
        return out.getvalue() if handle is None else None


def run_counterexample(N_values=(10, 100, 1000)):
    """Distances for the feasible points ``((N+1)/N) e_N`` of ``L(f) = 1``.

    ``distance_bound`` is the clamp bound ``(N+1)/N**2`` obtained with
    ``c = ((N+1)/N)**2``; ``distance`` is the optimized value.
    """
    from .spaces import SequenceL1

    space = SequenceL1()
    L = counterexample_functional()
    rows = []
    for N in N_values:
        N = int(N)
        if N < 1:
            raise ValueError("N must be a positive integer")
        val = float(Fraction(N + 1, N))
        f = PrimalVector.unit(N, val)
        d = certificate_distance(f, [L], space)
        rows.append(
            CounterexampleRow(N, f, norm(space, f), d.distance, float(Fraction(N + 1, N * N)), d.coefficients[0],
                              d.distance <= EXACT_TOL)
        )
    dn = dual_norm(L)
    return CounterexampleTable(
        rows, (dn.value, dn.attained), 1.0,
        {"functional": "L_n = n/(n+1)", "target": 1.0, "norm_attained": dn.attained},
    )
