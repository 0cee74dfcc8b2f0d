"""Proximinality of constraint kernels.

A single functional has a proximinal kernel exactly when it attains its
norm.  For several sequence functionals ``S(B) = {(L_1 f, ..., L_m f) : ||f|| <= 1}``
is examined: any direction ``u`` for which ``sum u_i L_i`` does not attain
its norm exhibits a boundary point of the closure of ``S(B)`` that ``S(B)``
misses, so the kernel is not proximinal.  Without such an analytic
witness the answer stays inconclusive; hull growth is attached as evidence.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ZeroFunctional
from .spaces import combine, dual_norm

__all__ = [
    "Conclusion",
    "Method",
    "ProximinalityReport",
    "kernel_proximinal_single",
    "image_ball_closed",
    "reflexivity_note",
    "truncated_min_norm_values",
    "hull_vertices",
]


class Conclusion(enum.Enum):
    PROXIMINAL = "Proximinal"
    NOT_PROXIMINAL = "NotProximinal"
    INCONCLUSIVE = "Inconclusive"


class Method(enum.Enum):
    NORM_ATTAINMENT = "NormAttainment"
    FINITE_DIM_COMPACTNESS = "FiniteDimCompactness"
    IMAGE_CLOSEDNESS_NUMERIC = "ImageClosednessNumeric"


@dataclass
class ProximinalityReport:
    conclusion: Conclusion
    method: Method
    witness: dict | None = None
    notes: str = ""
    evidence: dict = field(default_factory=dict)

    @property
    def proximinal(self):
        return self.conclusion is Conclusion.PROXIMINAL

    def verify(self, functionals):
        """Re-check the analytic witness of a NotProximinal report."""
        if self.conclusion is not Conclusion.NOT_PROXIMINAL:
            return True
        u = self.witness["direction"]
        M = combine(list(u), list(functionals))
        sup, attained, _ = M.sup_abs()
        return (not attained) and abs(sup - self.witness["sup"]) <= 1e-12 * max(1.0, sup)

    def hull_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        hulls = self.evidence.get("hulls", {})
        dim = max((len(v[0]) for v in hulls.values() if v), default=0)
        w.writerow(["truncation"] + [f"x{i + 1}" for i in range(dim)])
        for N, verts in hulls.items():
            for v in verts:
                w.writerow([N] + [repr(float(x)) for x in v])
        return out.getvalue()


def _non_attaining_note(sup, limit, L):
    return (
        f"sup |L_n| = {sup!r} equals the limit {limit!r} of a monotone tail and exceeds "
        f"every finite |L_n|, so the norm is not attained"
    )


def kernel_proximinal_single(L, space=None):
    """Conway criterion: ``ker L`` is proximinal iff ``L`` attains its norm."""
    dn = dual_norm(L, space if (space is not None and space.is_finite) else None)
    if dn.value == 0.0:
        raise ZeroFunctional("kernel of the zero functional is the whole space")
    if L.is_finite:
        return ProximinalityReport(
            Conclusion.PROXIMINAL, Method.FINITE_DIM_COMPACTNESS, {"index": dn.witness},
            "finite-dimensional: the unit ball is compact",
        )
    if dn.attained:
        return ProximinalityReport(
            Conclusion.PROXIMINAL, Method.NORM_ATTAINMENT, {"index": dn.witness, "sup": dn.value},
            f"norm {dn.value!r} attained at index {dn.witness}",
        )
    limit = L.limit()
    return ProximinalityReport(
        Conclusion.NOT_PROXIMINAL, Method.NORM_ATTAINMENT,
        {"direction": (1.0,), "sup": dn.value, "limit": limit},
        _non_attaining_note(dn.value, limit, L),
    )


def _exact_vertex(functionals, j):
    return tuple(L.exact_at(j) for L in functionals)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull2(points):
    """Exact monotone-chain hull (counter-clockwise, no collinear points)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_vertices(functionals, N):
    """Vertices of the hull of ``+-(L_1(e_j), ..., L_m(e_j))``, ``j <= N``."""
    m = len(functionals)
    if m == 2:
        pts = []
        for j in range(1, N + 1):
            v = _exact_vertex(functionals, j)
            pts.append(v)
            pts.append(tuple(-x for x in v))
        return _hull2(pts)
    P = np.array([[L.at(j) for L in functionals] for j in range(1, N + 1)])
    P = np.vstack([P, -P])
    try:
        hull = ConvexHull(P)
    except QhullError:
        return [tuple(p) for p in P]
    return [tuple(P[i]) for i in hull.vertices]


def _support(verts, dirs):
    V = np.array([[float(x) for x in v] for v in verts])
    return np.abs(dirs @ V.T).max(axis=1)


def _candidate_directions(functionals, limits, hulls, rng, n_random=64):
    m = len(functionals)
    dirs = [tuple(np.eye(m)[i]) for i in range(m)]
    if np.any(limits):
        dirs.append(tuple(limits / np.abs(limits).max()))
    if m == 2:
        for verts in hulls.values():
            # edge normals of the truncated hulls point at the boundary the tail approaches
            for a, b in zip(verts, verts[1:] + verts[:1]):
                nrm = np.array([float(b[1] - a[1]), -float(b[0] - a[0])])
                if np.any(nrm):
                    dirs.append(tuple(nrm / np.abs(nrm).max()))
    for u in rng.normal(size=(n_random, m)):
        dirs.append(tuple(u / np.abs(u).max()))
    seen, out = set(), []
    for d in dirs:
        key = tuple(round(x, 12) for x in d)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


def image_ball_closed(space, functionals, truncations=(8, 64, 512), seed=0):
    """Closedness of the image of the unit ball (finite-codimension criterion)."""
    functionals = list(functionals)
    if not functionals:
        raise ValueError("need at least one functional")
    if space.is_finite:
        return ProximinalityReport(
            Conclusion.PROXIMINAL, Method.FINITE_DIM_COMPACTNESS, None,
            "finite-dimensional ambient space: the image of the compact unit ball is closed",
        )
    if len(functionals) == 1:
        return kernel_proximinal_single(functionals[0])
    if all(L.tail.is_zero for L in functionals):
        return ProximinalityReport(
            Conclusion.PROXIMINAL, Method.FINITE_DIM_COMPACTNESS, None,
            "functionals depend on finitely many coordinates: the image is a polytope",
        )
    if all(x == 0 for x in exact_limit_point(functionals)):
        return ProximinalityReport(
            Conclusion.PROXIMINAL, Method.IMAGE_CLOSEDNESS_NUMERIC, {"limit": (0.0,) * len(functionals)},
            "every tail tends to 0, so the functionals lie in c_0 and are weak*-continuous on "
            "l^1 = (c_0)*; the image of the weak*-compact unit ball is compact, hence closed",
        )
    limits = np.array([L.limit() for L in functionals])
    hulls = {int(N): hull_vertices(functionals, int(N)) for N in truncations}
    rng = np.random.default_rng(seed)
    dirs = _candidate_directions(functionals, limits, hulls, rng)
    D = np.array(dirs)
    growth = {}
    Ns = sorted(hulls)
    for a, b in zip(Ns, Ns[1:]):
        growth[f"{a}->{b}"] = float((_support(hulls[b], D) - _support(hulls[a], D)).max())
    evidence = {"hulls": hulls, "growth": growth, "limit_point": tuple(float(x) for x in limits),
                "directions_probed": len(dirs)}
    for u in dirs:
        M = combine(list(u), functionals)
        sup, attained, _ = M.sup_abs()
        if sup > 0 and not attained:
            limit_pt = tuple(float(x) for x in limits)
            note = (
                f"direction u = {tuple(round(x, 12) for x in u)}: sum u_i L_i has supremum {sup!r} "
                f"approached only along the tail (limit point {limit_pt}); the closure of S(B) "
                f"contains a point on this supporting line that S(B) misses"
            )
            return ProximinalityReport(
                Conclusion.NOT_PROXIMINAL, Method.IMAGE_CLOSEDNESS_NUMERIC,
                {"direction": tuple(float(x) for x in u), "sup": sup, "limit": limit_pt}, note, evidence,
            )
    return ProximinalityReport(
        Conclusion.INCONCLUSIVE, Method.IMAGE_CLOSEDNESS_NUMERIC, None,
        "every probed direction attains its supremum; closedness is a limit property and is not decided numerically",
        evidence,
    )


def reflexivity_note(space):
    if space.is_finite:
        return "reflexive: every closed subspace proximinal"
    return "non-reflexive: non-proximinal finite-codimension subspaces exist"


def truncated_min_norm_values(L, y, Ns):
    """``|y| / max_{i <= N} |L_i|`` for each ``N`` (the l^1_N min-norm value for one constraint)."""
    Ns = np.asarray(Ns, dtype=int)
    top = int(Ns.max())
    run = np.maximum.accumulate(np.abs(L.dense(top)))
    with np.errstate(divide="ignore"):
        return abs(y) / run[Ns - 1]


def exact_limit_point(functionals):
    return tuple(Fraction(L.tail.exact_limit()) for L in functionals)
