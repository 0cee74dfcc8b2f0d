"""Sampling checks of regularizers against the tangential bound.

``Omega`` is admissible iff ``Omega(f + f_T) >= Omega(f)`` whenever ``f``
minimizes ``Omega`` on a face exposed by ``L`` and ``L(f_T) = 0``.  The
checkers below search for violations; a failure always carries a witness
that can be re-verified without the checker, while a pass is only
sampling evidence.

Tangents are built so that ``pair(L, f_T)`` is exactly zero in floating
point: either on coordinates where ``L`` vanishes, via
:func:`~representer_lab.geometry.tangent_sample`, or on two coordinates
whose rounded products cancel (see :func:`exact_pair_tangent`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse
from .geometry import Rotundity, exposed_face, face_min, rotundity_profile, tangent_sample
from .regularizers import mollify_radial
from .spaces import DualFunctional, FiniteLp, PrimalVector, dense_norm, duality_map, pair

__all__ = [
    "Witness",
    "WitnessReport",
    "AdmissibilityReport",
    "check_tangential_bound",
    "check_radial_face_monotone",
    "admissibility_verdict",
    "verify_witness",
    "exact_pair_tangent",
    "mollify_radial",
    "DEFAULT_TOL",
    "DEFAULT_RADII",
]

DEFAULT_TOL = 1e-9
DEFAULT_RADII = np.linspace(0.1, 10.0, 64)


@dataclass(frozen=True)
class Witness:
    """``Omega(f + f_T) < Omega(f)`` with ``pair(L, f_T) == 0``.

    ``kind == "radial"`` marks the fallback when no exact tangent reached the
    lower value: then ``L`` is ``None`` and the claim is only
    ``||f|| < ||f + f_T||`` with ``Omega`` decreasing.
    """

    f: PrimalVector
    L: DualFunctional | None
    f_T: PrimalVector
    before: float
    after: float
    kind: str = "tangential"

    def recheck(self, omega, space, tol=DEFAULT_TOL):
        return verify_witness(omega, self, space, tol)

    def to_dict(self):
        return {
            "kind": self.kind,
            "f": dict(self.f.items()),
            "L": None if self.L is None else list(self.L.prefix),
            "f_T": dict(self.f_T.items()),
            "before": self.before,
            "after": self.after,
        }


@dataclass
class WitnessReport:
    passed: bool
    witness: Witness | None
    samples_run: int
    checker: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "checker": self.checker,
            "passed": self.passed,
            "samples_run": self.samples_run,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "details": self.details,
        }


def verify_witness(omega, witness, space, tol=DEFAULT_TOL):
    """Independent re-check of a failure witness."""
    after = omega.evaluate(witness.f + witness.f_T, space)
    before = omega.evaluate(witness.f, space)
    if not after < before - tol:
        return False
    if witness.kind == "radial":
        return _norm(space, witness.f) < _norm(space, witness.f + witness.f_T)
    if pair(witness.L, witness.f_T) != 0.0:
        return False
    # L must expose a face through f: L(f) = ||L||_* ||f||
    n = max(witness.f.max_index, witness.L.k, 1)
    dn = dense_norm(witness.L.dense(n), _conj(space.p))
    lf = pair(witness.L, witness.f)
    return abs(lf - dn * _norm(space, witness.f)) <= 1e-9 * max(1.0, abs(lf))


def _conj(p):
    return math.inf if p == 1.0 else p / (p - 1.0)


def _norm(space, f):
    x = np.asarray(f.values, dtype=float)
    return float(dense_norm(x, space.p)) if x.size else 0.0


def exact_pair_tangent(Li, Lj, xi, max_ulps=8):
    """``xj`` with ``Li * xi + Lj * xj == 0`` in floating point, or ``None``.

    The rounded product ``Li * xi`` is matched exactly by searching a few
    floats around ``-(Li * xi) / Lj``.
    """
    P = Li * xi
    if P == 0.0:
        return 0.0
    x = -P / Lj
    down = up = x
    for _ in range(max_ulps + 1):
        for cand in (down, up):
            if Lj * cand == -P:
                return cand
        down = math.nextafter(down, -math.inf)
        up = math.nextafter(up, math.inf)
    return None


def _work_dim(space, omega):
    if space.is_finite:
        return space.dim
    return max(3, omega.min_length)


def _as_functional(space, vals):
    vals = np.asarray(vals, dtype=float)
    if space.is_finite:
        return DualFunctional.finite(vals)
    return DualFunctional.sequence(tuple(vals))


def _pair_vector(n, i, j, xi, xj):
    x = np.zeros(n)
    x[i] = xi
    x[j] = xj
    return x


def _exact(L, x):
    return pair(L, PrimalVector.from_dense(x)) == 0.0


class _Evaluator:
    def __init__(self, omega, space, n):
        self.omega = omega
        self.space = space
        self.fin = FiniteLp(space.p, n)
        self.n = n

    def __call__(self, X):
        return self.omega.values(np.atleast_2d(X), self.fin)


def _random_l1_exposer(rng, n):
    """Face coordinates get ``+-1``; the rest dyadic values below 1 in modulus."""
    k = int(rng.integers(1, n + 1))
    S = rng.choice(n, size=k, replace=False)
    L = rng.integers(-15, 16, size=n) / 16.0
    L[S] = rng.choice([-1.0, 1.0], size=k)
    return L


def _tangents(L, space, n, rho, rng, count):
    """Exact tangents of assorted sizes for ``L`` (dense), ``count`` of them."""
    fin = FiniteLp(space.p, n)
    Lf = DualFunctional.finite(L)
    nz = np.flatnonzero(L != 0.0)
    zero = np.flatnonzero(L == 0.0)
    out = []
    for _ in range(count):
        kind = int(rng.integers(0, 3))
        mag = rho * 10.0 ** rng.uniform(-2.0, 0.5)
        if kind == 0 and zero.size:
            x = np.zeros(n)
            x[zero] = rng.normal(size=zero.size)
            x *= mag / max(dense_norm(x, space.p), 1e-300)
        elif kind == 1 and nz.size >= 2:
            i, j = rng.choice(nz, size=2, replace=False)
            xi = float(rng.choice([-1.0, 1.0]) * mag)
            xj = exact_pair_tangent(L[i], L[j], xi)
            if xj is None:
                continue
            x = _pair_vector(n, i, j, xi, xj)
        else:
            x = tangent_sample(Lf, fin, int(rng.integers(2**31))).to_dense(n)
            nrm = dense_norm(x, space.p)
            if nrm == 0.0:
                continue
            x = x * 2.0 ** round(math.log2(mag / nrm))
        if _exact(Lf, x):
            out.append(x)
    return out


def _axis_probes(n):
    """``f = e_i``, ``L = e_i^*``, ``f_T = t e_j``: the simplest exposed pairs."""
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            for t in (-1.0, 1.0, -0.5, 0.5, -2.0, 2.0):
                f = np.zeros(n)
                f[i] = 1.0
                fT = np.zeros(n)
                fT[j] = t
                yield f, f.copy(), fT


def check_tangential_bound(omega, space, n_samples=1000, seed=0, tol=DEFAULT_TOL, tangents_per_point=8):
    """Sample ``(f, L, f_T)`` with ``L`` exposing a face through ``f`` and test ``Omega(f + f_T) >= Omega(f) - tol``."""
    rng = np.random.default_rng(seed)
    n = _work_dim(space, omega)
    ev = _Evaluator(omega, space, n)
    strategy = rotundity_profile(space)
    run = 0

    def report(f, L, fT, before, after):
        w = Witness(PrimalVector.from_dense(f), _as_functional(space, L), PrimalVector.from_dense(fT),
                    float(before), float(after))
        return WitnessReport(False, w, run, "tangential", {"strategy": strategy.value})

    for f, L, fT in _axis_probes(n):
        if run >= n_samples:
            break
        run += 1
        before, after = ev(np.vstack([f, f + fT]))
        if after < before - tol:
            return report(f, L, fT, before, after)

    while run < n_samples:
        rho = 10.0 ** rng.uniform(-1.0, 1.0)
        if strategy is Rotundity.STRICTLY_CONVEX:
            u = rng.normal(size=n)
            f = rho * u / dense_norm(u, space.p)
            L = np.asarray(duality_map(ev.fin, PrimalVector.from_dense(f)).smooth_point.prefix)
        else:
            L = _random_l1_exposer(rng, n)
            face = exposed_face(ev.fin, DualFunctional.finite(L), rho)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", GridTooCoarse)
                f = face_min(face, omega).point.to_dense(n)
        T = _tangents(L, space, n, rho, rng, min(tangents_per_point, n_samples - run))
        if not T:
            run += 1
            continue
        T = np.array(T)
        vals = ev(np.vstack([f, f + T]))
        before, after = vals[0], vals[1:]
        run += len(T)
        bad = np.flatnonzero(after < before - tol)
        if bad.size:
            k = int(bad[0])
            return report(f, L, T[k], before, after[k])
    return WitnessReport(True, None, run, "tangential", {"strategy": strategy.value})


def _norm_along(space, f, x):
    return dense_norm(f + x, space.p)


def _reach_radius(fn, target, lo_scale):
    """Smallest ``s >= 0`` (bisection) with ``fn(s) >= target``, or ``None``."""
    hi = lo_scale
    for _ in range(80):
        if fn(hi) >= target:
            break
        hi *= 2.0
    else:
        return None
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _tangent_witness(ev, space, f_hat, L, targets, before, tol):
    """Search exact tangents from ``f_hat`` that reach the given radii with a lower value."""
    n = ev.n
    p = space.p
    Lf = DualFunctional.finite(L)
    base = dense_norm(f_hat, p)
    cands = []
    zero = [j for j in range(n) if L[j] == 0.0]
    nz = [j for j in range(n) if L[j] != 0.0]
    for R in targets:
        if R <= base:
            continue
        for j in zero:
            def rad(s, j=j):
                x = np.zeros(n)
                x[j] = s
                return _norm_along(space, f_hat, x)

            for sgn in (1.0, -1.0):
                s = _reach_radius(lambda a: rad(sgn * a), R, max(R - base, 1e-6))
                if s is not None:
                    x = np.zeros(n)
                    x[j] = sgn * s
                    cands.append(x)
        for i in nz:
            for j in nz:
                if i == j:
                    continue

                def vec(a, i=i, j=j):
                    xj = exact_pair_tangent(L[i], L[j], a)
                    return None if xj is None else _pair_vector(n, i, j, a, xj)

                for sgn in (1.0, -1.0):
                    def rad_pair(a, sgn=sgn):
                        v = vec(sgn * a)
                        return -math.inf if v is None else _norm_along(space, f_hat, v)

                    s = _reach_radius(rad_pair, R, max(R - base, 1e-6))
                    if s is not None:
                        v = vec(sgn * s)
                        if v is not None:
                            cands.append(v)
    cands = [x for x in cands if _exact(Lf, x)]
    if not cands:
        return None
    C = np.array(cands)
    after = ev(f_hat + C)
    bad = np.flatnonzero(after < before - tol)
    if not bad.size:
        return None
    k = int(bad[0])
    return C[k], float(after[k])


def _face_exposers(space, n, n_faces, rng):
    """First the coordinate face, then random exposing functionals (dense)."""
    e = np.zeros(n)
    e[0] = 1.0
    out = [e]
    while len(out) < n_faces:
        if space.p == 1.0:
            L = _random_l1_exposer(rng, n)
        else:
            u = rng.normal(size=n)
            f = u / dense_norm(u, space.p)
            L = np.asarray(duality_map(FiniteLp(space.p, n), PrimalVector.from_dense(f)).smooth_point.prefix)
        out.append(L)
    return out


def _face_values(omega, ev, L, radii):
    Lf = DualFunctional.finite(L)
    pts, vals = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridTooCoarse)
        for lam in radii:
            fm = face_min(exposed_face(ev.fin, Lf, float(lam)), omega)
            pts.append(fm.point.to_dense(ev.n))
            vals.append(fm.value)
    return np.array(pts), np.array(vals)


def _first_drop(vals, tol):
    d = np.flatnonzero(vals[1:] < vals[:-1] - tol)
    return int(d[0]) if d.size else None


def check_radial_face_monotone(omega, space, n_faces=6, radii_grid=None, seed=0, tol=DEFAULT_TOL,
                               refine_passes=3):
    """``lambda -> min Omega(lambda F)`` nondecreasing per face, and across faces.

    Any value at a jump radius lying between the one-sided limits keeps the
    grid sequence monotone, so jumps upward pass.
    """
    rng = np.random.default_rng(seed)
    radii = np.asarray(DEFAULT_RADII if radii_grid is None else radii_grid, dtype=float)
    n = _work_dim(space, omega)
    ev = _Evaluator(omega, space, n)
    exposers = _face_exposers(space, n, n_faces, rng)
    table = []
    run = 0

    def fail(f_hat, L, hi_pts, hi_vals, before):
        targets = [float(dense_norm(x, space.p)) for x in hi_pts]
        found = _tangent_witness(ev, space, f_hat, L, targets, before, tol)
        if found is not None:
            fT, after = found
            w = Witness(PrimalVector.from_dense(f_hat), _as_functional(space, L), PrimalVector.from_dense(fT),
                        float(before), after)
        else:
            k = int(np.argmin(hi_vals))
            w = Witness(PrimalVector.from_dense(f_hat), None, PrimalVector.from_dense(hi_pts[k] - f_hat),
                        float(before), float(hi_vals[k]), kind="radial")
        return WitnessReport(False, w, run, "radial_face", {"radii": len(radii), "faces": len(exposers)})

    for L in exposers:
        pts, vals = _face_values(omega, ev, L, radii)
        run += len(radii)
        k = _first_drop(vals, tol)
        if k is not None:
            lo, hi = radii[k], radii[k + 1]
            lo_pt, lo_val = pts[k], vals[k]
            hi_pts, hi_vals = pts[k + 1 : k + 2], vals[k + 1 : k + 2]
            for _ in range(refine_passes):
                sub = np.linspace(lo, hi, 9)
                sp, sv = _face_values(omega, ev, L, sub)
                run += len(sub)
                j = _first_drop(sv, tol)
                if j is None:
                    break
                lo, hi = sub[j], sub[j + 1]
                lo_pt, lo_val = sp[j], sv[j]
                hi_pts, hi_vals = sp[j + 1 :], sv[j + 1 :]
            return fail(lo_pt, L, hi_pts, hi_vals, lo_val)
        table.append((L, pts, vals))

    # cross-face: a point of smaller norm never beats one of larger norm
    V = np.array([t[2] for t in table])
    prev_max = np.maximum.accumulate(V.max(axis=0))
    for l in range(1, len(radii)):
        low = V[:, l].min()
        if low < prev_max[l - 1] - tol:
            a, k = np.unravel_index(np.argmax(np.where(np.arange(len(radii)) < l, V, -np.inf)), V.shape)
            b = int(np.argmin(V[:, l]))
            L, pts, vals = table[a]
            return fail(pts[k], L, table[b][1][l:l + 1], V[b, l:l + 1], vals[k])
    return WitnessReport(True, None, run, "radial_face", {"radii": len(radii), "faces": len(exposers)})


@dataclass
class AdmissibilityReport:
    verdict: str  # "consistent-with-admissible" | "not admissible"
    text: str
    checks: dict
    witness: Witness | None = None

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "text": self.text,
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def admissibility_verdict(omega, space, budget=400, seed=0, tol=DEFAULT_TOL, mollifier=None, n_faces=6):
    """Both checkers on ``Omega`` and on its radial mollification."""
    checks = {
        "tangential": check_tangential_bound(omega, space, budget, seed, tol),
        "radial_face": check_radial_face_monotone(omega, space, n_faces, None, seed, tol),
    }
    mol = omega.mollified(mollifier)
    # quadrature error enters the mollified comparison
    checks["mollified_tangential"] = check_tangential_bound(mol, space, budget, seed, 10 * tol)
    checks["mollified_radial_face"] = check_radial_face_monotone(mol, space, n_faces, None, seed, 10 * tol)
    for name in ("tangential", "radial_face"):
        if not checks[name].passed:
            w = checks[name].witness
            text = (
                f"not admissible: {name} check found Omega(f + f_T) = {w.after!r} < Omega(f) = {w.before!r}"
            )
            return AdmissibilityReport("not admissible", text, checks, w)
    total = sum(c.samples_run for c in checks.values())
    text = (
        f"consistent-with-admissible: no violation in {total} sampled configurations; "
        f"this is sampling evidence, not a proof"
    )
    if not all(c.passed for c in checks.values()):
        text += "; the mollified regularizer failed a check"
    return AdmissibilityReport("consistent-with-admissible", text, checks)
