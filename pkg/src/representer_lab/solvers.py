"""Minimal-norm and regularized interpolation, Ekeland descent, extension, lambda paths."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .certificates import certificate_distance, certify_approx, certify_exact
from .errors import (
    BudgetExceeded,
    EkelandCheckFailed,
    Infeasible,
    InvalidSpace,
    NonRadialRegularizer,
    NormInflation,
    RankDeficientConstraints,
    SolverDiverged,
    UnboundedBelowSuspected,
    ZeroVector,
)
from .geometry import functional_matrix, kernel_basis
from .regularizers import RegularizerSpec
from .simplex import simplex
from .spaces import (
    DualFunctional,
    FiniteLp,
    PrimalVector,
    SpaceSpec,
    combine,
    dense_norm,
    directional_derivative,
    dual_norm,
    norm,
    pair,
)

__all__ = [
    "InterpolationProblem",
    "SolveResult",
    "ErrorSpec",
    "TikhonovConfig",
    "TikhonovPath",
    "EkelandReport",
    "solve_min_norm",
    "solve_regularized",
    "approx_solve_l1",
    "solve",
    "attach_certificate",
    "ekeland_descend",
    "hb_extend",
    "tikhonov_path",
    "R_CAP",
]

R_CAP = 1e3
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class InterpolationProblem:
    """``min Omega(f)  s.t.  L_i(f) = y_i``."""

    space: SpaceSpec
    functionals: tuple
    targets: tuple
    regularizer: RegularizerSpec = field(default_factory=RegularizerSpec.norm)

    def __post_init__(self):
        fs = tuple(self.functionals)
        ys = tuple(float(y) for y in np.atleast_1d(self.targets))
        if not fs:
            raise ValueError("need at least one functional")
        if len(fs) != len(ys):
            raise ValueError(f"{len(fs)} functionals but {len(ys)} targets")
        for L in fs:
            if self.space.is_finite and (not L.is_finite or L.k != self.space.dim):
                raise InvalidSpace(f"functional of length {L.k} does not match {self.space}")
            if not self.space.is_finite and L.is_finite:
                raise InvalidSpace("sequence problems need functionals with a tail")
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "targets", ys)

    @property
    def m(self):
        return len(self.functionals)

    def matrix(self, truncation=None):
        return functional_matrix(self.space, self.functionals, truncation)[0]

    def residual(self, f):
        return np.array([pair(L, f) - y for L, y in zip(self.functionals, self.targets)])

    def with_targets(self, targets):
        return InterpolationProblem(self.space, self.functionals, tuple(targets), self.regularizer)


@dataclass
class SolveResult:
    point: PrimalVector
    objective: float
    inf_estimate: float
    gap: float
    mode: str = "exact"  # "exact" | "approx"
    epsilon: float | None = None
    norm: float = float("nan")
    iterations: int = 0
    truncation: int | None = None
    dual_coefficients: tuple | None = None
    certificate: object = None
    warnings: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


def _check_feasible(A, y, feas_tol):
    x, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = float(np.abs(A @ x - y).max(initial=0.0))
    scale = max(1.0, float(np.abs(y).max(initial=0.0)))
    if res > feas_tol * scale:
        raise Infeasible(f"constraints are inconsistent (least-squares residual {res:.3g})", residual=res)
    return x


def _independent_rows(A, tol=1e-12):
    keep = []
    for i in range(A.shape[0]):
        trial = keep + [i]
        if np.linalg.matrix_rank(A[trial], tol=tol * max(1.0, np.abs(A).max())) == len(trial):
            keep.append(i)
    return keep


def _jq(g, q):
    """Gradient of ``||g||_q^2 / 2``."""
    nq = dense_norm(g, q)
    if nq == 0.0:
        return np.zeros_like(g)
    return nq ** (2.0 - q) * np.abs(g) ** (q - 1.0) * np.sign(g)


def _min_norm_lp(A, y, pricing="bland"):
    m, n = A.shape
    res = simplex(np.ones(2 * n), np.hstack([A, -A]), y, pricing=pricing)
    if res.status == "infeasible":
        raise Infeasible("l1 min-norm LP is infeasible")
    if not res.success:
        raise SolverDiverged(f"l1 min-norm LP ended with status {res.status}")
    f = res.x[:n] - res.x[n:]
    return f, res.dual, res.iterations


def _dual_newton(A, y, q, tol=1e-13, max_iter=200):
    """Minimize ``psi(c) = ||A.T c||_q^2 / 2 - y.c``; returns ``c`` and iterations."""
    m = A.shape[0]
    c, *_ = np.linalg.lstsq(A @ A.T, y, rcond=None)

    def psi(c):
        return 0.5 * dense_norm(A.T @ c, q) ** 2 - y @ c

    def grad(c):
        return A @ _jq(A.T @ c, q) - y

    def hess(c):
        g = A.T @ c
        nq = dense_norm(g, q)
        a = np.abs(g)
        floor = 1e-12 * max(a.max(initial=0.0), 1e-300)
        u = a ** (q - 1.0) * np.sign(g)
        d = (q - 1.0) * nq ** (2.0 - q) * np.maximum(a, floor) ** (q - 2.0)
        H = (A * d) @ A.T + (2.0 - q) * nq ** (2.0 - 2.0 * q) * np.outer(A @ u, A @ u)
        return H

    scale = max(1.0, float(np.abs(y).max()))
    it = 0
    for it in range(1, max_iter + 1):
        gr = grad(c)
        if np.abs(gr).max() <= tol * scale:
            break
        H = hess(c) + 1e-14 * np.eye(m)
        try:
            step = -np.linalg.solve(H, gr)
        except np.linalg.LinAlgError:
            step = -gr
        if gr @ step >= 0:
            step = -gr
        # near the optimum psi changes below its rounding error; a full step
        # that shrinks the gradient is then the better test
        if np.abs(grad(c + step)).max() < 0.5 * np.abs(gr).max():
            c = c + step
            continue
        t, f0 = 1.0, psi(c)
        while t > 1e-16 and psi(c + t * step) > f0 + 1e-4 * t * (gr @ step):
            t *= 0.5
        c = c + t * step
    return c, it


def _primal_newton(A, y, p, tol=1e-15, max_iter=100):
    """Minimize ``sum |x|^p / p`` on ``A x = y`` for ``p > 2``; returns ``x``, ``lam``, iterations.

    Equality-constrained Newton from the Gram solution.  The Hessian
    ``(p - 1) |x|^(p - 2)`` stays bounded here, unlike the dual one.
    """
    m, n = A.shape
    x = A.T @ np.linalg.lstsq(A @ A.T, y, rcond=None)[0]

    def F(x):
        return float(np.sum(np.abs(x) ** p)) / p

    Q = np.linalg.qr(A.T)[0]
    if m == n:
        # no kernel: the constraints fix x
        lam = np.linalg.solve(A.T, np.abs(x) ** (p - 1.0) * np.sign(x))
        return x, lam, 0

    def kkt(x):
        # part of grad F outside the row space of A
        g = np.abs(x) ** (p - 1.0) * np.sign(x)
        return float(np.abs(g - Q @ (Q.T @ g)).max())

    it = 0
    for it in range(1, max_iter + 1):
        g = np.abs(x) ** (p - 1.0) * np.sign(x)
        h = (p - 1.0) * np.abs(x) ** (p - 2.0)
        h = h + 1e-14 * max(h.max(initial=0.0), 1e-300)
        K = np.block([[np.diag(h), A.T], [A, np.zeros((m, m))]])
        rhs = np.concatenate([-g, y - A @ x])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        dx = sol[:n]
        if np.abs(dx).max() <= tol * max(np.abs(x).max(), 1e-300) or np.array_equal(x + dx, x):
            break
        # as in the dual solver: F stalls at rounding level before x does
        if kkt(x + dx) < 0.5 * kkt(x):
            x = x + dx
            continue
        t, f0, slope = 1.0, F(x), float(g @ dx)
        while t > 1e-16 and F(x + t * dx) > f0 + 1e-4 * t * slope:
            t *= 0.5
        x = x + t * dx
    # multipliers of grad F = A.T lam, recomputed from the final point
    lam = np.linalg.lstsq(A.T, np.abs(x) ** (p - 1.0) * np.sign(x), rcond=None)[0]
    return x, lam, it


def solve_min_norm(problem, feas_tol=FEAS_TOL, truncation=None, pricing=None):
    """Minimal-norm interpolation.

    ``p = 2``: Gram system.  ``p = 1``: split-variable LP (Bland simplex).
    ``1 < p < 2``: damped Newton on the dual.  ``p > 2``: equality-constrained
    Newton on the primal.  Sequence l^1 problems are
    solved on the truncation ``l^1_N`` given by ``truncation``.
    """
    space = problem.space
    if not space.is_finite and truncation is None:
        raise InvalidSpace("sequence problems need a truncation (see approx_solve_l1)")
    A = problem.matrix(truncation)
    y = np.asarray(problem.targets)
    n = A.shape[1]
    warns = []
    keep = _independent_rows(A)
    if len(keep) < problem.m:
        _check_feasible(A, y, feas_tol)
        msg = f"{problem.m} constraints have rank {len(keep)}"
        warnings.warn(msg, RankDeficientConstraints, stacklevel=2)
        warns.append(msg)
    Ar, yr = A[keep], y[keep]
    p = space.p
    it = 0
    c_full = np.zeros(problem.m)
    if not np.any(y):
        f = np.zeros(n)
        lower = 0.0
    elif p == 1.0:
        _check_feasible(A, y, feas_tol)
        f, dual, it = _min_norm_lp(Ar, yr, pricing or ("dantzig" if n > 256 else "bland"))
        c_full[keep] = dual
        M = combine(list(c_full), problem.functionals)
        dn = dual_norm(M, space if space.is_finite else None).value
        lower = float(y @ c_full) / dn if dn > 0 else 0.0
    elif p == 2.0:
        _check_feasible(A, y, feas_tol)
        c, *_ = np.linalg.lstsq(Ar @ Ar.T, yr, rcond=None)
        f = Ar.T @ c
        c_full[keep] = c
        lower = float(np.linalg.norm(f))
    elif p > 2.0:
        _check_feasible(A, y, feas_tol)
        q = space.q
        f, lam, it = _primal_newton(Ar, yr, p)
        # J(f) = ||f||^(2-p) grad(sum |f|^p / p) = A.T c
        c = dense_norm(f, p) ** (2.0 - p) * lam
        res = yr - Ar @ f
        if np.abs(res).max() > 1e-12 * max(1.0, np.abs(yr).max()):
            f = f + np.linalg.lstsq(Ar, res, rcond=None)[0]
        c_full[keep] = c
        g = Ar.T @ c
        lower = float(yr @ c) / dense_norm(g, q)
    else:
        _check_feasible(A, y, feas_tol)
        q = space.q
        c, it = _dual_newton(Ar, yr, q)
        f = _jq(Ar.T @ c, q)
        res = yr - Ar @ f
        if np.abs(res).max() > 1e-12 * max(1.0, np.abs(yr).max()):
            f = f + np.linalg.lstsq(Ar, res, rcond=None)[0]
        c_full[keep] = c
        g = Ar.T @ c
        lower = float(yr @ c) / dense_norm(g, q)
    point = PrimalVector.from_dense(f)
    res = problem.residual(point)
    if np.abs(res).max() > feas_tol * max(1.0, np.abs(y).max()):
        raise Infeasible(f"solution violates constraints by {np.abs(res).max():.3g}", residual=res)
    obj = norm(space, point) if space.is_finite else float(np.abs(f).sum())
    lower = min(lower, obj) if abs(lower - obj) <= 1e-12 * max(1.0, obj) else lower
    return SolveResult(
        point=point,
        objective=obj,
        inf_estimate=lower,
        gap=obj - lower,
        mode="exact",
        norm=obj,
        iterations=it,
        truncation=truncation,
        dual_coefficients=tuple(float(v) for v in c_full),
        warnings=warns,
    )


def _golden(fn, a, b, iters=200):
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - phi * (b - a), a + phi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = fn(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _kernel_direction(problem, truncation=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientConstraints)
        Z = kernel_basis(problem.space, problem.functionals, truncation)
    if not Z.basis:
        return None
    d = Z.basis[0].to_dense(Z.ambient_dim)
    first = d[np.flatnonzero(d)[0]]
    return d * math.copysign(1.0, first)


def solve_regularized(problem, r_cap=R_CAP, grid=10_000, feas_tol=FEAS_TOL):
    """Radial regularizer ``h(||f||)``: 1-d search over the feasible norms ``[r_min, inf)``."""
    omega = problem.regularizer
    if not omega.is_radial:
        raise NonRadialRegularizer("solve_regularized needs a radial regularizer h(norm)")
    space = problem.space
    base = solve_min_norm(problem, feas_tol)
    r_min = base.objective
    f_min = base.point.to_dense(space.dim)
    d = _kernel_direction(problem)
    warns = list(base.warnings)
    if d is None:
        r_star = r_min
        h_star = float(omega.profile(np.array([r_min]))[0])
    else:
        hi = max(r_min, 1.0) * r_cap
        R = np.linspace(r_min, hi, grid)
        H = omega.profile(R)
        i = int(np.argmin(H))
        r_star, h_star = float(R[i]), float(H[i])
        lo_b, hi_b = R[max(i - 1, 0)], R[min(i + 1, grid - 1)]
        r_ref, h_ref = _golden(lambda r: float(omega.profile(np.array([r]))[0]), lo_b, hi_b)
        if h_ref < h_star:
            r_star, h_star = float(r_ref), float(h_ref)
        if i == grid - 1:
            msg = f"h is still decreasing at the search cap r = {hi:g}; the infimum may be -inf"
            warnings.warn(msg, UnboundedBelowSuspected, stacklevel=2)
            warns.append(msg)
    if r_star <= r_min * (1 + 1e-15) or d is None:
        f = f_min
        r_star = r_min
    else:
        def nrm(t):
            return float(dense_norm(f_min + t * d, space.p))

        t_hi = 1.0
        while nrm(t_hi) < r_star:
            t_hi *= 2.0
        t_lo = 0.0
        for _ in range(200):
            mid = 0.5 * (t_lo + t_hi)
            if nrm(mid) < r_star:
                t_lo = mid
            else:
                t_hi = mid
            if t_hi - t_lo <= 1e-16 * max(1.0, t_hi):
                break
        f = f_min + t_hi * d
    point = PrimalVector.from_dense(f)
    obj = omega.evaluate(point, space)
    return SolveResult(
        point=point,
        objective=obj,
        inf_estimate=h_star,
        gap=obj - h_star,
        mode="exact",
        norm=norm(space, point),
        dual_coefficients=base.dual_coefficients,
        warnings=warns,
        info={"r_min": r_min, "r_star": r_star, "r_cap": r_cap},
    )


def approx_solve_l1(problem, epsilon, n_start=8, n_max=2**20, feas_tol=FEAS_TOL, pricing="dantzig"):
    """epsilon-approximate solution on sequence l^1 by doubling truncations.

    Stops at the first ``N`` where the duality gap is at most ``epsilon``
    and the certificate distance is below ``epsilon``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    space = problem.space
    if space.is_finite or not space.is_l1:
        raise InvalidSpace("approx_solve_l1 works on sequence l^1")
    omega = problem.regularizer
    if omega.variant != "radial_monotone":
        raise NonRadialRegularizer("approx_solve_l1 needs Omega = h(norm) with h increasing")
    best = None
    history = []
    N = int(n_start)
    lower_best = -math.inf
    while N <= n_max:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RankDeficientConstraints)
                res = solve_min_norm(problem, feas_tol, truncation=N, pricing=pricing)
        except Infeasible:
            history.append({"N": N, "feasible": False})
            N *= 2
            continue
        lower_best = max(lower_best, res.inf_estimate)
        obj = float(omega.profile(np.array([res.norm]))[0])
        inf_est = float(omega.profile(np.array([max(lower_best, 0.0)]))[0])
        gap = obj - inf_est
        if res.point.is_zero:
            dist = 0.0
        else:
            dist = certificate_distance(res.point, problem.functionals, space).distance
        history.append({"N": N, "objective": obj, "gap": gap, "distance": dist})
        res.objective, res.inf_estimate, res.gap = obj, inf_est, gap
        res.info = {"history": history, "certificate_distance": dist, "norm_lower_bound": lower_best}
        best = res
        scale = max(1.0, abs(obj))
        if gap <= 1e-12 * scale and dist <= 1e-8:
            res.mode, res.epsilon = "exact", None
            attach_certificate(res, problem)
            return res
        if gap <= epsilon and dist < epsilon:
            res.mode, res.epsilon = "approx", float(epsilon)
            attach_certificate(res, problem)
            return res
        N *= 2
    if best is None:
        raise Infeasible(f"no truncation up to N = {n_max} satisfies the constraints")
    raise BudgetExceeded(
        f"epsilon = {epsilon:g} not reached by N = {n_max} (gap {best.gap:.3g}, distance "
        f"{best.info['certificate_distance']:.3g})",
        n_max=n_max,
        best=best,
    )


def solve(problem, epsilon=None, feas_tol=FEAS_TOL, truncation_max=2**20):
    """Dispatch on space and regularizer."""
    if not problem.space.is_finite:
        if epsilon is None:
            raise ValueError("sequence problems need epsilon")
        return approx_solve_l1(problem, epsilon, n_max=truncation_max, feas_tol=feas_tol)
    omega = problem.regularizer
    if omega.label == "norm":
        res = solve_min_norm(problem, feas_tol)
    else:
        res = solve_regularized(problem, feas_tol=feas_tol)
    attach_certificate(res, problem)
    return res


def attach_certificate(res, problem):
    """Certify ``res.point`` in the mode the solver reached; stores and returns it."""
    if res.certificate is None:
        if res.mode == "approx":
            cert = certify_approx(res.point, problem.functionals, problem.space, res.epsilon)
        else:
            cert = certify_exact(res.point, problem.functionals, problem.space)
        res.certificate = cert
    return res.certificate


# ---------------------------------------------------------------- Ekeland


@dataclass
class EkelandReport:
    F: float
    F_inf: float
    iterations: int
    value_ok: bool
    slope_ok: bool
    directional_ok: bool
    worst_slope: float
    worst_directional: float
    samples: int
    witness: dict | None = None
    refined: bool = False

    @property
    def passed(self):
        return self.value_ok and self.slope_ok and self.directional_ok


def _F(space, x, f0):
    return 0.5 * dense_norm(x - f0, space.p) ** 2


def _subgrad(space, x, f0):
    d = x - f0
    r = dense_norm(d, space.p)
    if r == 0.0:
        return np.zeros_like(d)
    if space.p == 1.0:
        return r * np.sign(d)
    return r ** (2.0 - space.p) * np.abs(d) ** (space.p - 1.0) * np.sign(d)


def _ekeland_checks(space, B, z, f0, F_inf, eps, rng, n_samples):
    x = B @ z
    Fx = float(_F(space, x, f0))
    value_ok = bool(Fx <= F_inf + eps)
    k = B.shape[1]
    worst_slope, worst_dir = -math.inf, math.inf
    witness = None
    scale = max(1.0, float(dense_norm(f0, space.p)))
    fT = PrimalVector.from_dense(x)
    diff = PrimalVector.from_dense(x - f0)
    for s in range(n_samples):
        if k == 0:
            break
        h = B @ rng.normal(size=k)
        hn = float(dense_norm(h, space.p))
        if hn == 0.0:
            continue
        t = scale * 10.0 ** rng.uniform(-3, 0)
        g = x + (t / hn) * h
        dist = float(dense_norm(x - g, space.p))
        slope = (Fx - _F(space, g, f0)) / dist
        if slope > worst_slope:
            worst_slope = slope
        if slope >= eps and witness is None:
            witness = {"kind": "slope", "g": PrimalVector.from_dense(g), "F_T": Fx, "F_g": _F(space, g, f0)}
        dd = directional_derivative(space, diff, PrimalVector.from_dense(h)) / hn
        if dd < worst_dir:
            worst_dir = dd
        if dd <= -eps and witness is None:
            witness = {"kind": "directional", "h": PrimalVector.from_dense(h), "derivative": dd * hn}
    if k == 0:
        worst_slope, worst_dir = -math.inf, math.inf
    worst_slope, worst_dir = float(worst_slope), float(worst_dir)
    slope_ok = bool(worst_slope < eps)
    dir_ok = bool(worst_dir > -eps)
    if not value_ok and witness is None:
        witness = {"kind": "value", "F_T": Fx, "F_inf": F_inf, "f_T": fT}
    return Fx, value_ok, slope_ok, dir_ok, worst_slope, worst_dir, witness


def ekeland_descend(f0, Z, epsilon, iterations=500, step=1.0, n_samples=100, seed=0, refine=True,
                    check_every=25):
    """Minimize ``F(f_T) = ||f_T - f0||^2 / 2`` over ``Z`` and verify the Ekeland conditions.

    Subgradient steps ``step * s / sqrt(k)`` (``s`` scales with ``||f0||``
    and the basis) with checks at ``k = 0`` and every ``check_every``
    iterations; ``refine`` polishes the last iterate exactly (Newton for
    ``p > 1``, LP for ``p = 1``) before the final check.
    """
    space = Z.space
    n = Z.ambient_dim
    x0 = f0.to_dense(n)
    B = Z.matrix()
    m_space = space if space.is_finite else FiniteLp(1, n)
    # best-known infimum from min-norm interpolation of L_i(f0)
    targets = [pair(L, f0) for L in Z.functionals]
    prob = InterpolationProblem(m_space, tuple(DualFunctional.finite(L.dense(n)) for L in Z.functionals), targets)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientConstraints)
        r_min = solve_min_norm(prob).objective
    F_inf = 0.5 * r_min**2

    k = B.shape[1]
    z = np.zeros(k)
    best_z, best_F = z.copy(), _F(space, B @ z, x0)
    lip = max(float(np.linalg.norm(B, 2)) if k else 1.0, 1e-300)
    radius = max(float(dense_norm(x0, space.p)), 1e-300)

    def check(zz):
        return _ekeland_checks(space, B, zz, x0, F_inf, epsilon, np.random.default_rng(seed), n_samples)

    done = 0
    out = None
    for it in range(0, iterations + 1):
        if it % check_every == 0:
            res = check(best_z)
            if res[1] and res[2] and res[3]:
                out = (best_z, res, it, False)
                break
        if it == iterations or k == 0:
            break
        g = B.T @ _subgrad(space, B @ z, x0)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            best_z = z.copy()
            continue
        if space.p == 1.0:
            # normalized subgradient step of length ~ ||f0|| / sqrt(k)
            z = z - step * radius / (lip * math.sqrt(it + 1)) * g / gn
        else:
            z = z - step / (lip**2 * math.sqrt(it + 1)) * g
        Fz = _F(space, B @ z, x0)
        if Fz < best_F:
            best_z, best_F = z.copy(), Fz
        done = it + 1
    if out is None:
        refined = False
        if refine and k:
            best_z = _polish(space, B, x0, best_z)
            refined = True
        res = check(best_z)
        out = (best_z, res, done, refined)
    z, (Fx, v_ok, s_ok, d_ok, ws, wd, wit), its, refined = out
    f_T = PrimalVector.from_dense(B @ z) if k else PrimalVector.zero()
    report = EkelandReport(Fx, F_inf, its, v_ok, s_ok, d_ok, ws, wd, n_samples, wit, refined)
    if not report.passed:
        raise EkelandCheckFailed(
            f"Ekeland conditions fail for epsilon = {epsilon:g} ({wit['kind'] if wit else 'unknown'})",
            witness=wit,
            report=report,
        )
    return f_T, report


def _polish(space, B, x0, z):
    """Exact minimizer of ``||B z - x0||`` over ``z``."""
    k = B.shape[1]
    if space.p == 2.0:
        return np.linalg.lstsq(B, x0, rcond=None)[0]
    if space.p == 1.0:
        n = B.shape[0]
        # min sum(u + v) s.t. B z - x0 = u - v, z = z+ - z-
        A = np.hstack([B, -B, -np.eye(n), np.eye(n)])
        cost = np.concatenate([np.zeros(2 * k), np.ones(2 * n)])
        res = simplex(cost, A, x0)
        if not res.success:
            return z
        return res.x[:k] - res.x[k : 2 * k]
    p = space.p

    def F(zz):
        return 0.5 * dense_norm(B @ zz - x0, p) ** 2

    for _ in range(100):
        g = B.T @ _subgrad(space, B @ z, x0)
        if np.abs(g).max(initial=0.0) <= 1e-14 * max(1.0, np.abs(x0).max()):
            break
        H = np.zeros((k, k))
        h = 1e-7 * max(1.0, np.abs(z).max(initial=0.0))
        for j in range(k):
            e = np.zeros(k)
            e[j] = h
            H[:, j] = (B.T @ _subgrad(space, B @ (z + e), x0) - B.T @ _subgrad(space, B @ (z - e), x0)) / (2 * h)
        H = 0.5 * (H + H.T) + 1e-14 * np.eye(k)
        try:
            dz = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            dz = -g
        if g @ dz >= 0:
            dz = -g
        t, F0 = 1.0, F(z)
        while t > 1e-16 and F(z + t * dz) > F0 + 1e-4 * t * (g @ dz):
            t *= 0.5
        z = z + t * dz
    return z


def hb_extend(L_on_Z, f0, f_T, Z, tol=1e-9):
    """Norm-preserving extension of ``L`` from ``Z`` to the whole space.

    ``L`` is first extended to ``span(Z, f0)`` by
    ``L(f0) = L(f_T) - ||f_T - f0||^2`` and then to the whole space with
    norm ``||f_T - f0||``: a minimal l^inf extension (LP, ties broken by
    minimal l^1 mass) for ``p = 1`` and the minimal l^q interpolant for
    ``p > 1``.  The result lies in ``J(f_T - f0)``.
    """
    space = Z.space
    n = Z.ambient_dim
    d = f_T - f0
    rho = norm(space if space.is_finite else FiniteLp(1, n), d)
    if rho == 0.0:
        raise ZeroVector("f_T == f0: the extension needs ||f_T - f0|| > 0")
    basis = [b.to_dense(n) for b in Z.basis]
    zvals = [0.0 if L_on_Z is None else pair(L_on_Z, b) for b in Z.basis]
    LfT = 0.0 if L_on_Z is None else pair(L_on_Z, f_T)
    rows = basis + [f0.to_dense(n)]
    vals = zvals + [LfT - rho**2]
    A = np.vstack(rows)
    y = np.asarray(vals)
    keep = _independent_rows(A)
    A, y = A[keep], y[keep]
    if space.p == 1.0:
        g = _min_linf_extension(A, y)
    else:
        q = space.q
        prob = InterpolationProblem(FiniteLp(q, n), tuple(DualFunctional.finite(a) for a in A), tuple(y))
        g = solve_min_norm(prob).point.to_dense(n)
    if space.is_finite:
        ext = DualFunctional.finite(g)
    else:
        ext = DualFunctional.sequence(g)
    ext_norm = dual_norm(ext, space if space.is_finite else None).value
    if ext_norm > rho + tol * max(1.0, rho):
        raise NormInflation(f"extension has norm {ext_norm:.12g} > ||f_T - f0|| = {rho:.12g}")
    return ext


def _min_linf_extension(A, y):
    """``min ||g||_inf  s.t.  A g = y``, then least l^1 mass at that level."""
    m, n = A.shape
    # g = u - v, s >= 0 ; u_i + v_i - s + w_i = 0 style: use  u_i - v_i <= s, v_i - u_i <= s
    # variables [u (n), v (n), s, slack1 (n), slack2 (n)]
    I = np.eye(n)
    top = np.hstack([A, -A, np.zeros((m, 1)), np.zeros((m, 2 * n))])
    box1 = np.hstack([I, -I, -np.ones((n, 1)), I, np.zeros((n, n))])
    box2 = np.hstack([-I, I, -np.ones((n, 1)), np.zeros((n, n)), I])
    Aeq = np.vstack([top, box1, box2])
    beq = np.concatenate([y, np.zeros(2 * n)])
    cost = np.zeros(4 * n + 1)
    cost[2 * n] = 1.0
    res = simplex(cost, Aeq, beq)
    if not res.success:
        raise SolverDiverged(f"extension LP ended with status {res.status}")
    s_star = res.x[2 * n]
    # stage 2: minimize sum(u + v) with s fixed
    Aeq2 = np.vstack([Aeq, np.concatenate([np.zeros(2 * n), [1.0], np.zeros(2 * n)])])
    beq2 = np.concatenate([beq, [s_star]])
    cost2 = np.concatenate([np.ones(2 * n), np.zeros(2 * n + 1)])
    res2 = simplex(cost2, Aeq2, beq2)
    x = res2.x if res2.success else res.x
    return x[:n] - x[n : 2 * n]


# ---------------------------------------------------------------- Tikhonov


@dataclass(frozen=True)
class ErrorSpec:
    """Data error ``E(f) = sum (L_i(f) - y_i)^2``; the only built-in kind."""

    kind: str = "squared"

    def __post_init__(self):
        if self.kind != "squared":
            raise ValueError(f"unsupported error kind {self.kind!r}")

    def value(self, residuals):
        r = np.asarray(residuals)
        return float(r @ r)


@dataclass(frozen=True)
class TikhonovConfig:
    lambdas: tuple
    error: ErrorSpec = field(default_factory=ErrorSpec)

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        if not lam or any(x <= 0 for x in lam):
            raise ValueError("lambdas must be positive")
        if any(b >= a for a, b in zip(lam, lam[1:])):
            raise ValueError("lambdas must be strictly decreasing")
        object.__setattr__(self, "lambdas", lam)


@dataclass
class TikhonovPath:
    lambdas: tuple
    results: list
    reference: PrimalVector
    distances: list
    failures: dict

    @property
    def monotone(self):
        d = [x for x in self.distances if x is not None]
        return all(b <= a + 1e-8 for a, b in zip(d, d[1:]))

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)


def _profile_poly(omega):
    """``(a, b)`` when ``h(r) = a r + b r^2`` (checked on sample radii), else ``None``."""
    rs = np.array([0.0, 0.5, 1.0, 2.0, 3.0, 7.5])
    hs = omega.profile(rs)
    if abs(hs[0]) > 1e-12:
        return None
    M = np.column_stack([rs[1:3], rs[1:3] ** 2])
    a, b = np.linalg.solve(M, hs[1:3])
    if np.allclose(a * rs + b * rs**2, hs, rtol=1e-12, atol=1e-12):
        return float(a), float(b)
    return None


def _lasso_cd(A, y, lam, a, b, x0, tol=1e-12, max_sweeps=100_000):
    n = A.shape[1]
    x = x0.copy()
    col = (A * A).sum(axis=0)
    r = y - A @ x
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(n):
            s = np.abs(x).sum() - abs(x[j])
            beta = A[:, j] @ r + col[j] * x[j]
            alpha = col[j] + lam * b
            if alpha <= 0:
                new = 0.0
            else:
                thr = lam * (a + 2 * b * s) / 2.0
                new = math.copysign(max(abs(beta) - thr, 0.0), beta) / alpha
            if new != x[j]:
                r -= A[:, j] * (new - x[j])
                delta = max(delta, abs(new - x[j]))
                x[j] = new
        if delta <= tol * max(1.0, np.abs(x).max(initial=0.0)):
            return x
    raise SolverDiverged("coordinate descent did not converge")


def _newton_tikhonov(A, y, lam, omega, space, x0, tol=1e-10, max_iter=500):
    p = space.p

    def obj(x):
        r = A @ x - y
        return float(r @ r) + lam * float(omega.profile(np.array([dense_norm(x, p)]))[0])

    def grad(x):
        r = A @ x - y
        nr = dense_norm(x, p)
        h = 1e-7 * max(1.0, nr)
        dh = (omega.profile(np.array([nr + h]))[0] - omega.profile(np.array([max(nr - h, 0.0)]))[0]) / (
            nr + h - max(nr - h, 0.0)
        )
        gn = np.zeros_like(x) if nr == 0 else np.abs(x) ** (p - 1) * np.sign(x) / nr ** (p - 1)
        return 2 * A.T @ r + lam * dh * gn

    x = x0.copy()
    n = len(x)
    for it in range(max_iter):
        g = grad(x)
        if np.abs(g).max() <= tol:
            return x
        H = np.zeros((n, n))
        e = 1e-6 * max(1.0, np.abs(x).max())
        for j in range(n):
            d = np.zeros(n)
            d[j] = e
            H[:, j] = (grad(x + d) - grad(x - d)) / (2 * e)
        H = 0.5 * (H + H.T)
        try:
            dx = -np.linalg.solve(H + 1e-12 * np.eye(n), g)
        except np.linalg.LinAlgError:
            dx = -g
        if g @ dx >= 0:
            dx = -g
        t, f0 = 1.0, obj(x)
        while t > 1e-16 and obj(x + t * dx) > f0 + 1e-4 * t * (g @ dx):
            t *= 0.5
        if t <= 1e-16:
            if np.abs(g).max() <= 1e-7:
                return x
            raise SolverDiverged(f"line search stalled at lambda = {lam:g}")
        x = x + t * dx
    raise SolverDiverged(f"Newton did not converge at lambda = {lam:g}")


def tikhonov_path(problem, config):
    """Solve ``min E(f) + lambda * Omega(f)`` along a decreasing lambda grid.

    Distances are measured to the regularized-interpolation solution
    (the ``lambda -> 0`` limit).  Failures are recorded per lambda.
    """
    space = problem.space
    if not space.is_finite:
        raise InvalidSpace("tikhonov_path needs a finite-dimensional space")
    omega = problem.regularizer
    if not omega.is_radial:
        raise NonRadialRegularizer("tikhonov_path needs a radial regularizer")
    A = problem.matrix()
    y = np.asarray(problem.targets)
    n = space.dim
    ref = solve_regularized(problem).point if np.any(y) else PrimalVector.zero()
    xref = ref.to_dense(n)
    poly = _profile_poly(omega)
    results, dists, failures = [], [], {}
    x = np.zeros(n)
    for lam in config.lambdas:
        try:
            if not np.any(y):
                x = np.zeros(n)
            elif space.p == 2.0 and poly is not None and poly[0] == 0.0 and poly[1] > 0:
                x = np.linalg.solve(A.T @ A + lam * poly[1] * np.eye(n), A.T @ y)
            elif space.p == 1.0:
                if poly is None:
                    raise SolverDiverged("l1 path supports h(r) = a r + b r^2 only")
                x = _lasso_cd(A, y, lam, poly[0], poly[1], x)
            else:
                x = _newton_tikhonov(A, y, lam, omega, space, x)
        except SolverDiverged as exc:
            failures[lam] = str(exc)
            results.append(None)
            dists.append(None)
            continue
        pt = PrimalVector.from_dense(x)
        err = config.error.value(A @ x - y)
        reg = omega.evaluate(pt, space)
        results.append(
            SolveResult(pt, err + lam * reg, float("nan"), float("nan"), norm=norm(space, pt),
                        info={"lambda": lam, "error": err, "regularizer": reg})
        )
        dists.append(float(dense_norm(x - xref, space.p)))
    return TikhonovPath(config.lambdas, results, ref, dists, failures)
