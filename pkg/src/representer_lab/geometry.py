"""Norm-ball geometry: kernels, exposed faces, rotundity, face minima, tangents."""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, InvalidSpace, RankDeficientConstraints, ZeroFunctional
from .spaces import DualFunctional, PrimalVector, dense_norm, dual_norm, pair

__all__ = [
    "KernelSubspace",
    "kernel_basis",
    "FaceDescriptor",
    "exposed_face",
    "Rotundity",
    "rotundity_profile",
    "FaceMinimum",
    "face_min",
    "tangent_sample",
    "functional_matrix",
]


def functional_matrix(space, functionals, truncation_dim=None):
    """Dense ``m x n`` matrix of the functionals' first ``n`` coordinates."""
    if space.is_finite:
        n = space.dim
    elif truncation_dim is None:
        raise InvalidSpace("sequence space needs a truncation dimension")
    else:
        n = int(truncation_dim)
    return np.vstack([L.dense(n) for L in functionals]), n


def _rref(M, tol):
    R = M.astype(float).copy()
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        i = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[i, c]) <= tol:
            continue
        R[[r, i]] = R[[i, r]]
        R[r] /= R[r, c]
        for k in range(rows):
            if k != r and R[k, c] != 0.0:
                R[k] -= R[k, c] * R[r]
        pivots.append(c)
        r += 1
    return R[:r], pivots


@dataclass(frozen=True)
class KernelSubspace:
    """``Z`` = common kernel of the functionals, with an explicit basis."""

    space: object
    functionals: tuple
    basis: tuple
    rank: int
    truncation_dim: int | None = None

    @property
    def ambient_dim(self):
        return self.space.dim if self.space.is_finite else self.truncation_dim

    @property
    def dim(self):
        return len(self.basis)

    def matrix(self):
        """Basis as columns of an ``n x k`` array."""
        n = self.ambient_dim
        if not self.basis:
            return np.zeros((n, 0))
        return np.column_stack([b.to_dense(n) for b in self.basis])

    def contains(self, f, tol=1e-9):
        return all(abs(pair(L, f)) <= tol for L in self.functionals)


def kernel_basis(space, functionals, truncation_dim=None, tol=1e-12):
    """Null-space basis of the functionals by elimination with partial pivoting.

    Rank deficiency triggers a :class:`RankDeficientConstraints` warning;
    the basis is returned regardless.
    """
    functionals = tuple(functionals)
    M, n = functional_matrix(space, functionals, truncation_dim)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    R, pivots = _rref(M, tol * scale)
    rank = len(pivots)
    if rank < len(functionals):
        warnings.warn(
            f"{len(functionals)} constraints have rank {rank}", RankDeficientConstraints, stacklevel=2
        )
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        b = np.zeros(n)
        b[fcol] = 1.0
        for row, pcol in enumerate(pivots):
            b[pcol] = -R[row, fcol]
        basis.append(PrimalVector.from_dense(b))
    return KernelSubspace(space, functionals, tuple(basis), rank, None if space.is_finite else n)


@dataclass(frozen=True)
class FaceDescriptor:
    """Exposed face ``{x : ||x|| <= radius, L(x) = radius * ||L||}``."""

    space: object
    exposing: DualFunctional
    radius: float
    extreme_points: tuple
    length: int

    @property
    def is_point(self):
        return len(self.extreme_points) == 1

    @property
    def support_value(self):
        return self.radius * dual_norm(self.exposing, self.space).value

    def vertices(self):
        """Extreme points as rows of a dense array."""
        return np.vstack([x.to_dense(self.length) for x in self.extreme_points])

    def point(self, weights):
        return PrimalVector.from_dense(np.asarray(weights, dtype=float) @ self.vertices())

    def random_points(self, rng, size):
        k = len(self.extreme_points)
        W = rng.dirichlet(np.ones(k), size=size) if k > 1 else np.ones((size, 1))
        return W @ self.vertices()


def exposed_face(space, L, radius=1.0, truncation=None, tol=1e-12):
    """Argmax set of ``L`` over the ball of the given radius.

    For l^1 the face is the hull of ``radius * sign(L_i) e_i`` over the
    coordinates where ``|L_i|`` equals the dual norm; for ``1 < p < inf`` it
    is the single norming point.  Sequence functionals are cut at
    ``truncation`` (default: the prefix length); a functional whose norm is
    only approached in the tail exposes the empty face and is rejected.
    """
    dn = dual_norm(L, space if space.is_finite else None)
    if dn.value == 0.0:
        raise ZeroFunctional("exposed face of the zero functional is the whole ball")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if space.is_finite:
        n = space.dim
    else:
        if not dn.attained:
            raise ZeroFunctional("functional does not attain its norm; the exposed face is empty")
        n = max(truncation or L.k, dn.witness)
    vals = L.dense(n)
    if space.p == 1.0:
        top = dn.value
        idx = np.flatnonzero(np.abs(vals) >= top - tol * top)
        pts = tuple(PrimalVector.unit(int(i) + 1, radius * math.copysign(1.0, vals[i])) for i in idx)
    else:
        q = space.q
        a = np.abs(vals) / dn.value
        x = radius * a ** (q - 1.0) * np.sign(vals)
        pts = (PrimalVector.from_dense(x),)
    return FaceDescriptor(space, L, float(radius), pts, n)


class Rotundity(enum.Enum):
    STRICTLY_CONVEX = "StrictlyConvex"
    UNIFORMLY_NON_ROTUND = "UniformlyNonRotund"


def rotundity_profile(space):
    if space.p > 1.0:
        return Rotundity.STRICTLY_CONVEX
    return Rotundity.UNIFORMLY_NON_ROTUND


@dataclass
class FaceMinimum:
    """Result of :func:`face_min`; unpacks as ``point, value``."""

    point: PrimalVector
    value: float
    weights: np.ndarray
    grid: int
    moved_cells: float

    def __iter__(self):
        yield self.point
        yield self.value


def _compositions(total, parts):
    """All weight vectors ``w / total`` with ``sum w = total``, lexicographically ascending."""
    if parts == 1:
        return np.array([[1.0]])
    bars = np.array(list(itertools.combinations(range(total + parts - 1), parts - 1)))
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), total + parts - 1)])
    return (np.diff(edges, axis=1) - 1) / total


def _first_min(values, rtol=1e-12):
    best = values.min()
    return int(np.flatnonzero(values <= best + rtol * (1.0 + abs(best)))[0])


def face_min(face, omega, grid=20, max_points=200_000, iterations=50):
    """Approximate minimizer of ``omega`` over an exposed face.

    Barycentric grid search over the extreme points (ties go to the
    lexicographically smallest weights), then pairwise mass-transfer
    refinement with step halving.
    """
    V = face.vertices()
    k = V.shape[0]
    if k == 1:
        w = np.ones(1)
        return FaceMinimum(face.extreme_points[0], float(omega.values(V, face.space)[0]), w, grid, 0.0)
    g = int(grid)
    while g > 1 and math.comb(g + k - 1, k - 1) > max_points:
        g -= 1
    W = _compositions(g, k)
    vals = omega.values(W @ V, face.space)
    i = _first_min(vals)
    w, best = W[i].copy(), float(vals[i])
    w0 = w.copy()

    pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
    step = 1.0 / g
    for _ in range(iterations):
        cands = []
        for a, b in pairs:
            s = min(step, w[a])
            if s <= 0:
                continue
            c = w.copy()
            c[a] -= s
            c[b] += s
            cands.append(c)
        if not cands or step < 1e-12:
            break
        C = np.array(cands)
        cv = omega.values(C @ V, face.space)
        j = _first_min(cv)
        if cv[j] < best - 1e-15 * (1.0 + abs(best)):
            w, best = C[j], float(cv[j])
        else:
            step /= 2.0
    moved = float(np.abs(w - w0).max() * g)
    if moved > 1.0 + 1e-9:
        warnings.warn(f"face minimum moved {moved:.2f} grid cells during refinement", GridTooCoarse, stacklevel=2)
    return FaceMinimum(PrimalVector.from_dense(w @ V), best, w, g, moved)


def tangent_sample(L, space, seed, length=None, scale=0):
    """Pseudo-random ``f_T`` with ``pair(L, f_T) == 0`` exactly.

    Nonzero coordinates are paired disjointly and each pair contributes
    ``a * (L_j e_i - L_i e_j)`` with ``a = +-2**k``; power-of-two weights make
    the two products exact negatives of each other.  Coordinates where
    ``L_i == 0`` get arbitrary values.  ``scale`` multiplies by ``2**scale``.
    """
    rng = np.random.default_rng(seed)
    if space.is_finite:
        n = space.dim
    else:
        n = length or max(L.k, 1) + int(rng.integers(1, 5))
    vals = L.dense(n)
    out = np.zeros(n)
    zero = np.flatnonzero(vals == 0.0)
    out[zero] = rng.uniform(-1.0, 1.0, size=zero.size)
    nz = rng.permutation(np.flatnonzero(vals != 0.0))
    for i, j in zip(nz[0::2], nz[1::2]):
        a = float(rng.choice([-1.0, 1.0]) * 2.0 ** int(rng.integers(-3, 2)))
        out[i] = a * vals[j]
        out[j] = -a * vals[i]
    out *= 2.0**scale
    return PrimalVector.from_dense(out)


def ball_norms(X, space):
    return dense_norm(X, space.p)
