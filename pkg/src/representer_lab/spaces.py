"""Concrete Banach sequence spaces: vectors, dual functionals, duality mappings.

Two kinds of space are modelled:

* ``FiniteLp(p, dim)`` -- the finite-dimensional space l^p_dim, ``1 <= p < inf``,
  with dual l^q_dim, ``1/p + 1/q = 1``;
* ``SequenceL1`` -- infinite-dimensional l^1 with dual l^inf.

Primal vectors are finitely supported (a dense subset of l^1 that is closed
under everything the solvers produce), so pairings are exact finite sums.
Dual functionals are a finite prefix followed by a closed-form monotone tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import IndexOutOfRange, InvalidSpace
from .tails import Tail, TailRule

__all__ = [
    "SpaceSpec",
    "FiniteLp",
    "SequenceL1",
    "combine",
    "PrimalVector",
    "DualFunctional",
    "DualitySetDescriptor",
    "DualNorm",
    "norm",
    "dual_norm",
    "pair",
    "duality_map",
    "in_duality_set",
    "sample_member",
    "directional_derivative",
    "conjugate_exponent",
]

DEFAULT_TOL = 1e-9


def conjugate_exponent(p):
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    p: float = 1.0
    dim: int | None = None

    def __post_init__(self):
        if self.kind == "finite_lp":
            if not (isinstance(self.p, (int, float)) and math.isfinite(self.p) and self.p >= 1):
                raise InvalidSpace(f"p must be a finite real >= 1, got {self.p!r}")
            if self.dim is None or int(self.dim) != self.dim or self.dim < 1:
                raise InvalidSpace(f"dim must be a positive integer, got {self.dim!r}")
            object.__setattr__(self, "p", float(self.p))
            object.__setattr__(self, "dim", int(self.dim))
        elif self.kind == "sequence_l1":
            if self.p != 1 or self.dim is not None:
                raise InvalidSpace("sequence_l1 has p = 1 and no dimension")
            object.__setattr__(self, "p", 1.0)
        else:
            raise InvalidSpace(f"unknown space kind {self.kind!r}")

    @classmethod
    def finite_lp(cls, p, dim):
        return cls("finite_lp", p, dim)

    @classmethod
    def sequence_l1(cls):
        return cls("sequence_l1")

    @property
    def is_finite(self):
        return self.kind == "finite_lp"

    @property
    def q(self):
        return conjugate_exponent(self.p)

    @property
    def is_l1(self):
        return self.p == 1.0

    def __str__(self):
        if self.is_finite:
            return f"l^{self.p:g}_{self.dim}"
        return "l^1"


def FiniteLp(p, dim):
    return SpaceSpec.finite_lp(p, dim)


def SequenceL1():
    return SpaceSpec.sequence_l1()


@dataclass(frozen=True)
class PrimalVector:
    """Finitely supported vector with 1-based, strictly increasing indices."""

    indices: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values differ in length")
        pairs = sorted(
            (int(i), float(v)) for i, v in zip(self.indices, self.values) if float(v) != 0.0
        )
        idx = tuple(i for i, _ in pairs)
        if any(i < 1 for i in idx):
            raise IndexOutOfRange("indices are 1-based")
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices")
        if any(not math.isfinite(v) for _, v in pairs):
            raise ValueError("values must be finite")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", tuple(v for _, v in pairs))

    @classmethod
    def from_dense(cls, x):
        x = np.asarray(x, dtype=float).ravel()
        nz = np.flatnonzero(x)
        return cls(tuple(int(i) + 1 for i in nz), tuple(float(x[i]) for i in nz))

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d.keys()), tuple(d.values()))

    @classmethod
    def unit(cls, index, scale=1.0):
        return cls((index,), (scale,))

    @classmethod
    def zero(cls):
        return cls()

    def to_dense(self, n=None):
        n = self.max_index if n is None else n
        if self.indices and self.indices[-1] > n:
            raise IndexOutOfRange(f"index {self.indices[-1]} exceeds length {n}")
        out = np.zeros(n)
        for i, v in zip(self.indices, self.values):
            out[i - 1] = v
        return out

    def items(self):
        return zip(self.indices, self.values)

    def at(self, i):
        d = dict(self.items())
        return d.get(i, 0.0)

    @property
    def max_index(self):
        return self.indices[-1] if self.indices else 0

    @property
    def is_zero(self):
        return not self.indices

    def _combine(self, other, a, b):
        d = {}
        for i, v in self.items():
            d[i] = a * v
        for i, v in other.items():
            d[i] = d.get(i, 0.0) + b * v
        return PrimalVector.from_dict(d)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, a):
        return PrimalVector(self.indices, tuple(a * v for v in self.values))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _check_vector(space, f):
    if space.is_finite and f.max_index > space.dim:
        raise IndexOutOfRange(f"index {f.max_index} out of range for {space}")


@dataclass(frozen=True)
class DualFunctional:
    """Finite prefix ``L_1..L_k`` followed by a closed-form tail.

    Finite-dimensional functionals have ``tail=None`` and a prefix of length
    ``dim``.  Sequence functionals always carry a :class:`Tail` (possibly zero).
    """

    prefix: tuple = ()
    tail: Tail | None = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.prefix)
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("prefix values must be finite")
        object.__setattr__(self, "prefix", vals)
        if isinstance(self.tail, TailRule):
            object.__setattr__(self, "tail", Tail.from_rule(self.tail))
        if self.tail is not None:
            rule_starts = [r.start for _, r in self.tail.linear + self.tail.clamped]
            if rule_starts and max(rule_starts) > len(vals) + 1:
                raise ValueError("tail rule must hold from the first index after the prefix")

    @classmethod
    def finite(cls, values):
        return cls(tuple(np.asarray(values, dtype=float).ravel()), None)

    @classmethod
    def sequence(cls, prefix=(), rule=None):
        tail = Tail.zero() if rule is None else (rule if isinstance(rule, Tail) else Tail.from_rule(rule))
        return cls(tuple(prefix), tail)

    @classmethod
    def coordinate(cls, index, space, value=1.0):
        if space.is_finite:
            v = np.zeros(space.dim)
            v[index - 1] = value
            return cls.finite(v)
        p = [0.0] * index
        p[index - 1] = value
        return cls.sequence(p)

    @property
    def is_finite(self):
        return self.tail is None

    @property
    def k(self):
        return len(self.prefix)

    def at(self, n):
        if n < 1:
            raise IndexOutOfRange("indices are 1-based")
        if n <= self.k:
            return self.prefix[n - 1]
        if self.tail is None:
            raise IndexOutOfRange(f"index {n} beyond finite functional of length {self.k}")
        return self.tail.value(n)

    def exact_at(self, n):
        from fractions import Fraction

        if n <= self.k:
            return Fraction(self.prefix[n - 1])
        return self.tail.exact_value(n)

    def values_at(self, indices):
        idx = np.asarray(indices, dtype=int)
        out = np.empty(len(idx))
        inside = idx <= self.k
        pre = np.asarray(self.prefix, dtype=float)
        out[inside] = pre[idx[inside] - 1]
        if np.any(~inside):
            if self.tail is None:
                raise IndexOutOfRange("index beyond finite functional")
            out[~inside] = self.tail.values(idx[~inside])
        return out

    def dense(self, n):
        if self.tail is None and n > self.k:
            raise IndexOutOfRange(f"length {n} exceeds finite functional of length {self.k}")
        return self.values_at(np.arange(1, n + 1))

    def sup_abs(self, start=1, exclude=()):
        """Exact ``sup |L_n|`` over ``n >= start`` with ``n`` not in ``exclude``.

        Returns ``(value, attained, witness_index)``.
        """
        exclude = set(exclude)
        top = max([self.k] + [i for i in exclude])
        best, best_i = -1.0, None
        if top >= start:
            idx = np.array([i for i in range(start, top + 1) if i not in exclude], dtype=int)
            if idx.size:
                vals = np.abs(self.values_at(idx))
                j = int(np.argmax(vals))
                best, best_i = float(vals[j]), int(idx[j])
        if self.tail is None:
            if best_i is None:
                return 0.0, True, None
            return best, True, best_i
        tail_start = max(start, top + 1)
        tsup, tatt, targ = self.tail.sup_abs(tail_start)
        if best_i is not None and best >= tsup:
            return best, True, best_i
        return tsup, tatt, targ

    def limit(self):
        return 0.0 if self.tail is None else self.tail.limit()

    def _binary(self, other, a, b):
        if self.is_finite != other.is_finite:
            raise InvalidSpace("cannot combine finite and sequence functionals")
        k = max(self.k, other.k)
        if self.is_finite:
            if self.k != other.k:
                raise InvalidSpace("finite functionals of different dimension")
            return DualFunctional.finite(a * np.asarray(self.prefix) + b * np.asarray(other.prefix))
        pre = a * self.dense(k) + b * other.dense(k) if k else []
        return DualFunctional(tuple(pre), self.tail.scaled(a) + other.tail.scaled(b))

    def __add__(self, other):
        return self._binary(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._binary(other, 1.0, -1.0)

    def __mul__(self, a):
        a = float(a)
        tail = None if self.tail is None else self.tail.scaled(a)
        return DualFunctional(tuple(a * v for v in self.prefix), tail)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def with_prefix_length(self, k):
        """Same functional with the prefix extended to at least ``k`` entries."""
        if self.tail is None or k <= self.k:
            return self
        return DualFunctional(tuple(self.dense(k)), self.tail)


def combine(coefficients, functionals):
    """``sum c_i * L_i`` as a :class:`DualFunctional`."""
    functionals = list(functionals)
    if not functionals:
        raise ValueError("need at least one functional")
    out = functionals[0] * coefficients[0]
    for c, L in zip(coefficients[1:], functionals[1:]):
        out = out + L * c
    return out


def _check_functional(space, L):
    if space.is_finite:
        if not L.is_finite or L.k != space.dim:
            raise InvalidSpace(f"functional of length {L.k} is not in the dual of {space}")
    elif L.is_finite:
        raise InvalidSpace("sequence space needs functionals with a tail")


class DualNorm(NamedTuple):
    value: float
    attained: bool
    witness: int | None


def norm(space, f):
    """``(sum |f_i|^p)^(1/p)`` over the finite support of ``f``."""
    _check_vector(space, f)
    if f.is_zero:
        return 0.0
    if space.p == 1.0:
        return math.fsum(abs(v) for v in f.values)
    a = np.abs(np.asarray(f.values))
    if space.p == 2.0:
        return float(math.hypot(*a))
    scale = a.max()
    return float(scale * np.sum((a / scale) ** space.p) ** (1.0 / space.p))


def dense_norm(x, p):
    """Norm of a dense array (rows along the last axis)."""
    a = np.abs(np.asarray(x, dtype=float))
    if p == 1:
        return a.sum(axis=-1)
    if math.isinf(p):
        return a.max(axis=-1) if a.shape[-1] else np.zeros(a.shape[:-1])
    # scale by the largest entry so tiny and huge vectors neither under- nor overflow
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return (safe[..., 0] * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)) * (scale[..., 0] > 0)


def dual_norm(L, space=None):
    """Dual norm of ``L`` with attainment information.

    Without a space (or for l^1-type spaces) this is the l^inf norm: the
    supremum over prefix and tail, attained iff some finite index reaches it.
    For ``FiniteLp(p)`` with ``p > 1`` it is the l^q norm, always attained.
    """
    if space is not None:
        _check_functional(space, L)
        if space.p > 1.0:
            return DualNorm(float(dense_norm(L.prefix, space.q)), True, None)
    value, attained, witness = L.sup_abs()
    return DualNorm(value, attained, witness if attained else None)


def pair(L, f):
    """Exact finite sum ``sum_i L_i f_i`` over the support of ``f``."""
    if f.is_zero:
        return 0.0
    vals = L.values_at(f.indices)
    return math.fsum(float(a) * b for a, b in zip(vals, f.values))


@dataclass(frozen=True)
class DualitySetDescriptor:
    """Finite description of ``J(f)``.

    Members fix the listed coordinates and are bounded by ``box_bound`` in
    absolute value everywhere else (tail included).
    """

    space: SpaceSpec
    radius: float
    fixed: tuple = ()
    box_bound: float = 0.0
    smooth_point: DualFunctional | None = field(default=None, compare=False)

    @property
    def is_zero(self):
        return self.radius == 0.0

    @property
    def is_singleton(self):
        return self.smooth_point is not None

    @property
    def fixed_indices(self):
        return tuple(i for i, _ in self.fixed)

    def scaled(self, a):
        """Descriptor of ``J(a f)`` for ``a > 0`` given this one is ``J(f)``."""
        if a <= 0:
            raise ValueError("positive homogeneity needs a > 0")
        sp = None if self.smooth_point is None else self.smooth_point * a
        return DualitySetDescriptor(
            self.space, a * self.radius, tuple((i, a * v) for i, v in self.fixed), a * self.box_bound, sp
        )


def duality_map(space, f):
    """Exact descriptor of the duality mapping ``J(f)``.

    ``J(0) = {0}`` is returned as a zero-radius descriptor rather than an
    error so certificates for the trivial problem go through the same path.
    """
    _check_vector(space, f)
    r = norm(space, f)
    if r == 0.0:
        if space.is_finite:
            return DualitySetDescriptor(
                space, 0.0, tuple((i, 0.0) for i in range(1, space.dim + 1)), 0.0,
                DualFunctional.finite(np.zeros(space.dim)),
            )
        return DualitySetDescriptor(space, 0.0, (), 0.0, None)
    if space.p == 1.0:
        fixed = tuple((i, math.copysign(r, v)) for i, v in f.items())
        smooth = None
        if space.is_finite and len(fixed) == space.dim:
            smooth = DualFunctional.finite([v for _, v in fixed])
        return DualitySetDescriptor(space, r, fixed, r, smooth)
    x = f.to_dense(space.dim)
    p = space.p
    g = r * (np.abs(x) / r) ** (p - 1.0) * np.sign(x)
    L = DualFunctional.finite(g)
    return DualitySetDescriptor(space, r, tuple((i + 1, float(v)) for i, v in enumerate(g)), 0.0, L)


def in_duality_set(desc, L, tol=DEFAULT_TOL):
    space = desc.space
    try:
        _check_functional(space, L)
    except InvalidSpace:
        return False
    for i, v in desc.fixed:
        if abs(L.at(i) - v) > tol:
            return False
    fixed = desc.fixed_indices
    if space.is_finite and len(fixed) == space.dim:
        return True
    sup, _, _ = L.sup_abs(exclude=fixed)
    return sup <= desc.box_bound + tol


def sample_member(desc, rng, prefix_length=None):
    """Random member of ``J(f)``: fixed coordinates plus uniform box values.

    For sequence spaces the free prefix runs to ``prefix_length`` (default:
    a few past the largest fixed index) and the tail is a random constant.
    """
    if desc.is_singleton:
        return desc.smooth_point
    B = desc.box_bound
    fixed = dict(desc.fixed)
    if desc.space.is_finite:
        n = desc.space.dim
        vals = rng.uniform(-B, B, size=n)
        for i, v in fixed.items():
            vals[i - 1] = v
        return DualFunctional.finite(vals)
    top = max(fixed) if fixed else 0
    n = prefix_length if prefix_length is not None else top + int(rng.integers(1, 6))
    vals = rng.uniform(-B, B, size=n)
    for i, v in fixed.items():
        vals[i - 1] = v
    return DualFunctional.sequence(vals, TailRule.constant(float(rng.uniform(-B, B))))


def directional_derivative(space, x, h):
    """One-sided derivative of ``g -> ||g||^2 / 2`` at ``x`` in direction ``h``.

    Equals the support function of ``J(x)`` at ``h``:
    ``max {L(h) : L in J(x)}``.
    """
    r = norm(space, x)
    if r == 0.0:
        return 0.0
    if space.p == 1.0:
        xs = dict(x.items())
        total = math.fsum(
            math.copysign(1.0, xs[i]) * v if i in xs else abs(v) for i, v in h.items()
        )
        return r * total
    desc = duality_map(space, x)
    return pair(desc.smooth_point, h)
