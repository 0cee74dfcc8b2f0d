"""Closed-form tails of dual sequences.

A tail gives ``L_n`` for every index past a finite prefix.  Users supply a
single rule ``L_n = (alpha*n + beta) / (gamma*n + delta)``; linear
combinations and clamping (needed for certificate witnesses) are closed
under :class:`Tail`.  Suprema are computed exactly: candidate indices come
from the real roots of derivative / crossing polynomials and are evaluated
in rational arithmetic, so "attained vs. only approached" is never decided
by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InvalidTailRule

_KINDS = ("zero", "constant", "rational")
_TRENDS = ("increasing", "decreasing")


def _sign(x):
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class TailRule:
    """Monotone rule ``(alpha*n + beta) / (gamma*n + delta)`` for ``n >= start``.

    ``monotone`` is the declared direction; it is checked against the sign of
    ``alpha*delta - beta*gamma`` and rejected on mismatch.  Leave it ``None``
    to have it inferred.
    """

    kind: str = "zero"
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 1.0
    start: int = 1
    monotone: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidTailRule(f"unknown tail kind {self.kind!r}")
        for name in ("alpha", "beta", "gamma", "delta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidTailRule(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "start", int(self.start))
        if self.start < 1:
            raise InvalidTailRule("start must be a positive index")
        if self.kind == "zero" and (self.alpha, self.beta, self.gamma) != (0.0, 0.0, 0.0):
            raise InvalidTailRule("zero tail takes no parameters")
        if self.kind == "constant" and (self.alpha != 0.0 or self.gamma != 0.0 or self.delta != 1.0):
            raise InvalidTailRule("constant tail is parameterized by beta only")
        if self.gamma == 0.0:
            if self.delta == 0.0:
                raise InvalidTailRule("denominator gamma*n + delta is identically zero")
            if self.alpha != 0.0:
                raise InvalidTailRule("rule is unbounded (linear numerator over constant denominator)")
        else:
            den = self.gamma * self.start + self.delta
            if den == 0.0 or _sign(den) != _sign(self.gamma):
                raise InvalidTailRule(
                    f"denominator gamma*n + delta vanishes or changes sign for n >= {self.start}"
                )
        if self.monotone is not None:
            if self.monotone not in _TRENDS:
                raise InvalidTailRule(f"monotone must be one of {_TRENDS}")
            trend = self.trend
            if trend != "constant" and trend != self.monotone:
                raise InvalidTailRule(
                    f"declared {self.monotone} but alpha*delta - beta*gamma implies {trend}"
                )

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, c):
        return cls("constant", beta=c)

    @classmethod
    def rational(cls, alpha, beta, gamma, delta, start=1, monotone=None):
        return cls("rational", alpha, beta, gamma, delta, start, monotone)

    @property
    def determinant(self):
        a, b, g, d = self.exact()
        return a * d - b * g

    @property
    def trend(self):
        s = _sign(self.determinant)
        # (gamma*n + delta)^2 > 0 on the domain, so the sign of the
        # determinant is the sign of the derivative everywhere.
        return {1: "increasing", -1: "decreasing", 0: "constant"}[s]

    def exact(self):
        return (Fraction(self.alpha), Fraction(self.beta), Fraction(self.gamma), Fraction(self.delta))

    def value(self, n):
        return (self.alpha * n + self.beta) / (self.gamma * n + self.delta)

    def values(self, ns):
        ns = np.asarray(ns, dtype=float)
        return (self.alpha * ns + self.beta) / (self.gamma * ns + self.delta)

    def exact_value(self, n):
        a, b, g, d = self.exact()
        return (a * n + b) / (g * n + d)

    def exact_limit(self):
        a, b, g, d = self.exact()
        return a / g if g != 0 else b / d

    def limit(self):
        return float(self.exact_limit())

    def is_zero(self):
        return self.alpha == 0.0 and self.beta == 0.0


def _terms_limit(terms):
    return sum((Fraction(c) * r.exact_limit() for c, r in terms), Fraction(0))


def _terms_value(terms, n):
    return sum((Fraction(c) * r.exact_value(n) for c, r in terms), Fraction(0))


def _terms_values(terms, ns):
    out = np.zeros(len(ns))
    for c, r in terms:
        out += c * r.values(ns)
    return out


def _rational(terms):
    """Numerator and denominator polynomials of ``sum c * rule(n)``."""
    num = Polynomial([0.0])
    den = Polynomial([1.0])
    for c, r in terms:
        rn = Polynomial([r.beta, r.alpha])
        rd = Polynomial([r.delta, r.gamma])
        num = num * rd + c * rn * den
        den = den * rd
    return num, den


def _real_roots(poly):
    coef = np.asarray(poly.coef, dtype=float)
    scale = np.max(np.abs(coef)) if coef.size else 0.0
    if scale == 0.0:
        return []
    coef = coef.copy()
    coef[np.abs(coef) <= 1e-13 * scale] = 0.0
    poly = Polynomial(coef).trim()
    if poly.degree() < 1:
        return []
    roots = []
    for z in poly.roots():
        if abs(z.imag) <= 1e-7 * max(1.0, abs(z.real)) and math.isfinite(z.real):
            roots.append(z.real)
    return roots


def _clip(x, bound):
    return max(-bound, min(bound, x))


@dataclass(frozen=True)
class Tail:
    """``clip(sum(clamped), -bound, bound) + sum(linear)`` for indices past a prefix.

    Both sums are tuples of ``(coefficient, TailRule)`` pairs.  Ordinary
    functionals use only ``linear``; clamped tails arise when a certificate
    witness is materialized with the clamp rule.
    """

    linear: tuple = ()
    clamped: tuple = ()
    bound: float | None = None

    def __post_init__(self):
        lin = tuple((float(c), r) for c, r in self.linear if c != 0.0 and not r.is_zero())
        clm = tuple((float(c), r) for c, r in self.clamped if c != 0.0 and not r.is_zero())
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "clamped", clm)
        if clm and self.bound is None:
            raise InvalidTailRule("clamped tail needs a bound")
        if self.bound is not None:
            if self.bound < 0:
                raise InvalidTailRule("clamp bound must be nonnegative")
            object.__setattr__(self, "bound", float(self.bound))
        if not clm:
            object.__setattr__(self, "bound", None)

    @classmethod
    def from_rule(cls, rule, coef=1.0):
        return cls(linear=((coef, rule),))

    @classmethod
    def zero(cls):
        return cls()

    @property
    def is_zero(self):
        return not self.linear and not self.clamped

    @property
    def single_rule(self):
        """The underlying rule when the tail is exactly one unscaled rule."""
        if not self.clamped and len(self.linear) == 1 and self.linear[0][0] == 1.0:
            return self.linear[0][1]
        if self.is_zero:
            return TailRule.zero()
        return None

    def value(self, n):
        out = sum(c * r.value(n) for c, r in self.linear)
        if self.clamped:
            out += _clip(sum(c * r.value(n) for c, r in self.clamped), self.bound)
        return float(out)

    def values(self, ns):
        ns = np.asarray(ns, dtype=float)
        out = _terms_values(self.linear, ns)
        if self.clamped:
            out = out + np.clip(_terms_values(self.clamped, ns), -self.bound, self.bound)
        return out

    def exact_value(self, n):
        out = _terms_value(self.linear, n)
        if self.clamped:
            b = Fraction(self.bound)
            out += _clip(_terms_value(self.clamped, n), b)
        return out

    def exact_limit(self):
        out = _terms_limit(self.linear)
        if self.clamped:
            out += _clip(_terms_limit(self.clamped), Fraction(self.bound))
        return out

    def limit(self):
        return float(self.exact_limit())

    def unclamped_limit(self):
        """Limit of the clamped part before clipping (``None`` if unclamped)."""
        return float(_terms_limit(self.clamped)) if self.clamped else None

    def scaled(self, a):
        a = float(a)
        if a == 0.0:
            return Tail()
        lin = tuple((a * c, r) for c, r in self.linear)
        if not self.clamped:
            return Tail(lin)
        # a * clip(u, B) == clip(a*u, |a|*B)
        clm = tuple((a * c, r) for c, r in self.clamped)
        return Tail(lin, clm, abs(a) * self.bound)

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other):
        if not isinstance(other, Tail):
            return NotImplemented
        if self.clamped and other.clamped:
            raise NotImplementedError("sum of two clamped tails is not representable")
        clamped = self.clamped or other.clamped
        bound = self.bound if self.clamped else other.bound
        return Tail(_merge(self.linear + other.linear), clamped, bound)

    def __sub__(self, other):
        return self + (-other)

    def clamp(self, bound):
        if self.clamped:
            raise NotImplementedError("tail is already clamped")
        return Tail((), self.linear, bound)

    def sup_abs(self, start):
        """Exact ``sup_{n >= start} |value(n)|``.

        Returns ``(sup, attained, argmax)``; ``argmax`` is ``None`` when the
        supremum is only reached in the limit.
        """
        start = int(start)
        limit = abs(self.exact_limit())
        if self.is_zero:
            return 0.0, True, start
        polys = []
        num_w, den_w = _rational(self.linear)
        if self.clamped:
            num_all, den_all = _rational(self.clamped + self.linear)
            polys.append(num_all.deriv() * den_all - num_all * den_all.deriv())
            polys.append(num_w.deriv() * den_w - num_w * den_w.deriv())
            num_u, den_u = _rational(self.clamped)
            polys.append(num_u - self.bound * den_u)
            polys.append(num_u + self.bound * den_u)
        else:
            polys.append(num_w.deriv() * den_w - num_w * den_w.deriv())
        candidates = {start}
        for poly in polys:
            for x in _real_roots(poly):
                if x < start - 1:
                    continue
                lo = max(start, math.floor(x) - 1)
                hi = max(start, math.ceil(x) + 1)
                candidates.update(range(lo, hi + 1))
        best_n, best = None, Fraction(-1)
        cache = {}

        def absval(n):
            if n not in cache:
                cache[n] = abs(self.exact_value(n))
            return cache[n]

        for n in sorted(candidates):
            v = absval(n)
            if v > best:
                best_n, best = n, v
        # Guard against root-finding error: discrete ascent from the best candidate.
        for step in (1, -1):
            n = best_n
            for _ in range(64):
                nxt = n + step
                if nxt < start or absval(nxt) <= absval(n):
                    break
                n = nxt
            if absval(n) > best:
                best_n, best = n, absval(n)
        if best >= limit:
            return float(best), True, best_n
        return float(limit), False, None


def _merge(terms):
    out = {}
    order = []
    for c, r in terms:
        if r not in out:
            out[r] = 0.0
            order.append(r)
        out[r] += c
    return tuple((out[r], r) for r in order if out[r] != 0.0)
