"""Regularizers: radial profiles, custom expressions and radial mollification.

Expressions use a small arithmetic language parsed with :mod:`ast`:
``r`` is the radius in radial profiles, ``norm`` and ``x1, x2, ...`` are the
norm and coordinates in custom regularizers.  Evaluation is vectorized over
numpy arrays.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
import numpy as np
from scipy.integrate import trapezoid

from .spaces import PrimalVector, dense_norm

__all__ = [
    "Expression",
    "PiecewiseLinear",
    "Mollifier",
    "MollifiedProfile",
    "RegularizerSpec",
    "mollify_radial",
]

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: np.power,
}
_CMPOPS = {
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
}


def _step(x):
    return np.where(np.asarray(x) >= 0, 1.0, 0.0)


_FUNCS = {
    "abs": np.abs,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tanh": np.tanh,
    "sign": np.sign,
    "min": np.minimum,
    "max": np.maximum,
    "step": _step,
    "where": lambda c, a, b: np.where(np.asarray(c) != 0, a, b),
}
_CONSTS = {"pi": math.pi, "e": math.e}


class Expression:
    """Vectorized arithmetic expression over named variables.

    >>> Expression("(r - 1)**2", ["r"])(r=np.array([0.5, 1.0]))
    array([0.25, 0.  ])
    """

    def __init__(self, source, variables=("r",), coordinates=False):
        self.source = source
        self.variables = tuple(variables)
        self.coordinates = coordinates
        try:
            tree = ast.parse(source, mode="eval")
        except SyntaxError as exc:
            raise ValueError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._fn = self._compile(tree.body)
        self.max_coordinate = max(self._coords, default=0)

    def _compile(self, node):
        self._coords = getattr(self, "_coords", set())
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            v = float(node.value)
            return lambda env: v
        if isinstance(node, ast.Name):
            name = node.id
            if name in self.variables:
                return lambda env: env[name]
            if name in _CONSTS:
                v = _CONSTS[name]
                return lambda env: v
            if self.coordinates and name.startswith("x") and name[1:].isdigit() and int(name[1:]) >= 1:
                j = int(name[1:])
                self._coords.add(j)
                return lambda env: env["x"](j)
            raise ValueError(f"unknown name {name!r} in expression {self.source!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            a, b = self._compile(node.left), self._compile(node.right)
            return lambda env: op(a(env), b(env))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            a = self._compile(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: -a(env)
            return a
        if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _CMPOPS:
            op = _CMPOPS[type(node.ops[0])]
            a, b = self._compile(node.left), self._compile(node.comparators[0])
            return lambda env: op(a(env), b(env)).astype(float)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            if node.keywords:
                raise ValueError("keyword arguments are not supported")
            fn = _FUNCS[node.func.id]
            args = [self._compile(a) for a in node.args]
            return lambda env: fn(*(a(env) for a in args))
        raise ValueError(f"unsupported syntax {ast.dump(node)[:40]!r} in {self.source!r}")

    def __call__(self, **env):
        with np.errstate(all="ignore"):
            out = self._fn(env)
        return out

    def __repr__(self):
        return f"Expression({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expression) and (self.source, self.variables) == (other.source, other.variables)

    def __hash__(self):
        return hash((self.source, self.variables))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear profile through ``(radius, value)`` knots.

    A repeated radius encodes a jump; the value at the jump is the right
    value, so profiles are right-continuous.  Outside the knot range the
    profile is constant.
    """

    knots: tuple

    def __post_init__(self):
        knots = tuple((float(r), float(v)) for r, v in self.knots)
        if not knots:
            raise ValueError("piecewise profile needs at least one knot")
        rs = [r for r, _ in knots]
        if any(b < a for a, b in zip(rs, rs[1:])):
            raise ValueError("knot radii must be nondecreasing")
        for a, b, c in zip(rs, rs[1:], rs[2:]):
            if a == b == c:
                raise ValueError("at most two knots may share a radius")
        object.__setattr__(self, "knots", knots)

    @property
    def radii(self):
        return np.array([r for r, _ in self.knots])

    @property
    def heights(self):
        return np.array([v for _, v in self.knots])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        rs, vs = self.radii, self.heights
        i = np.searchsorted(rs, r, side="right")
        out = np.empty_like(r)
        left = i == 0
        right = i == len(rs)
        mid = ~(left | right)
        out[left] = vs[0]
        out[right] = vs[-1]
        j = i[mid]
        r0, r1, v0, v1 = rs[j - 1], rs[j], vs[j - 1], vs[j]
        out[mid] = v0 + (v1 - v0) * (r[mid] - r0) / (r1 - r0)
        return out if out.ndim else float(out)

    def limits(self, r):
        """``(left limit, right limit)`` at ``r``."""
        rs, vs = self.radii, self.heights
        right = float(self(r))
        hits = np.flatnonzero(rs == r)
        if len(hits) == 2:
            return float(vs[hits[0]]), right
        return float(self(np.nextafter(r, -np.inf))) if r > rs[0] else right, right

    def jumps(self):
        return [(r0, v0, v1) for (r0, v0), (r1, v1) in zip(self.knots, self.knots[1:]) if r0 == r1]

    def is_nondecreasing(self):
        vs = self.heights
        return bool(np.all(np.diff(vs) >= 0))

    def antiderivative(self, x):
        """``integral_0^x h(s) ds`` (exact, vectorized, ``x >= 0``)."""
        x = np.asarray(x, dtype=float)
        rs, vs = self.radii, self.heights
        if rs[0] > 0:
            rs = np.concatenate([[0.0], rs])
            vs = np.concatenate([[vs[0]], vs])
        seg = np.diff(rs) * (vs[:-1] + vs[1:]) / 2.0
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        i = np.searchsorted(rs, x, side="right")
        out = np.empty_like(x)
        past = i == len(rs)
        out[past] = cum[-1] + vs[-1] * (x[past] - rs[-1])
        inside = ~past
        j = np.maximum(i[inside] - 1, 0)
        r0 = rs[j]
        v0 = vs[j]
        nxt = np.minimum(j + 1, len(rs) - 1)
        r1, v1 = rs[nxt], vs[nxt]
        width = np.where(r1 > r0, r1 - r0, 1.0)
        slope = np.where(r1 > r0, (v1 - v0) / width, 0.0)
        dx = x[inside] - r0
        out[inside] = cum[j] + v0 * dx + 0.5 * slope * dx * dx
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class Mollifier:
    """Piecewise-constant density on ``[-1, 0]`` given by bin weights.

    ``weights[k]`` is the mass of the k-th of ``len(weights)`` equal bins
    (left to right); the weights must be nonnegative and sum to one.
    ``points`` is the number of trapezoid nodes per bin for profiles without
    a closed-form antiderivative.
    """

    weights: tuple = (1.0,)
    points: int = 257

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not w or any(x < 0 for x in w):
            raise ValueError("mollifier weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"mollifier weights sum to {math.fsum(w)}, not 1")
        if int(self.points) < 2:
            raise ValueError("need at least two quadrature points")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", int(self.points))

    @classmethod
    def uniform(cls, points=257):
        return cls((1.0,), points)

    @classmethod
    def point_mass(cls, bins=10_000, points=3):
        """Limit table approximating the point mass at ``t = 0``."""
        w = [0.0] * bins
        w[-1] = 1.0
        return cls(tuple(w), points)

    @property
    def edges(self):
        return np.linspace(-1.0, 0.0, len(self.weights) + 1)

    def nodes(self):
        """Trapezoid nodes ``t`` and weights (density already folded in)."""
        ts, ws = [], []
        edges = self.edges
        for k, mass in enumerate(self.weights):
            if mass == 0.0:
                continue
            t = np.linspace(edges[k], edges[k + 1], self.points)
            tw = np.full(self.points, 1.0 / (self.points - 1))
            tw[0] = tw[-1] = 0.5 / (self.points - 1)
            ts.append(t)
            ws.append(mass * tw)
        return np.concatenate(ts), np.concatenate(ws)


@dataclass(frozen=True)
class MollifiedProfile:
    """``h~(r) = integral_{-1}^0 rho(t) h(r - t) dt`` for a radial profile ``h``."""

    base: object
    mollifier: Mollifier
    breakpoints: tuple = ()

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        if isinstance(self.base, PiecewiseLinear):
            edges = self.mollifier.edges
            width = edges[1] - edges[0]
            out = np.zeros_like(r)
            for k, mass in enumerate(self.mollifier.weights):
                if mass == 0.0:
                    continue
                a, b = edges[k], edges[k + 1]
                hi = self.base.antiderivative(r - a)
                lo = self.base.antiderivative(r - b)
                out += mass * (hi - lo) / width
        elif self.breakpoints:
            out = np.array([self._split_quadrature(x) for x in r])
        else:
            t, w = self.mollifier.nodes()
            vals = _profile_values(self.base, r[:, None] - t[None, :])
            out = vals @ w
        return float(out[0]) if scalar else out

    def _split_quadrature(self, r):
        # Jumps of h at radius b sit at t = r - b; integrate each piece
        # separately with one-sided endpoint values.
        edges = self.mollifier.edges
        width = edges[1] - edges[0]
        cuts = [r - b for b in self.breakpoints]
        total = 0.0
        for k, mass in enumerate(self.mollifier.weights):
            if mass == 0.0:
                continue
            a, b = edges[k], edges[k + 1]
            pts = sorted({a, b, *(c for c in cuts if a < c < b)})
            for lo, hi in zip(pts, pts[1:]):
                t = np.linspace(lo, hi, self.mollifier.points)
                # a one-ulp nudge is lost when forming r - t
                nudge = 1e-10 * (hi - lo)
                t[0] += nudge
                t[-1] -= nudge
                vals = _profile_values(self.base, r - t)
                total += mass / width * trapezoid(vals, t)
        return total


def _profile_values(h, r):
    if isinstance(h, Expression):
        out = np.broadcast_to(h(r=r), np.shape(r)).astype(float)
    else:
        out = np.asarray(h(r), dtype=float)
        if out.shape != np.shape(r):
            out = np.vectorize(lambda x: float(h(x)))(r)
    return out


_VARIANTS = ("radial_monotone", "radial_general", "custom")


@dataclass(frozen=True)
class RegularizerSpec:
    """A regularizer ``Omega`` on a sequence space.

    Radial variants are ``Omega(f) = h(||f||)``; ``custom`` regularizers are
    an :class:`Expression` over ``norm`` and coordinates ``x1, x2, ...`` or a
    Python callable ``fn(X, norms) -> values`` acting on dense rows.
    """

    variant: str
    h: object = None
    expression: object = None
    mollifier: Mollifier | None = None
    breakpoints: tuple = ()
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown regularizer variant {self.variant!r}")
        if self.variant == "custom":
            if self.expression is None:
                raise ValueError("custom regularizer needs an expression")
            if isinstance(self.expression, str):
                object.__setattr__(self, "expression", Expression(self.expression, ("norm",), coordinates=True))
        else:
            if self.h is None:
                raise ValueError("radial regularizer needs a profile h")
            object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
            if isinstance(self.h, str):
                object.__setattr__(self, "h", Expression(self.h, ("r",)))
            elif isinstance(self.h, (list, tuple)):
                object.__setattr__(self, "h", PiecewiseLinear(tuple(self.h)))
            if self.variant == "radial_monotone" and isinstance(self.h, PiecewiseLinear):
                if not self.h.is_nondecreasing():
                    raise ValueError("radial_monotone profile table is not nondecreasing")

    @classmethod
    def norm(cls):
        return cls("radial_monotone", h="r", label="norm")

    @classmethod
    def norm_squared(cls):
        return cls("radial_monotone", h="r**2", label="norm^2")

    @classmethod
    def radial(cls, h, monotone=True, mollifier=None, breakpoints=()):
        """``h(||f||)``; ``breakpoints`` lists jump radii of an expression profile."""
        variant = "radial_monotone" if monotone else "radial_general"
        return cls(variant, h=h, mollifier=mollifier, breakpoints=tuple(breakpoints))

    @classmethod
    def custom(cls, expression, mollifier=None):
        return cls("custom", expression=expression, mollifier=mollifier)

    @property
    def is_radial(self):
        return self.variant != "custom"

    def profile(self, r):
        """Radial profile ``h(r)``; vectorized."""
        if not self.is_radial:
            raise TypeError("custom regularizer has no radial profile")
        return _profile_values(self.h, np.asarray(r, dtype=float))

    def values(self, X, space):
        """Values on the rows of a dense array ``X`` (shape ``(k, n)``)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        norms = dense_norm(X, space.p)
        if self.is_radial:
            out = self.profile(norms)
        elif isinstance(self.expression, Expression):
            n = X.shape[1]

            def coord(j):
                return X[:, j - 1] if j <= n else np.zeros(X.shape[0])

            out = np.broadcast_to(self.expression(norm=norms, x=coord), (X.shape[0],)).astype(float)
        else:
            out = np.asarray(self.expression(X, norms), dtype=float)
        out = np.asarray(out, dtype=float).reshape(X.shape[0])
        if not np.all(np.isfinite(out)):
            raise ValueError(f"regularizer {self.describe()} is not finite on the sampled points")
        return out

    def evaluate(self, f, space):
        if isinstance(f, PrimalVector):
            n = space.dim if space.is_finite else max(f.max_index, self.min_length)
            x = f.to_dense(n)
        else:
            x = np.asarray(f, dtype=float)
        return float(self.values(x[None, :], space)[0])

    @property
    def min_length(self):
        if self.variant == "custom" and isinstance(self.expression, Expression):
            return max(1, self.expression.max_coordinate)
        return 1

    def mollified(self, mollifier=None):
        """The radially mollified regularizer as a new :class:`RegularizerSpec`."""
        m = mollifier or self.mollifier or Mollifier.uniform()
        if self.is_radial:
            return RegularizerSpec(
                self.variant,
                h=MollifiedProfile(self.h, m, tuple(self.breakpoints)),
                label=f"mollified({self.describe()})",
            )
        return _MollifiedCustom(self, m)

    def describe(self):
        if self.label:
            return self.label
        if self.is_radial:
            src = self.h.source if isinstance(self.h, Expression) else repr(self.h)
            return f"h(norm) with h={src}"
        src = self.expression.source if isinstance(self.expression, Expression) else "callable"
        return f"custom({src})"


class _MollifiedCustom(RegularizerSpec):
    """Radial mollification of a non-radial regularizer, evaluated by quadrature."""

    def __init__(self, base, mollifier):
        object.__setattr__(self, "variant", "custom")
        object.__setattr__(self, "h", None)
        object.__setattr__(self, "expression", base.expression)
        object.__setattr__(self, "mollifier", mollifier)
        object.__setattr__(self, "label", f"mollified({base.describe()})")
        object.__setattr__(self, "base", base)

    def values(self, X, space):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r = dense_norm(X, space.p)
        U = np.zeros_like(X)
        U[:, 0] = 1.0
        nz = r > 0
        U[nz] = X[nz] / r[nz, None]
        t, w = self.mollifier.nodes()
        pts = (r[:, None] - t[None, :])[:, :, None] * U[:, None, :]
        vals = self.base.values(pts.reshape(-1, X.shape[1]), space).reshape(X.shape[0], t.size)
        return vals @ w


def _mollify_dense(omega, x, space, mollifier):
    r = float(dense_norm(x, space.p))
    if r == 0.0:
        u = np.zeros(max(len(x), 1))
        u[0] = 1.0
    else:
        u = x / r
    if omega.is_radial:
        return float(MollifiedProfile(omega.h, mollifier, tuple(omega.breakpoints))(r))
    t, w = mollifier.nodes()
    pts = (r - t)[:, None] * u[None, :]
    return float(omega.values(pts, space) @ w)


def mollify_radial(omega, f, space, mollifier=None):
    """``integral_{-1}^0 rho(t) Omega((||f|| - t) f / ||f||) dt``.

    At ``f = 0`` the direction is fixed to ``e_1``.
    """
    m = mollifier or omega.mollifier
    if m is None:
        raise ValueError("no mollifier configured")
    if isinstance(f, PrimalVector):
        n = space.dim if space.is_finite else max(f.max_index, omega.min_length, 1)
        x = f.to_dense(n)
    else:
        x = np.asarray(f, dtype=float)
    return _mollify_dense(omega, x, space, m)
