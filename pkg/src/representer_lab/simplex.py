"""Dense two-phase simplex for ``min c@x  s.t.  A@x = b, x >= 0``.

Pricing is Bland's rule by default, which cannot cycle.  ``pricing="dantzig"``
uses the most negative reduced cost and falls back to Bland after a run of
degenerate pivots; it is much faster on the long truncated sequence LPs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "simplex"]


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None = None
    fun: float = float("nan")
    dual: np.ndarray | None = None
    basis: tuple = ()
    iterations: int = 0

    @property
    def success(self):
        return self.status == "optimal"


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    piv = T[row]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, piv)
    basis[row] = col


def _run(T, basis, ncols, pricing, tol, max_iter, it0=0):
    """Iterate on tableau ``T`` whose last row holds reduced costs and -objective."""
    m = T.shape[0] - 1
    it = it0
    degenerate_run = 0
    use_bland = pricing == "bland"
    while True:
        if it >= max_iter:
            return "iteration_limit", it
        rc = T[-1, :ncols]
        neg = np.flatnonzero(rc < -tol)
        if neg.size == 0:
            return "optimal", it
        col = int(neg[0]) if use_bland else int(neg[np.argmin(rc[neg])])
        colv = T[:m, col]
        pos = np.flatnonzero(colv > tol)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / colv[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * max(1.0, abs(best))]
        # smallest basic index among ties keeps Bland's guarantee
        row = int(min(ties, key=lambda i: basis[i]))
        if best <= tol:
            degenerate_run += 1
            if degenerate_run > 20:
                use_bland = True
        else:
            degenerate_run = 0
            use_bland = pricing == "bland"
        _pivot(T, basis, row, col)
        it += 1


def simplex(c, A_eq, b_eq, pricing="bland", tol=1e-11, max_iter=100_000):
    """Solve the standard-form LP.

    Returns an :class:`LPResult`; ``dual`` is ``y`` with ``A.T @ y <= c`` and
    ``b @ y == fun`` at an optimum.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A_eq, dtype=float)).copy()
    b = np.asarray(b_eq, dtype=float).ravel().copy()
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign
    scale = max(1.0, np.abs(A).max(initial=0.0), np.abs(b).max(initial=0.0))
    ptol = tol * scale

    # phase 1: artificial identity block
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, it = _run(T, basis, n + m, pricing, ptol, max_iter)
    if status == "iteration_limit":
        return LPResult(status, iterations=it)
    if -T[-1, -1] > 1e-9 * scale:
        return LPResult("infeasible", iterations=it)

    # drive remaining artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            cand = np.flatnonzero(np.abs(T[i, :n]) > ptol)
            if cand.size:
                _pivot(T, basis, i, int(cand[0]))
                keep.append(i)
        else:
            keep.append(i)
    rows = keep + [m]
    T = np.delete(T[rows], np.s_[n : n + m], axis=1)
    basis = [basis[i] for i in keep]

    # phase 2 reduced costs
    cb = c[basis]
    T[-1, :n] = c - cb @ T[:-1, :n]
    T[-1, -1] = -cb @ T[:-1, -1]
    ctol = tol * max(1.0, np.abs(c).max(initial=0.0))
    status, it = _run(T, basis, n, pricing, ctol, max_iter, it)
    if status != "optimal":
        return LPResult(status, iterations=it, basis=tuple(basis))

    # recompute the basic solution and duals from the original data
    B = A[keep][:, basis]
    xb = np.linalg.solve(B, b[keep])
    x = np.zeros(n)
    x[basis] = xb
    x[np.abs(x) < 1e-12 * scale] = 0.0
    x = np.maximum(x, 0.0)
    y_keep = np.linalg.solve(B.T, c[basis])
    y = np.zeros(m)
    y[keep] = y_keep
    y *= sign
    return LPResult("optimal", x, float(c @ x), y, tuple(basis), it)
