"""scikit-learn style wrappers.

Rows of ``X`` are the interpolation functionals ``L_i`` (dense, length
``n``) and ``y`` holds the targets ``L_i(f) = y_i``.  Fitting finds the
function ``f`` (``coef_``); ``predict`` applies new functionals to it.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .regularizers import RegularizerSpec
from .solvers import (
    InterpolationProblem,
    TikhonovConfig,
    attach_certificate,
    solve_min_norm,
    solve_regularized,
    tikhonov_path,
)
from .spaces import DualFunctional, FiniteLp

__all__ = ["MinNormInterpolator", "RegularizedInterpolator", "TikhonovRegressor"]


def _problem(X, y, p, omega):
    X, y = check_X_y(X, y, y_numeric=True)
    space = FiniteLp(float(p), X.shape[1])
    fs = tuple(DualFunctional.finite(row) for row in X)
    return InterpolationProblem(space, fs, tuple(y), omega)


class _InterpolatorBase(RegressorMixin, BaseEstimator):
    def _store(self, res, problem):
        self.coef_ = res.point.to_dense(problem.space.dim)
        self.n_features_in_ = problem.space.dim
        self.objective_ = res.objective
        self.result_ = res
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.coef_


class MinNormInterpolator(_InterpolatorBase):
    """Minimal ``l^p``-norm ``f`` with ``X @ f = y``.

    Parameters
    ----------
    p : float
        Exponent of the norm, ``p >= 1``.
    feas_tol : float
        Allowed constraint residual.
    """

    def __init__(self, p=2.0, feas_tol=1e-9):
        self.p = p
        self.feas_tol = feas_tol

    def fit(self, X, y):
        problem = _problem(X, y, self.p, RegularizerSpec.norm())
        res = solve_min_norm(problem, self.feas_tol)
        self.dual_coef_ = np.asarray(res.dual_coefficients)
        self.certificate_ = attach_certificate(res, problem)
        return self._store(res, problem)


class RegularizedInterpolator(_InterpolatorBase):
    """Minimizer of ``h(||f||_p)`` subject to ``X @ f = y``; ``h`` is an expression in ``r``."""

    def __init__(self, p=2.0, h="r**2", feas_tol=1e-9):
        self.p = p
        self.h = h
        self.feas_tol = feas_tol

    def fit(self, X, y):
        problem = _problem(X, y, self.p, RegularizerSpec.radial(self.h, monotone=False))
        res = solve_regularized(problem, feas_tol=self.feas_tol)
        self.certificate_ = attach_certificate(res, problem)
        return self._store(res, problem)


class TikhonovRegressor(_InterpolatorBase):
    """``min ||X f - y||^2 + alpha * h(||f||_p)``.

    For ``p = 2`` and ``h = r**2`` this is ridge regression without intercept.
    """

    def __init__(self, alpha=1.0, p=2.0, h="r**2"):
        self.alpha = alpha
        self.p = p
        self.h = h

    def fit(self, X, y):
        problem = _problem(X, y, self.p, RegularizerSpec.radial(self.h, monotone=False))
        path = tikhonov_path(problem, TikhonovConfig((float(self.alpha),)))
        if path.results[0] is None:
            raise RuntimeError(path.failures[float(self.alpha)])
        return self._store(path.results[0], problem)
