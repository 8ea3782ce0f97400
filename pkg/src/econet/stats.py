"""Dense least-squares kernel: OLS with t/F tests, VIF, condition number, Pearson.

All functions take plain arrays and return fresh objects; nothing here keeps
state, so the routines can be called from several threads at once.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc


class SingularDesignError(ValueError):
    """Raised when the design matrix is rank deficient."""


class InsufficientDataError(ValueError):
    """Raised when there are too few samples for the requested fit."""


class UndefinedStatisticError(ValueError):
    """Raised when a statistic is undefined for the given input (e.g. constant data)."""


@dataclass(frozen=True)
class OlsResult:
    coefficients: np.ndarray
    intercept: float
    residuals: np.ndarray
    fitted: np.ndarray
    r_squared: float
    t_pvalues: np.ndarray
    f_pvalue: float
    mean_relative_error: float
    dof: int

    @property
    def n_regressors(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class DesignDiagnostics:
    vif: np.ndarray
    condition_number: float


def _as_design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("design matrix must be 1-D or 2-D")
    return X


def student_t_pvalue(t, dof: int, two_sided: bool = True) -> np.ndarray:
    """Tail probability of Student's t via the regularized incomplete beta function."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        two = np.where(np.isinf(t), 0.0, betainc(0.5 * dof, 0.5, dof / (dof + t * t)))
    return np.clip(two if two_sided else 0.5 * two, 0.0, 1.0)


def f_pvalue(f: float, d1: int, d2: int) -> float:
    """Upper tail of the F(d1, d2) distribution."""
    if f <= 0:
        return 1.0
    if np.isinf(f):
        return 0.0
    return float(betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f)))


def mean_relative_error(fitted, actual) -> float:
    """Mean of ``|fitted - actual| / |actual|`` over samples with nonzero actual.

    Zero actuals are skipped with a ``RuntimeWarning``; if every actual is
    zero the result is ``nan``.
    """
    fitted = np.asarray(fitted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    nz = actual != 0
    if not nz.all():
        warnings.warn(
            "relative error undefined for zero observations; computed over nonzero entries",
            RuntimeWarning,
            stacklevel=2,
        )
    if not nz.any():
        return float("nan")
    return float(np.mean(np.abs(fitted[nz] - actual[nz]) / np.abs(actual[nz])))


def ols_fit(X, y, with_intercept: bool = True, two_sided: bool = True) -> OlsResult:
    """Ordinary least squares with per-coefficient t-tests and an overall F-test.

    Parameters
    ----------
    X : array_like, shape (n, k)
        Regressors, one column each. A 1-D array is treated as a single column.
    y : array_like, shape (n,)
        Regressand.
    with_intercept : bool
        Fit a constant term. The F-test then compares the full model with the
        intercept-only model.
    two_sided : bool
        Two-sided (default) or one-sided t-test p-values. The one-sided variant
        tests in the direction of the estimated sign.

    Returns
    -------
    OlsResult

    Raises
    ------
    InsufficientDataError
        If ``n < k + 2``.
    SingularDesignError
        If the design (including the constant column) is rank deficient.
    """
    X = _as_design(X)
    y = np.asarray(y, dtype=float).ravel()
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]} entries")
    if n < k + 2:
        raise InsufficientDataError(f"need at least {k + 2} samples for {k} regressors, got {n}")

    D = np.column_stack([X, np.ones(n)]) if with_intercept else X
    p = D.shape[1]
    if np.linalg.matrix_rank(D) < p:
        raise SingularDesignError("design matrix is rank deficient")

    beta, *_ = np.linalg.lstsq(D, y, rcond=None)
    fitted = D @ beta
    resid = y - fitted
    dof = n - p
    ssr = float(resid @ resid)

    if with_intercept:
        sst = float(np.sum((y - y.mean()) ** 2))
    else:
        sst = float(y @ y)
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)

    sigma2 = ssr / dof
    cov = sigma2 * np.linalg.inv(D.T @ D)
    se = np.sqrt(np.clip(np.diag(cov)[:k], 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstat = np.where(se > 0, beta[:k] / se, np.inf * np.sign(beta[:k]))
    tstat = np.nan_to_num(tstat, nan=0.0)
    t_p = student_t_pvalue(tstat, dof, two_sided)

    ss_model = sst - ssr
    if ssr <= 0.0:
        f_p = 0.0 if ss_model > 0 else 1.0
    else:
        fstat = (ss_model / k) / (ssr / dof)
        f_p = f_pvalue(fstat, k, dof)

    coef = beta[:k].copy()
    intercept = float(beta[k]) if with_intercept else 0.0
    return OlsResult(
        coefficients=coef,
        intercept=intercept,
        residuals=resid,
        fitted=fitted,
        r_squared=float(r2),
        t_pvalues=t_p,
        f_pvalue=float(min(max(f_p, 0.0), 1.0)),
        mean_relative_error=mean_relative_error(fitted, y),
        dof=dof,
    )


def vif(X) -> np.ndarray:
    """Variance inflation factor of every column.

    Column ``j`` is regressed (with intercept) on the remaining columns and
    ``VIF_j = 1 / (1 - R^2_j)``. Exact collinearity gives ``inf`` rather than
    an exception.
    """
    X = _as_design(X)
    n, k = X.shape
    if k < 2:
        raise ValueError("VIF needs at least two columns")
    if np.any(np.ptp(X, axis=0) == 0):
        raise UndefinedStatisticError("VIF undefined for a constant column")
    out = np.empty(k)
    for j in range(k):
        y = X[:, j]
        others = np.column_stack([np.delete(X, j, axis=1), np.ones(n)])
        coef, *_ = np.linalg.lstsq(others, y, rcond=None)
        resid = y - others @ coef
        sst = float(np.sum((y - y.mean()) ** 2))
        unexplained = float(resid @ resid) / sst
        # relative to the column's own spread; below this it is collinear up to rounding
        out[j] = np.inf if unexplained < 1e-12 else 1.0 / unexplained
    return out


def condition_number(X) -> float:
    """Largest over smallest singular value after scaling columns to unit norm."""
    X = _as_design(X)
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        raise UndefinedStatisticError("cannot normalise a zero column")
    s = np.linalg.svd(X / norms, compute_uv=False)
    if s[-1] <= s[0] * np.finfo(float).eps:
        return float("inf")
    return float(s[0] / s[-1])


def diagnostics(X) -> DesignDiagnostics:
    X = _as_design(X)
    v = vif(X) if X.shape[1] >= 2 else np.ones(X.shape[1])
    return DesignDiagnostics(vif=v, condition_number=condition_number(X))


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length series (at least 3 points)."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError("pearson needs equal-length inputs")
    if x.size < 3:
        raise InsufficientDataError("pearson needs at least 3 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(dx @ dx))
    sy = float(np.sqrt(dy @ dy))
    if sx == 0 or sy == 0:
        raise UndefinedStatisticError("correlation undefined for a constant series")
    r = float(dx @ dy) / (sx * sy)
    return min(max(r, -1.0), 1.0)
