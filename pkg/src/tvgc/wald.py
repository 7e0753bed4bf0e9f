"""Wald statistics for the null that attention does not Granger-cause returns.

Both estimators work on the row-vectorised coefficient stack (equation-major,
per-equation layout as in :mod:`tvgc.var`). The homoskedastic variance is
``Omega kron (X'X)^-1``; the robust one is the White sandwich
``(I kron A) [sum_t (e_t e_t') kron (x_t x_t')] (I kron A)`` with
``A = (X'X)^-1``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from tvgc import config
from tvgc.errors import EstimationError
from tvgc.linalg import equilibrated_condition

RETURNS, ATTENTION = 0, 1


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    entries: np.ndarray
    target_equation: int = RETURNS
    source_variable: int = ATTENTION

    @property
    def lag_order(self) -> int:
        return self.entries.shape[0]

    @property
    def positions(self) -> np.ndarray:
        """0-based column of the single 1 in each row."""
        return np.argmax(self.entries, axis=1)


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    dof: int
    robust: bool
    window: tuple


def selected_columns(p, source=ATTENTION) -> np.ndarray:
    """Regressor columns (within one equation) holding lags 1..p of ``source``."""
    return 1 + 2 * np.arange(p) + source


def build_selection(p, target=RETURNS, source=ATTENTION) -> SelectionMatrix:
    """``p x 2(2p+1)`` 0/1 matrix picking lags of ``source`` in equation ``target``.

    The default tests attention -> returns; swapping the arguments gives the
    reverse direction.
    """
    if p < 1:
        raise ValueError("lag order must be at least 1")
    if {target, source} != {RETURNS, ATTENTION}:
        raise ValueError("target and source must be the two distinct variables")
    k = 2 * p + 1
    R = np.zeros((p, 2 * k))
    R[np.arange(p), target * k + selected_columns(p, source)] = 1.0
    return SelectionMatrix(R, target, source)


def _quadratic_form(v, M, what):
    cond = float(equilibrated_condition(M))
    if not cond <= config.CONDITION_LIMIT:
        raise EstimationError(f"{what} is singular or ill-conditioned (condition {cond:.3g})",
                              condition=cond)
    stat = float(v @ cho_solve(cho_factor(M), v))
    return max(stat, 0.0)


def _check(fit, R):
    if R.entries.shape != (fit.lag_order, 2 * fit.regressors.shape[1]):
        raise ValueError(
            f"selection matrix of shape {R.entries.shape} does not match VAR({fit.lag_order})"
        )


def _inverse_moment(X):
    XtX = X.T @ X
    cond = float(equilibrated_condition(XtX))
    if not cond <= config.CONDITION_LIMIT:
        raise EstimationError(f"X'X is ill-conditioned (condition {cond:.3g})", condition=cond)
    return np.linalg.inv(XtX)


def wald_homoskedastic(fit, R: SelectionMatrix) -> WaldResult:
    _check(fit, R)
    A = _inverse_moment(fit.regressors)
    v = R.entries @ fit.coefficients.ravel()
    middle = R.entries @ np.kron(fit.residual_covariance, A) @ R.entries.T
    stat = _quadratic_form(v, middle, "restriction covariance")
    return WaldResult(stat, R.lag_order, False, fit.sample_range)


def wald_robust(fit, R: SelectionMatrix) -> WaldResult:
    _check(fit, R)
    X, E = fit.regressors, fit.residuals
    A = _inverse_moment(X)
    # row t of Z is e_t kron x_t, so Z'Z = sum_t (e_t e_t') kron (x_t x_t')
    Z = (E[:, :, None] * X[:, None, :]).reshape(X.shape[0], -1)
    bread = np.kron(np.eye(2), A)
    V = bread @ (Z.T @ Z) @ bread
    v = R.entries @ fit.coefficients.ravel()
    stat = _quadratic_form(v, R.entries @ V @ R.entries.T, "robust restriction covariance")
    return WaldResult(stat, R.lag_order, True, fit.sample_range)


def wald(fit, R=None, robust=False) -> WaldResult:
    R = build_selection(fit.lag_order) if R is None else R
    return wald_robust(fit, R) if robust else wald_homoskedastic(fit, R)
