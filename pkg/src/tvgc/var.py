"""Least-squares estimation of the bivariate VAR(p) and BIC lag selection.

Coefficient layout, fixed for the whole package: one row per equation
(returns first, attention second); within a row the intercept comes first and
then one ``[returns, attention]`` pair per lag. Windows are inclusive
observation ranges ``(start, end)``; a window of ``T_w`` observations spends
its first ``p`` on presample lags and fits ``T_w - p`` rows.
"""

from dataclasses import dataclass

import numpy as np

from tvgc import config
from tvgc.errors import EstimationError
from tvgc.linalg import as_matrix, equilibrated_condition, lag_design

IDENTIFIABILITY_MARGIN = 10


@dataclass(frozen=True)
class VarSpec:
    lag_order: int
    include_intercept: bool = True

    def __post_init__(self):
        if not 1 <= self.lag_order <= config.MAX_LAG:
            raise ValueError(f"lag order must lie in 1..{config.MAX_LAG}, got {self.lag_order}")
        if not self.include_intercept:
            raise ValueError("the VAR always carries an intercept")


@dataclass(frozen=True, eq=False)
class VarFit:
    """Estimated VAR(p) on one window.

    ``coefficients`` is ``2 x (2p+1)``; ``residuals`` and ``regressors`` have
    one row per fitted observation. ``restricted`` marks fits where the
    attention lags of the returns equation were held at zero.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    regressors: np.ndarray
    residual_covariance: np.ndarray
    sample_range: tuple
    lag_order: int
    restricted: bool = False

    @property
    def nobs(self) -> int:
        return self.residuals.shape[0]

    @property
    def responses(self) -> np.ndarray:
        return self.regressors @ self.coefficients.T + self.residuals


def _resolve_window(y, window, p):
    T = y.shape[0]
    start, end = (0, T - 1) if window is None else (int(window[0]), int(window[1]))
    if not 0 <= start <= end < T:
        raise ValueError(f"window {window} outside data of length {T}")
    length = end - start + 1
    need = 2 * p + 1 + IDENTIFIABILITY_MARGIN
    if length < need:
        raise EstimationError(f"window of {length} observations too short for VAR({p}); need {need}")
    return start, end


def _check_rank(X):
    cond = float(equilibrated_condition(X.T @ X))
    if not cond <= config.CONDITION_LIMIT:
        raise EstimationError(
            f"regressor matrix is rank deficient (equilibrated condition number {cond:.3g})",
            condition=cond,
        )


def fit(data, spec, window=None) -> VarFit:
    """Equation-by-equation OLS of the VAR on ``window`` (default: all data)."""
    if isinstance(spec, int):
        spec = VarSpec(spec)
    p = spec.lag_order
    y = as_matrix(data)
    start, end = _resolve_window(y, window, p)
    X, Y = lag_design(y, p, start + p, end)
    _check_rank(X)
    B = np.linalg.lstsq(X, Y, rcond=None)[0].T
    resid = Y - X @ B.T
    sigma = resid.T @ resid / X.shape[0]
    return VarFit(B, resid, X, sigma, (start, end), p)


def select_lag_bic(data, window=None, max_lag=config.MAX_LAG) -> int:
    """BIC lag choice over ``1..max_lag`` on a common trimmed sample.

    Every candidate is fitted to observations ``start + max_lag .. end`` so the
    criteria compare like with like; ties go to the smaller lag.
    """
    y = as_matrix(data)
    start, end = _resolve_window(y, window, max_lag)
    n = end - start + 1 - max_lag
    best_p, best = None, np.inf
    for p in range(1, max_lag + 1):
        X, Y = lag_design(y, p, start + max_lag, end)
        _check_rank(X)
        B = np.linalg.lstsq(X, Y, rcond=None)[0]
        resid = Y - X @ B
        sign, logdet = np.linalg.slogdet(resid.T @ resid / n)
        if sign <= 0:
            raise EstimationError(f"singular residual covariance at lag {p}")
        k = 2 * (2 * p + 1)
        bic = logdet + k * np.log(n) / n
        if bic < best:
            best_p, best = p, bic
    return best_p
