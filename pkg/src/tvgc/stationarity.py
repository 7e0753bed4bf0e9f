"""ADF and Phillips-Perron unit-root tests, constant-only case.

Both report the t-type statistic and a coarse p-value band read off the
Dickey-Fuller constant-case critical values rather than an interpolated
p-value.
"""

import math
from dataclasses import dataclass

import numpy as np

from tvgc.errors import DataError

MIN_LENGTH = 25

# Dickey-Fuller critical values, constant, no trend (asymptotic).
CRITICAL_VALUES = ((0.01, -3.43), (0.05, -2.86), (0.10, -2.57))
BANDS = ("below 1%", "1-5%", "5-10%", "above 10%")


@dataclass(frozen=True)
class UnitRootResult:
    test: str
    statistic: float
    p_value_band: str
    lags_or_bandwidth: int
    nobs: int
    deterministic_terms: str = "constant"

    @property
    def stationary(self) -> bool:
        return self.p_value_band == "below 1%"


def band(statistic: float) -> str:
    for name, (_, cv) in zip(BANDS, CRITICAL_VALUES):
        if statistic < cv:
            return name
    return BANDS[-1]


def _series(series):
    y = np.asarray(series, dtype=float).ravel()
    if y.size < MIN_LENGTH:
        raise DataError(f"unit-root tests need at least {MIN_LENGTH} observations, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise DataError("series contains non-finite values")
    return y


def _noise_free(y) -> bool:
    """A series that follows its own recurrence to rounding error has no
    residual variance to studentise with; the t-ratio is then undefined."""
    dy = np.diff(y)
    X = np.column_stack([np.ones(dy.size), y[:-1]])
    beta, *_ = np.linalg.lstsq(X, dy, rcond=None)
    resid = dy - X @ beta
    scale = max(np.abs(y).max(), 1.0)
    return float(np.abs(resid).max()) <= 1e-9 * scale


def _ols(X, v):
    beta, *_ = np.linalg.lstsq(X, v, rcond=None)
    resid = v - X @ beta
    return beta, resid


def default_max_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _adf_design(y, lags, first):
    """Rows for ``t = first .. n-1`` of ``dy[t] ~ 1, y[t], dy[t-1..t-lags]``."""
    dy = np.diff(y)
    rows = np.arange(first, dy.size)
    cols = [np.ones(rows.size), y[rows]]
    cols += [dy[rows - i] for i in range(1, lags + 1)]
    return np.column_stack(cols), dy[rows]


def adf_test(series, max_lag=None) -> UnitRootResult:
    """Augmented Dickey-Fuller test with a constant.

    The lag is picked by BIC over ``0..max_lag`` on the common sample that
    the longest candidate allows; the statistic is then recomputed at the
    chosen lag on every observation that lag permits.
    """
    y = _series(series)
    n = y.size - 1
    if max_lag is None:
        max_lag = default_max_lag(n)
    max_lag = int(min(max_lag, n // 2 - 3))
    if max_lag < 0:
        raise DataError("series too short for the requested lag search")
    if _noise_free(y):
        return UnitRootResult("adf", 0.0, band(0.0), 0, n)

    best, best_bic = 0, np.inf
    for lag in range(max_lag + 1):
        X, v = _adf_design(y, lag, max_lag)
        _, e = _ols(X, v)
        m = v.size
        bic = m * math.log(e @ e / m) + X.shape[1] * math.log(m)
        if bic < best_bic - 1e-12:
            best, best_bic = lag, bic

    X, v = _adf_design(y, best, best)
    beta, e = _ols(X, v)
    m, k = X.shape
    s2 = e @ e / (m - k)
    cov = s2 * np.linalg.inv(X.T @ X)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    return UnitRootResult("adf", stat, band(stat), best, m)


def default_bandwidth(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def bartlett_lrv(u, bandwidth) -> float:
    """Newey-West long-run variance of mean-zero ``u`` (divisor ``n``)."""
    u = np.asarray(u, dtype=float)
    n = u.size
    lrv = u @ u / n
    for j in range(1, bandwidth + 1):
        lrv += 2.0 * (1.0 - j / (bandwidth + 1.0)) * (u[j:] @ u[:-j]) / n
    return float(lrv)


def pp_test(series, bandwidth=None) -> UnitRootResult:
    """Phillips-Perron Z_t test with a constant and a Bartlett kernel."""
    y = _series(series)
    n = y.size - 1
    if bandwidth is None:
        bandwidth = default_bandwidth(n)
    bandwidth = int(bandwidth)
    if not 0 <= bandwidth < n:
        raise DataError(f"bandwidth must lie in [0, {n - 1}]")
    if _noise_free(y):
        return UnitRootResult("phillips-perron", 0.0, band(0.0), bandwidth, n)

    X = np.column_stack([np.ones(n), y[:-1]])
    v = np.diff(y)
    beta, u = _ols(X, v)
    s2 = u @ u / (n - 2)
    se = math.sqrt(s2 * np.linalg.inv(X.T @ X)[1, 1])
    t_rho = beta[1] / se
    gamma0 = u @ u / n
    lam2 = bartlett_lrv(u, bandwidth)
    lam = math.sqrt(lam2)
    stat = float(math.sqrt(gamma0 / lam2) * t_rho
                 - 0.5 * (lam2 - gamma0) / lam * n * se / math.sqrt(s2))
    return UnitRootResult("phillips-perron", stat, band(stat), bandwidth, n)
