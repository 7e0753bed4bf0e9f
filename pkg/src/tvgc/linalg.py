"""Small numerical helpers shared by the estimation modules."""

import numpy as np

from tvgc import config


def as_matrix(data) -> np.ndarray:
    """Return the ``(T, 2)`` array ``[returns, attention]`` for a dataset or array."""
    if hasattr(data, "matrix"):
        return data.matrix
    y = np.asarray(data, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ValueError(f"expected a (T, 2) array, got shape {y.shape}")
    return y


def lag_design(y: np.ndarray, p: int, first: int, last: int):
    """Regressors and responses for observations ``first..last`` (inclusive).

    Row for observation ``t`` is ``[1, y1[t-1], y2[t-1], ..., y1[t-p], y2[t-p]]``
    so within every lag block the returns lag precedes the attention lag.
    """
    if first < p:
        raise ValueError(f"observation {first} has fewer than {p} presample lags")
    n = last - first + 1
    X = np.empty((n, 2 * p + 1))
    X[:, 0] = 1.0
    for i in range(1, p + 1):
        X[:, 2 * i - 1:2 * i + 1] = y[first - i:last + 1 - i]
    return X, y[first:last + 1]


def equilibrated_condition(M: np.ndarray) -> np.ndarray:
    """Condition number of ``D^-1/2 M D^-1/2`` for symmetric PSD ``M`` (batched).

    Scale-free, so rescaling a regressor never trips the guard by itself.
    Returns ``inf`` where a diagonal entry is zero or the matrix is not PD.
    """
    d = np.sqrt(np.abs(np.diagonal(M, axis1=-2, axis2=-1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        C = M / (d[..., :, None] * d[..., None, :])
    C = np.where(np.isfinite(C), C, 0.0)
    ev = np.linalg.eigvalsh(C)
    lo, hi = ev[..., 0], ev[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where((lo > 0) & (d.min(axis=-1) > 0), hi / lo, np.inf)
    return cond
