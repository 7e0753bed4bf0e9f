"""Forward, rolling and recursive-evolving Wald statistic sequences.

All three come out of one sweep over endpoints. For each endpoint ``e`` the
sweep evaluates the Wald statistic on every admissible window ``[s, e]`` with
``e - s + 1 >= min_window``: ``s = 0`` is the forward statistic,
``s = e - min_window + 1`` the rolling one, and the maximum over all ``s`` is
the sup-Wald of the recursive-evolving procedure.

The fast engine (:mod:`tvgc._kernels`) works from prefix sums of ``x x'``,
``x y`` and ``y^2`` so a window costs O(k^3) regardless of its length; for
small systems the robust meat also comes from prefix sums (of fourth-order
products), otherwise from the window's squared residuals. Data are centred and scaled with the
moments of the first ``min_window`` observations (the Wald statistic is
invariant to that), which keeps the sums well scaled without looking ahead:
a prefix of the data reproduces the prefix of every sequence bit for bit.
``engine="reference"`` refits every window from scratch through
:func:`tvgc.var.fit` and :mod:`tvgc.wald` instead.
"""

from dataclasses import dataclass, field

import numpy as np

from tvgc import config
from tvgc.errors import DataError, EstimationError
from tvgc import _kernels
from tvgc.linalg import as_matrix, lag_design
from tvgc.var import IDENTIFIABILITY_MARGIN, fit as var_fit
from tvgc.wald import ATTENTION, RETURNS, build_selection, selected_columns, wald

FAILURE_REASONS = {
    _kernels.ILL_CONDITIONED: "ill-conditioned regressor matrix",
    _kernels.DEGENERATE: "degenerate residual variance",
    _kernels.SINGULAR_RESTRICTION: "singular restriction covariance",
}


@dataclass(frozen=True, eq=False)
class StatSequence:
    """Statistic per endpoint. Missing points are NaN with a reason in ``gaps``.

    ``argmax_start`` (recursive-evolving only) is the observation index of the
    start of the maximising window; -1 where the point is missing.
    """

    algorithm: str
    robust: bool
    lag_order: int
    min_window: int
    index: np.ndarray
    statistic: np.ndarray
    argmax_start: np.ndarray | None = None
    dates: np.ndarray | None = None
    n_obs: int = 0
    gaps: dict = field(default_factory=dict)

    def __len__(self):
        return self.index.size

    @property
    def fraction(self) -> np.ndarray:
        """Endpoint as a sample fraction ``f = (index + 1) / T``."""
        return (self.index + 1) / self.n_obs

    @property
    def argmax_fraction(self):
        if self.argmax_start is None:
            return None
        return np.where(self.argmax_start >= 0, self.argmax_start / self.n_obs, np.nan)

    @property
    def failure_rate(self) -> float:
        return float(np.isnan(self.statistic).mean()) if len(self) else 0.0


def standardized_design(y, p, anchor, target=RETURNS):
    """Regressor rows and tested response after centring/scaling each column.

    Centre and scale come from the first ``anchor`` observations only.
    """
    head = y[:anchor]
    scale = head.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    z = (y - head.mean(axis=0)) / scale
    X, Y = lag_design(z, p, p, z.shape[0] - 1)
    return np.ascontiguousarray(X), np.ascontiguousarray(Y[:, target])


def _check_lengths(T, p, min_window):
    need = 2 * p + 1 + IDENTIFIABILITY_MARGIN
    if min_window < need:
        raise DataError(f"minimum window {min_window} too short for VAR({p}); need {need}")
    if T < min_window:
        raise DataError(f"{T} observations, at least {min_window} required")


def sweep(y, p, robust, min_window=config.MIN_WINDOW, target=RETURNS, source=ATTENTION):
    """Forward, rolling and sup statistics for a batch ``y`` of shape ``(B, T, 2)``.

    Returns a dict of ``(B, n_endpoints)`` arrays: ``forward``, ``rolling``,
    ``sup``, ``argmax`` (start index, -1 if missing) and a failure code per
    point for each of the three (for the sup: set only when every window at
    that endpoint failed).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 2:
        y = y[None]
    B, T, _ = y.shape
    _check_lengths(T, p, min_window)
    shape = (B, T - min_window + 1)
    out = {
        "forward": np.empty(shape), "rolling": np.empty(shape), "sup": np.empty(shape),
        "argmax": np.empty(shape, dtype=np.int64),
        "forward_code": np.empty(shape, dtype=np.int8),
        "rolling_code": np.empty(shape, dtype=np.int8),
        "sup_code": np.empty(shape, dtype=np.int8),
    }
    sel = selected_columns(p, source)
    for i in range(B):
        X, v = standardized_design(y[i], p, min_window, target)
        _kernels.sweep_series(
            X, v, sel, p, min_window, robust, config.CONDITION_LIMIT,
            out["forward"][i], out["forward_code"][i], out["rolling"][i], out["rolling_code"][i],
            out["sup"][i], out["sup_code"][i], out["argmax"][i],
        )
    return out


def _reference_sweep(y, p, robust, min_window):
    T = y.shape[0]
    _check_lengths(T, p, min_window)
    R = build_selection(p)
    ends = np.arange(min_window - 1, T)
    res = {name: np.full(ends.size, np.nan) for name in ("forward", "rolling", "sup")}
    res["argmax"] = np.full(ends.size, -1)
    for name in ("forward_code", "rolling_code", "sup_code"):
        res[name] = np.zeros(ends.size, dtype=np.int8)
    for j, e in enumerate(ends):
        stats = []
        for s in range(e - min_window + 2):
            try:
                stats.append(wald(var_fit(y, p, (s, e)), R, robust).statistic)
            except EstimationError:
                stats.append(np.nan)
        stats = np.array(stats)
        res["forward"][j], res["rolling"][j] = stats[0], stats[-1]
        res["forward_code"][j] = 1 if np.isnan(stats[0]) else 0
        res["rolling_code"][j] = 1 if np.isnan(stats[-1]) else 0
        if np.all(np.isnan(stats)):
            res["sup_code"][j] = 1
        else:
            res["argmax"][j] = int(np.nanargmax(stats))
            res["sup"][j] = stats[res["argmax"][j]]
    return {k: v[None] for k, v in res.items()}


_KEYS = {"forward": "forward", "rolling": "rolling", "recursive-evolving": "sup"}


def statistic_sequences(data, p, robust=False, min_window=config.MIN_WINDOW,
                        algorithms=config.ALGORITHMS, engine="fast"):
    """Compute several sequences from one sweep; returns ``{algorithm: StatSequence}``."""
    y = as_matrix(data)
    for a in algorithms:
        if a not in _KEYS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {config.ALGORITHMS}")
    if engine == "fast":
        raw = sweep(y, p, robust, min_window)
    elif engine == "reference":
        raw = _reference_sweep(y, p, robust, min_window)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    T = y.shape[0]
    index = np.arange(min_window - 1, T)
    dates = getattr(data, "dates", None)
    dates = None if dates is None else dates[index]
    seqs = {}
    for a in algorithms:
        key = _KEYS[a]
        stat = raw[key][0]
        codes = raw[f"{key}_code"][0]
        gaps = {int(index[i]): FAILURE_REASONS.get(int(codes[i]), "failed")
                for i in np.flatnonzero(np.isnan(stat))}
        argmax = raw["argmax"][0].copy() if a == "recursive-evolving" else None
        seqs[a] = StatSequence(a, robust, p, min_window, index, stat.copy(), argmax,
                               dates, T, gaps)
    return seqs


def forward_sequence(data, p, robust=False, min_window=config.MIN_WINDOW, engine="fast"):
    return statistic_sequences(data, p, robust, min_window, ("forward",), engine)["forward"]


def rolling_sequence(data, p, robust=False, min_window=config.MIN_WINDOW, engine="fast"):
    return statistic_sequences(data, p, robust, min_window, ("rolling",), engine)["rolling"]


def recursive_evolving_sequence(data, p, robust=False, min_window=config.MIN_WINDOW,
                                engine="fast"):
    return statistic_sequences(
        data, p, robust, min_window, ("recursive-evolving",), engine
    )["recursive-evolving"]
