"""Bootstrap critical values under the no-causality null.

The bootstrap world covers the first ``min_window + control_window - 1 + p``
observations of the data: the restricted VAR is fitted there, replications of
that length are simulated from it, and for each replication the maximum of the
chosen statistic sequence is recorded. The ``1 - size`` order statistic of
those maxima bounds the false-positive rate over one control window; it is
broadcast as a flat sequence over the whole sample.
"""

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from tvgc import config, rng
from tvgc.errors import BootstrapError, DataError
from tvgc.linalg import as_matrix, lag_design
from tvgc.procedures import sweep
from tvgc.var import VarFit, _check_rank, _resolve_window
from tvgc.wald import selected_columns

logger = logging.getLogger(__name__)

BLOCK = 50  # replications per work unit; fixed so results never depend on worker count

_SWEEP_KEY = {"forward": "forward", "rolling": "rolling", "recursive-evolving": "sup"}


def default_scheme(robust: bool) -> str:
    return "wild-rademacher" if robust else "iid-residual"


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int = config.REPLICATIONS
    size: float = config.SIZE
    control_window: int = config.CONTROL_WINDOW
    min_window: int = config.MIN_WINDOW
    seed: int = config.DEFAULT_SEED
    scheme: str | None = None  # None pairs the scheme with the Wald variant
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0 < self.size < 1:
            raise ValueError("size must lie in (0, 1)")
        if self.control_window < 1:
            raise ValueError("control window must be at least 1 observation")
        if self.scheme is not None and self.scheme not in config.SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {config.SCHEMES}")

    def resolved_scheme(self, robust: bool) -> str:
        return self.scheme or default_scheme(robust)

    def world_length(self, p: int) -> int:
        return self.min_window + self.control_window - 1 + p


@dataclass(frozen=True, eq=False)
class CriticalValueSequence:
    algorithm: str
    robust: bool
    index: np.ndarray
    values: np.ndarray
    quantile: float
    replications_used: int
    discarded: int = 0
    maxima: np.ndarray | None = None
    dates: np.ndarray | None = None
    scheme: str = ""

    def __len__(self):
        return self.index.size

    @property
    def value(self) -> float:
        return float(self.values[0])


def fit_null_model(data, p, window=None) -> VarFit:
    """VAR fit with the attention lags of the returns equation fixed at zero.

    The attention equation is left unrestricted. Residuals are those of the
    restricted system and are what the bootstrap resamples.
    """
    y = as_matrix(data)
    start, end = _resolve_window(y, window, p)
    X, Y = lag_design(y, p, start + p, end)
    _check_rank(X)
    free = np.setdiff1d(np.arange(X.shape[1]), selected_columns(p))
    B = np.zeros((2, X.shape[1]))
    B[0, free] = np.linalg.lstsq(X[:, free], Y[:, 0], rcond=None)[0]
    B[1] = np.linalg.lstsq(X, Y[:, 1], rcond=None)[0]
    resid = Y - X @ B.T
    sigma = resid.T @ resid / X.shape[0]
    return VarFit(B, resid, X, sigma, (start, end), p, restricted=True)


def _initial_values(null_fit):
    """The ``p`` observations preceding the first fitted row, oldest first."""
    p = null_fit.lag_order
    x0 = null_fit.regressors[0]
    return np.array([x0[2 * i - 1:2 * i + 1] for i in range(p, 0, -1)])


def _draw_innovations(null_fit, steps, scheme, gen):
    resid = null_fit.residuals
    if scheme == "iid-residual":
        return resid[gen.integers(0, resid.shape[0], size=steps)]
    if scheme == "wild-rademacher":
        if steps > resid.shape[0]:
            raise ValueError(f"wild bootstrap needs {steps} residual rows, fit has {resid.shape[0]}")
        signs = 2.0 * gen.integers(0, 2, size=steps) - 1.0
        return resid[:steps] * signs[:, None]
    raise ValueError(f"unknown scheme {scheme!r}")


def _simulate(null_fit, innovations):
    """Run the restricted VAR forward; ``innovations`` is ``(B, steps, 2)``."""
    p = null_fit.lag_order
    Bn, steps, _ = innovations.shape
    y = np.empty((Bn, p + steps, 2))
    y[:, :p] = _initial_values(null_fit)
    const = null_fit.coefficients[:, 0]
    lags = [null_fit.coefficients[:, 2 * i - 1:2 * i + 1].T for i in range(1, p + 1)]
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(p, p + steps):
            acc = const + innovations[:, t - p]
            for i, L in enumerate(lags, start=1):
                acc = acc + y[:, t - i] @ L
            y[:, t] = acc
    return y


def _explosive(paths):
    return ~np.all(np.isfinite(paths) & (np.abs(paths) <= config.EXPLOSIVE_BOUND), axis=(1, 2))


def generate_replication(null_fit, length, scheme, rng_stream, max_redraws=1000):
    """One synthetic series of ``length`` observations from the restricted VAR.

    Starts from the ``p`` actual observations preceding the fit's first row.
    Explosive paths are redrawn from the same stream. Returns
    ``(series, redraws)``.
    """
    p = null_fit.lag_order
    if length < p + 1:
        raise ValueError(f"length must be at least p + 1 = {p + 1}")
    for redraws in range(max_redraws + 1):
        innov = _draw_innovations(null_fit, length - p, scheme, rng_stream)
        path = _simulate(null_fit, innov[None])
        if not _explosive(path)[0]:
            return path[0], redraws
    raise BootstrapError(f"no stable replication after {max_redraws} redraws")


def _block(null_fit, length, scheme, seed, reps, robust, min_window, algorithms, budget):
    """Maxima for a block of replication indices; returns ``(maxima, discarded)``."""
    p = null_fit.lag_order
    gens = [rng.stream(seed, "bootstrap", r) for r in reps]
    innov = np.stack([_draw_innovations(null_fit, length - p, scheme, g) for g in gens])
    paths = _simulate(null_fit, innov)
    discarded = 0
    bad = np.flatnonzero(_explosive(paths))
    while bad.size:
        discarded += bad.size
        if discarded > budget:
            raise BootstrapError(
                f"more than {budget} bootstrap replications discarded as explosive"
            )
        redo = np.stack([_draw_innovations(null_fit, length - p, scheme, gens[i]) for i in bad])
        paths[bad] = _simulate(null_fit, redo)
        bad = bad[_explosive(paths[bad])]
    out = sweep(paths, p, robust, min_window)
    maxima = {}
    for a in algorithms:
        seq = out[_SWEEP_KEY[a]]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            maxima[a] = np.nanmax(seq, axis=1)
    return maxima, discarded


def bootstrap_maxima(data, p, robust, cfg: BootstrapConfig,
                     algorithms=("rolling", "recursive-evolving")):
    """Per-replication maxima of each algorithm's sequence over the bootstrap world.

    All algorithms share the same simulated replications. Returns
    ``(maxima, discarded)`` with ``maxima[algorithm]`` of shape
    ``(replications,)``; NaN where every window of a replication failed.
    """
    y = as_matrix(data)
    length = cfg.world_length(p)
    if y.shape[0] < length:
        raise DataError(
            f"{y.shape[0]} observations; the bootstrap needs at least {length} "
            f"(min window {cfg.min_window} + control window {cfg.control_window} - 1 + p)"
        )
    scheme = cfg.resolved_scheme(robust)
    if scheme != default_scheme(robust):
        warnings.warn(
            f"{scheme} bootstrap paired with the {'robust' if robust else 'homoskedastic'} Wald",
            stacklevel=2,
        )
    null_fit = fit_null_model(y, p, (0, length - 1))
    budget = int(math.floor(config.MAX_DISCARD_FRACTION * cfg.replications))
    blocks = [range(i, min(i + BLOCK, cfg.replications)) for i in range(0, cfg.replications, BLOCK)]
    args = [(null_fit, length, scheme, cfg.seed, b, robust, cfg.min_window, tuple(algorithms), budget)
            for b in blocks]
    if cfg.workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_block_star, args))
    else:
        results = [_block(*a) for a in args]
    discarded = sum(d for _, d in results)
    if discarded > budget:
        raise BootstrapError(f"{discarded} of {cfg.replications} replications discarded as explosive")
    if discarded:
        logger.info("%d explosive replications redrawn", discarded)
    maxima = {a: np.concatenate([m[a] for m, _ in results]) for a in algorithms}
    return maxima, discarded


def _block_star(args):
    return _block(*args)


def order_statistic_rank(n, size) -> int:
    """1-based rank ``ceil((1 - size)(n + 1))`` clamped to ``1..n``."""
    r = math.ceil(round((1.0 - size) * (n + 1), 9))
    return min(max(r, 1), n)


def quantile_from_maxima(maxima, size) -> float:
    m = np.sort(maxima[np.isfinite(maxima)])
    if m.size == 0:
        raise BootstrapError("every bootstrap replication failed")
    return float(m[order_statistic_rank(m.size, size) - 1])


def critical_values(data, p, algorithm, robust, cfg=None) -> CriticalValueSequence:
    """Flat critical-value sequence for ``algorithm`` over the data's endpoints."""
    cfg = cfg or BootstrapConfig()
    if algorithm not in _SWEEP_KEY:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    maxima, discarded = bootstrap_maxima(data, p, robust, cfg, (algorithm,))
    return _broadcast(data, algorithm, robust, cfg, maxima[algorithm], discarded)


def _broadcast(data, algorithm, robust, cfg, maxima, discarded):
    y = as_matrix(data)
    used = int(np.isfinite(maxima).sum())
    if used < (1 - config.MAX_DISCARD_FRACTION) * cfg.replications:
        raise BootstrapError(f"only {used} of {cfg.replications} replications produced a statistic")
    cv = quantile_from_maxima(maxima, cfg.size)
    index = np.arange(cfg.min_window - 1, y.shape[0])
    dates = getattr(data, "dates", None)
    return CriticalValueSequence(
        algorithm, robust, index, np.full(index.size, cv), 1.0 - cfg.size, used, discarded,
        maxima, None if dates is None else dates[index], cfg.resolved_scheme(robust),
    )


def critical_value_sequences(data, p, robust, cfg, algorithms):
    """Like :func:`critical_values` for several algorithms sharing one bootstrap."""
    maxima, discarded = bootstrap_maxima(data, p, robust, cfg, algorithms)
    return {a: _broadcast(data, a, robust, cfg, maxima[a], discarded) for a in algorithms}
