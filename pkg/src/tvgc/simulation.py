"""Monte Carlo harness: a bivariate VAR whose attention -> returns link is
switched on over a known window, and an experiment runner that pushes
simulated samples through the full pipeline (lag choice, bootstrap critical
values, statistic sequences, dating) and scores the outcome.

Model units: the simulated system is ``(r, a)``; ``b`` multiplies attention
lags ``1..p_true`` in the returns equation for observations inside the causal
window (0-based, inclusive). On output returns are scaled by
``RETURN_SCALE`` and attention is mapped affinely into the 0-100 index range,
neither of which changes any Wald statistic.
"""

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.linalg import solve_discrete_lyapunov

from tvgc import config, rng
from tvgc.bootstrap import BootstrapConfig, critical_value_sequences
from tvgc.dataset import AlignedDataset
from tvgc.dating import date_episodes
from tvgc.errors import DataError, TvgcError
from tvgc.procedures import statistic_sequences
from tvgc.var import select_lag_bic
from tvgc.wald import selected_columns

logger = logging.getLogger(__name__)

EPOCH = np.datetime64("2020-01-01")
RETURN_SCALE = 0.04
ATTENTION_CENTRE = 50.0
ATTENTION_SPREAD = 45.0  # largest allowed |deviation| from the centre
ATTENTION_UNIT = 10.0  # index points per model unit when that fits
MAX_FAILED_FRACTION = 0.20
NOISE_KINDS = ("gaussian", "arch")


@dataclass(frozen=True)
class Noise:
    """Innovation law. ``gaussian``: iid N(0, sd^2) in both equations.

    ``arch``: both equations share the conditional variance
    ``h_t = alpha0 + alpha1 * eta_{t-1}^2`` where ``eta`` is the attention
    innovation, so returns shocks are large right after large attention
    shocks (the pattern that breaks the homoskedastic Wald).
    """

    kind: str = "gaussian"
    sd: float = 1.0
    alpha0: float = 1.0
    alpha1: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise DataError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")
        if self.sd < 0 or self.alpha0 < 0:
            raise DataError("noise scale must be non-negative")
        if not 0 <= self.alpha1 < 1:
            raise DataError("ARCH coefficient must lie in [0, 1)")

    @property
    def variance(self) -> float:
        if self.kind == "gaussian":
            return self.sd ** 2
        return self.alpha0 / (1.0 - self.alpha1)


def default_base(p: int = 1) -> np.ndarray:
    """Returns weakly own-persistent, attention AR(1) at 0.5, no cross terms."""
    B = np.zeros((2, 2 * p + 1))
    B[0, 1] = 0.1
    B[1, 2] = 0.5
    return B


def companion(coeffs: np.ndarray) -> np.ndarray:
    p = (coeffs.shape[1] - 1) // 2
    F = np.zeros((2 * p, 2 * p))
    F[:2] = coeffs[:, 1:]
    F[2:, :-2] = np.eye(2 * p - 2)
    return F


def spectral_radius(coeffs) -> float:
    return float(np.abs(np.linalg.eigvals(companion(np.asarray(coeffs, dtype=float)))).max())


@dataclass(frozen=True, eq=False)
class SwitchDgp:
    T: int
    p_true: int = 1
    base_coeffs: np.ndarray | None = None
    causal_coeff: float = 0.0
    causal_window: tuple[int, int] | None = None  # None: whole sample
    noise: Noise = field(default_factory=Noise)
    seed: int = 0
    burn_in: int = 200

    def __post_init__(self):
        p = self.p_true
        if not 1 <= p <= config.MAX_LAG:
            raise DataError(f"p_true must lie in 1..{config.MAX_LAG}")
        base = default_base(p) if self.base_coeffs is None else np.array(self.base_coeffs, dtype=float)
        if base.shape != (2, 2 * p + 1):
            raise DataError(f"base coefficients must have shape (2, {2 * p + 1})")
        if np.any(base[0, selected_columns(p)] != 0):
            raise DataError("base coefficients must have a zero attention -> returns block")
        object.__setattr__(self, "base_coeffs", base)
        if self.T <= p + 1:
            raise DataError("T must exceed p_true + 1")
        window = self.causal_window or (p, self.T - 1)
        te, tf = int(window[0]), int(window[1])
        if not p <= te <= tf <= self.T - 1:
            raise DataError(f"causal window must satisfy {p} <= start <= end <= {self.T - 1}")
        object.__setattr__(self, "causal_window", (te, tf))
        if isinstance(self.noise, dict):
            object.__setattr__(self, "noise", Noise(**self.noise))
        for label, coeffs in (("base", base), ("causal", self.causal_coeffs)):
            if spectral_radius(coeffs) >= 1.0:
                raise DataError(f"{label} dynamics are not stable (spectral radius >= 1)")

    @property
    def causal_coeffs(self) -> np.ndarray:
        B = self.base_coeffs.copy()
        B[0, selected_columns(self.p_true)] = self.causal_coeff
        return B

    @property
    def standardized_effect(self) -> float:
        """``b`` times the stationary sd of attention over the innovation sd."""
        F = companion(self.base_coeffs)
        Q = np.zeros_like(F)
        Q[:2, :2] = np.eye(2)
        var_a = solve_discrete_lyapunov(F, Q)[1, 1]
        return abs(self.causal_coeff) * math.sqrt(var_a)

    def as_dict(self) -> dict:
        return {
            "T": self.T, "p_true": self.p_true, "base_coeffs": self.base_coeffs.tolist(),
            "causal_coeff": self.causal_coeff, "causal_window": list(self.causal_window),
            "noise": asdict(self.noise), "seed": self.seed, "burn_in": self.burn_in,
        }


def _innovations(noise: Noise, z: np.ndarray) -> np.ndarray:
    if noise.kind == "gaussian":
        return noise.sd * z
    out = np.empty_like(z)
    prev = 0.0
    for t in range(z.shape[0]):
        h = noise.alpha0 + noise.alpha1 * prev * prev
        out[t] = math.sqrt(h) * z[t]
        prev = out[t, 1]
    return out


def simulate_model(dgp: SwitchDgp, replication: int = 0) -> np.ndarray:
    """``(T, 2)`` array ``[r, a]`` in model units."""
    p, n = dgp.p_true, dgp.burn_in + dgp.T
    z = rng.stream(dgp.seed, "dgp", replication).standard_normal((n, 2))
    e = _innovations(dgp.noise, z)
    te, tf = dgp.causal_window
    base, causal = dgp.base_coeffs, dgp.causal_coeffs
    y = np.zeros((n, 2))
    for t in range(p, n):
        obs = t - dgp.burn_in
        B = causal if te <= obs <= tf else base
        acc = B[:, 0] + e[t]
        for i in range(1, p + 1):
            acc = acc + B[:, 2 * i - 1:2 * i + 1] @ y[t - i]
        y[t] = acc
    return y[dgp.burn_in:]


def simulate_dgp(dgp: SwitchDgp, replication: int = 0) -> AlignedDataset:
    """Simulated sample as a dataset with daily dates from a fixed epoch."""
    y = simulate_model(dgp, replication)
    a = y[:, 1] - y[:, 1].mean()
    peak = np.abs(a).max()
    unit = min(ATTENTION_UNIT, ATTENTION_SPREAD / peak) if peak > 0 else 0.0
    dates = EPOCH + np.arange(dgp.T).astype("timedelta64[D]")
    meta = {"dgp": dgp.as_dict(), "replication": replication}
    return AlignedDataset(dates, ATTENTION_CENTRE + unit * a, RETURN_SCALE * y[:, 0], "SIM", meta)


@dataclass(frozen=True)
class TestConfig:
    algorithms: tuple = ("rolling", "recursive-evolving")
    robust: bool = False
    lag_order: int | None = None  # None: BIC on the full sample
    max_lag: int = config.MAX_LAG
    min_window: int = config.MIN_WINDOW
    control_window: int = config.CONTROL_WINDOW
    replications: int = config.REPLICATIONS
    size: float = config.SIZE
    scheme: str | None = None
    seed: int = config.DEFAULT_SEED
    region: str = "full"  # "control": only the first control_window endpoints count
    tolerance: int = 10
    min_duration: int = config.MIN_DURATION

    __test__ = False  # not a pytest class

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        for a in self.algorithms:
            if a not in config.ALGORITHMS:
                raise DataError(f"unknown algorithm {a!r}")
        if self.region not in ("full", "control"):
            raise DataError("region must be 'full' or 'control'")

    def bootstrap(self, trial: int) -> BootstrapConfig:
        return BootstrapConfig(self.replications, self.size, self.control_window,
                               self.min_window, rng.fold((self.seed, trial)), self.scheme)


def _score(seq, cv, dgp, test):
    episodes = date_episodes(seq, cv, test.min_duration)
    stat, thr = seq.statistic, cv.values
    if test.region == "control":
        head = slice(0, test.control_window)
        with np.errstate(invalid="ignore"):
            rejected = bool(np.any(stat[head] > thr[head]))
    else:
        rejected = bool(episodes)
    row = {"rejected": rejected, "n_episodes": len(episodes),
           "origination": None, "termination": None, "coverage": None}
    if dgp.causal_coeff != 0:
        te, tf = dgp.causal_window
        hits = [ep for ep in episodes if ep.end_index >= te and ep.start_index <= tf]
        covered = np.zeros(tf - te + 1, dtype=bool)
        for ep in hits:
            covered[max(ep.start_index, te) - te:min(ep.end_index, tf) - te + 1] = True
        row["coverage"] = float(covered.mean())
        if hits:
            row["origination"] = hits[0].start_index
            row["termination"] = hits[-1].end_index
    return row


def run_trial(dgp: SwitchDgp, test: TestConfig, trial: int) -> list[dict]:
    """One end-to-end trial; returns one row per algorithm."""
    base = {"trial": trial, "robust": test.robust}
    try:
        data = simulate_dgp(dgp, trial)
        p = test.lag_order or select_lag_bic(data, max_lag=test.max_lag)
        cvs = critical_value_sequences(data, p, test.robust, test.bootstrap(trial), test.algorithms)
        seqs = statistic_sequences(data, p, test.robust, test.min_window, test.algorithms)
    except TvgcError as exc:
        return [dict(base, algorithm=a, lag_order=None, critical_value=None, error=str(exc))
                for a in test.algorithms]
    rows = []
    for a in test.algorithms:
        row = dict(base, algorithm=a, lag_order=p, critical_value=cvs[a].value, error="")
        row.update(_score(seqs[a], cvs[a], dgp, test))
        rows.append(row)
    return rows


def _run_star(args):
    return run_trial(*args)


def _mean(xs):
    return float(np.mean(xs)) if xs else float("nan")


def _summarise(label, dgp, test, rows, trials):
    out = []
    for a in test.algorithms:
        mine = [r for r in rows if r["algorithm"] == a]
        ok = [r for r in mine if not r["error"]]
        failed = len(mine) - len(ok)
        row = {
            "cell": label, "algorithm": a, "robust": test.robust, "T": dgp.T,
            "causal_coeff": dgp.causal_coeff, "noise": dgp.noise.kind, "region": test.region,
            "trials": trials, "failed": failed,
            "status": "aborted" if failed > MAX_FAILED_FRACTION * trials else "ok",
        }
        metrics = dict.fromkeys(("rejection_rate", "mean_origination_bias",
                                 "mean_abs_origination_bias", "origination_hit_rate",
                                 "mean_termination_bias", "mean_coverage"), float("nan"))
        if row["status"] == "ok" and ok:
            metrics["rejection_rate"] = _mean([float(r["rejected"]) for r in ok])
            if dgp.causal_coeff != 0:
                te, tf = dgp.causal_window
                orig = [r["origination"] - te for r in ok if r["origination"] is not None]
                term = [r["termination"] - tf for r in ok if r["termination"] is not None]
                metrics["mean_origination_bias"] = _mean(orig)
                metrics["mean_abs_origination_bias"] = _mean([abs(x) for x in orig])
                metrics["origination_hit_rate"] = sum(abs(x) <= test.tolerance for x in orig) / len(ok)
                metrics["mean_termination_bias"] = _mean(term)
                metrics["mean_coverage"] = _mean([r["coverage"] for r in ok])
        row.update(metrics)
        out.append(row)
    return out


@dataclass
class ExperimentResult:
    table: list[dict]
    trials: list[dict]

    def summary(self) -> str:
        lines = []
        for r in self.table:
            head = f"{r['cell']} | {r['algorithm']} | {'robust' if r['robust'] else 'plain'}"
            if r["status"] != "ok":
                lines.append(f"{head}: aborted ({r['failed']} of {r['trials']} trials failed)")
                continue
            text = f"{head}: rejection {r['rejection_rate']:.3f} over {r['trials'] - r['failed']} trials"
            if not math.isnan(r["mean_coverage"]):
                text += (f", origination bias {r['mean_origination_bias']:+.1f}"
                         f" (hit rate {r['origination_hit_rate']:.3f}),"
                         f" termination bias {r['mean_termination_bias']:+.1f},"
                         f" coverage {r['mean_coverage']:.3f}")
            lines.append(text)
        return "\n".join(lines) + "\n"


def run_experiment(grid, trials: int, workers: int = 1) -> ExperimentResult:
    """Run ``trials`` trials for every cell of ``grid``.

    ``grid`` holds ``(dgp, test)`` or ``(label, dgp, test)`` tuples. Trial
    ``t`` of a cell draws its sample from ``(dgp.seed, t)`` and its bootstrap
    from ``(test.seed, t)``, so results do not depend on ``workers``.
    """
    cells = []
    for n, cell in enumerate(grid):
        label, dgp, test = cell if len(cell) == 3 else (f"cell{n}", *cell)
        cells.append((label, dgp, test))
    jobs = [(dgp, test, t) for _, dgp, test in cells for t in range(trials)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [run_trial(*job) for job in jobs]
    table, rows = [], []
    for c, (label, dgp, test) in enumerate(cells):
        mine = [r for res in results[c * trials:(c + 1) * trials] for r in res]
        for r in mine:
            r["cell"] = label
        rows.extend(mine)
        table.extend(_summarise(label, dgp, test, mine, trials))
        for r in table[-len(test.algorithms):]:
            if r["status"] != "ok":
                logger.warning("cell %s aborted: %d of %d trials failed", label, r["failed"], trials)
    return ExperimentResult(table, rows)


TABLE_FIELDS = ("cell", "algorithm", "robust", "T", "causal_coeff", "noise", "region", "trials",
                "failed", "status", "rejection_rate", "mean_origination_bias",
                "mean_abs_origination_bias", "origination_hit_rate", "mean_termination_bias",
                "mean_coverage")
TRIAL_FIELDS = ("cell", "trial", "algorithm", "robust", "lag_order", "critical_value", "rejected",
                "n_episodes", "origination", "termination", "coverage", "error")


def _write_csv(path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else repr(r[k]) if isinstance(r.get(k), float)
                            else r[k]) for k in fields})


def write_experiment(result: ExperimentResult, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"table": out / "experiment.csv", "trials": out / "trials.csv",
             "summary": out / "summary.txt"}
    _write_csv(paths["table"], TABLE_FIELDS, result.table)
    _write_csv(paths["trials"], TRIAL_FIELDS, result.trials)
    paths["summary"].write_text(result.summary())
    return paths


def grid_from_json(spec) -> list:
    """Parse ``[{"label": ..., "dgp": {...}, "test": {...}}, ...]`` into grid cells."""
    cells = []
    for n, item in enumerate(spec):
        dgp_args = dict(item.get("dgp", {}))
        if "noise" in dgp_args:
            dgp_args["noise"] = Noise(**dgp_args["noise"])
        if dgp_args.get("causal_window") is not None:
            dgp_args["causal_window"] = tuple(dgp_args["causal_window"])
        try:
            dgp = SwitchDgp(**dgp_args)
            test = TestConfig(**item.get("test", {}))
        except TypeError as exc:
            raise DataError(f"grid cell {n}: {exc}") from None
        cells.append((item.get("label", f"cell{n}"), dgp, test))
    return cells


def with_seed(dgp: SwitchDgp, seed: int) -> SwitchDgp:
    return replace(dgp, seed=seed)
