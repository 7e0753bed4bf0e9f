"""Command-line interface: ``tvgc ingest | stationarity | test | plot-data | simulate``.

Exit codes: 0 success, 2 invalid input or too little data, 3 numerical
failure (too many failed windows, degenerate data, bootstrap breakdown).
Every command that writes files writes a JSON manifest next to them.
"""

import csv
import hashlib
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from tvgc import __version__, config
from tvgc.bootstrap import BootstrapConfig, critical_value_sequences
from tvgc.dataset import align, log_returns, read_aligned_csv, read_series_csv, \
    stitch_gsvi, write_aligned_csv
from tvgc.dating import date_episodes, episode_record, episode_report, write_episodes_jsonl
from tvgc.errors import BootstrapError, DataError, EstimationError
from tvgc.plotting import render_svg
from tvgc.procedures import statistic_sequences
from tvgc.simulation import grid_from_json, run_experiment, write_experiment
from tvgc.stationarity import adf_test, pp_test
from tvgc.var import select_lag_bic

logger = logging.getLogger("tvgc")

MAX_FAILURE_DENSITY = 0.10
EXIT_INPUT, EXIT_NUMERIC = 2, 3
DIRECTIONS = ("attention-to-returns", "returns-to-attention")


class Failure(click.ClickException):
    def __init__(self, message, exit_code):
        super().__init__(message)
        self.exit_code = exit_code


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, command, cfg, inputs, outputs, seed=None) -> Path:
    manifest = {
        "command": command,
        "config": cfg,
        "inputs": {str(p): sha256(p) for p in inputs},
        "outputs": {Path(p).name: sha256(p) for p in outputs},
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _num(x):
    return "" if x is None or not np.isfinite(x) else repr(float(x))


def _run(fn):
    """Map package errors onto exit codes."""
    try:
        return fn()
    except (EstimationError, BootstrapError) as exc:
        raise Failure(str(exc), EXIT_NUMERIC) from None
    except (DataError, ValueError) as exc:
        raise Failure(str(exc), EXIT_INPUT) from None


@click.group(context_settings={"help_option_names": ["-h", "--help"], "show_default": True})
@click.version_option(__version__)
@click.option("--log-level", default="warning",
              type=click.Choice(["debug", "info", "warning", "error"]), help="Logging verbosity.")
def main(log_level):
    """Time-varying Granger causality from search attention to returns."""
    logging.basicConfig(level=log_level.upper(), format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


@main.command()
@click.argument("prices", type=click.Path(exists=True, dir_okay=False))
@click.argument("gsvi", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--country", required=True, help="Country label stored with the dataset.")
@click.option("--rescale-overlap/--no-rescale-overlap", default=False,
              help="Rescale each later GSVI frame by the overlap mean ratio.")
@click.option("--max-gap-days", default=config.MAX_GAP_DAYS, type=click.IntRange(0),
              help="Largest tolerated gap between GSVI frames.")
@click.option("--min-window", default=config.MIN_WINDOW, type=click.IntRange(1),
              help="Minimum aligned length accepted.")
@click.option("--meta", multiple=True, metavar="KEY=VALUE", help="Metadata entry (repeatable).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output CSV [default: aligned_<country>.csv].")
def ingest(prices, gsvi, country, rescale_overlap, max_gap_days, min_window, meta, out):
    """Build an aligned dataset from a price file and GSVI frame files."""
    def go():
        meta_d = {}
        for item in meta:
            key, sep, value = item.partition("=")
            if not sep:
                raise DataError(f"--meta expects KEY=VALUE, got {item!r}")
            meta_d[key] = value
        px = read_series_csv(prices, "prices", "prices")
        segments = [read_series_csv(p, "gsvi", "gsvi-segment") for p in gsvi]
        segments.sort(key=lambda s: s.dates[0])
        attention = stitch_gsvi(segments, rescale_overlap, max_gap_days)
        data = align(attention, log_returns(px), country, min_window, meta_d)
        path = Path(out or f"aligned_{country}.csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        write_aligned_csv(data, path)
        sidecar = path.with_name(path.name + ".meta.json")
        cfg = {"country": country, "rescale_overlap": rescale_overlap,
               "max_gap_days": max_gap_days, "min_window": min_window, "meta": meta_d}
        write_manifest(path.with_name(path.name + ".manifest.json"), "ingest", cfg,
                       [prices, *gsvi], [path, sidecar])
        click.echo(f"{len(data)} rows written to {path} "
                   f"({data.dates[0]} to {data.dates[-1]}, mean attention {data.attention.mean():.2f})")
    _run(go)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-lag", default=None, type=click.IntRange(0),
              help="ADF lag search bound [default: floor(12 (T/100)^0.25)].")
@click.option("--bandwidth", default=None, type=click.IntRange(0),
              help="PP Bartlett bandwidth [default: floor(4 (T/100)^(2/9))].")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for stationarity.csv and its manifest.")
def stationarity(dataset, max_lag, bandwidth, out):
    """ADF and Phillips-Perron tests (constant) on both series."""
    def go():
        data = read_aligned_csv(dataset)
        rows = []
        for name, series in (("log_return", data.returns), ("attention", data.attention)):
            for res in (adf_test(series, max_lag), pp_test(series, bandwidth)):
                rows.append((name, res))
        click.echo(f"{'series':<12}{'test':<18}{'statistic':>12}{'lags/bw':>9}  p-value band")
        for name, r in rows:
            click.echo(f"{name:<12}{r.test:<18}{r.statistic:>12.4f}{r.lags_or_bandwidth:>9}  "
                       f"{r.p_value_band}")
        if out:
            d = Path(out)
            d.mkdir(parents=True, exist_ok=True)
            path = d / "stationarity.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["series", "test", "statistic", "lags_or_bandwidth", "p_value_band", "nobs"])
                for name, r in rows:
                    w.writerow([name, r.test, repr(r.statistic), r.lags_or_bandwidth,
                                r.p_value_band, r.nobs])
            write_manifest(d / "manifest.json", "stationarity",
                           {"max_lag": max_lag, "bandwidth": bandwidth}, [dataset], [path])
    _run(go)


def _write_stats(path, seq):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "date", "statistic", "argmax_start", "status"])
        for n, i in enumerate(seq.index):
            arg = "" if seq.argmax_start is None or seq.argmax_start[n] < 0 else int(seq.argmax_start[n])
            date = "" if seq.dates is None else str(seq.dates[n])
            w.writerow([int(i), date, _num(seq.statistic[n]), arg, seq.gaps.get(int(i), "ok")])


def _write_cv(path, cv):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "date", "critical_value"])
        for n, i in enumerate(cv.index):
            date = "" if cv.dates is None else str(cv.dates[n])
            w.writerow([int(i), date, _num(cv.values[n])])


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", default="recursive-evolving", type=click.Choice(config.ALGORITHMS),
              help="Statistic sequence to date.")
@click.option("--robust/--no-robust", default=False,
              help="Heteroskedasticity-robust Wald (pairs with the wild bootstrap).")
@click.option("--min-window", default=config.MIN_WINDOW, type=click.IntRange(1),
              help="Minimum window f0 in observations (three months).")
@click.option("--control-window", default=config.CONTROL_WINDOW, type=click.IntRange(1),
              help="Window over which the bootstrap controls size.")
@click.option("--reps", default=config.REPLICATIONS, type=click.IntRange(1),
              help="Bootstrap replications.")
@click.option("--size", default=config.SIZE, type=click.FloatRange(0, 1, min_open=True, max_open=True),
              help="Nominal size.")
@click.option("--max-lag", default=config.MAX_LAG, type=click.IntRange(1, config.MAX_LAG),
              help="Largest lag considered by BIC.")
@click.option("--lag-order", default=None, type=click.IntRange(1, config.MAX_LAG),
              help="Fix the lag order instead of selecting it by BIC.")
@click.option("--scheme", default=None, type=click.Choice(config.SCHEMES),
              help="Bootstrap scheme [default: iid-residual, or wild-rademacher with --robust].")
@click.option("--direction", default=DIRECTIONS[0], type=click.Choice(DIRECTIONS),
              help="Causal direction tested.")
@click.option("--min-duration", default=config.MIN_DURATION, type=click.IntRange(1),
              help="Episodes shorter than this are flagged sub-minimal.")
@click.option("--seed", default=config.DEFAULT_SEED, envvar=config.SEED_ENV, type=int,
              help=f"Bootstrap seed (also read from {config.SEED_ENV}; the flag wins).")
@click.option("--workers", default=1, type=click.IntRange(1), help="Processes for the bootstrap.")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
def test(dataset, algorithm, robust, min_window, control_window, reps, size, max_lag, lag_order,
         scheme, direction, min_duration, seed, workers, out):
    """Statistic sequence, bootstrap critical values and dated episodes."""
    def go():
        data = read_aligned_csv(dataset)
        y = data.matrix if direction == DIRECTIONS[0] else data.matrix[:, ::-1]
        p = lag_order or select_lag_bic(y, max_lag=max_lag)
        seq = statistic_sequences(y, p, robust, min_window, (algorithm,))[algorithm]
        seq = _with_dates(seq, data.dates)
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        _write_stats(d / "stats.csv", seq)
        cfg = {"algorithm": algorithm, "robust": robust, "min_window": min_window,
               "control_window": control_window, "reps": reps, "size": size, "max_lag": max_lag,
               "lag_order": p, "lag_selected_by_bic": lag_order is None,
               "scheme": scheme or ("wild-rademacher" if robust else "iid-residual"),
               "direction": direction, "min_duration": min_duration}
        if seq.failure_rate > MAX_FAILURE_DENSITY:
            write_manifest(d / "manifest.json", "test", cfg, [dataset], [d / "stats.csv"], seed)
            raise Failure(f"{seq.failure_rate:.1%} of the sequence failed numerically "
                          f"(limit {MAX_FAILURE_DENSITY:.0%}); see stats.csv", EXIT_NUMERIC)
        bcfg = BootstrapConfig(reps, size, control_window, min_window, seed, scheme, workers)
        cv = critical_value_sequences(y, p, robust, bcfg, (algorithm,))[algorithm]
        _write_cv(d / "cv.csv", cv)
        episodes = date_episodes(seq, cv, min_duration)
        records = [episode_record(ep, data.country) for ep in episodes]
        write_episodes_jsonl(records, d / "episodes.jsonl")
        report = episode_report(episodes, data)
        (d / "report.txt").write_text(
            f"lag order {p}, critical value {cv.value:.4f}\n" + "\n".join(report["lines"]) + "\n")
        outputs = [d / n for n in ("stats.csv", "cv.csv", "episodes.jsonl", "report.txt")]
        write_manifest(d / "manifest.json", "test", cfg, [dataset], outputs, seed)
        click.echo(f"VAR({p}), {algorithm}{' robust' if robust else ''}: "
                   f"critical value {cv.value:.4f}; {report['summary']}")
        for line in report["lines"]:
            click.echo("  " + line)
    _run(go)


def _with_dates(seq, dates):
    return replace(seq, dates=dates[seq.index])


def _read_indexed(path, column):
    idx, dates, vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "index" not in reader.fieldnames or column not in reader.fieldnames:
            raise DataError(f"{path}: expected columns 'index' and '{column}'", line=1)
        for row in reader:
            try:
                idx.append(int(row["index"]))
                vals.append(float(row[column]) if row[column] else np.nan)
            except ValueError as exc:
                raise DataError(f"{path}: {exc}", line=reader.line_num) from None
            dates.append(row.get("date", ""))
    return np.array(idx, dtype=int), dates, np.array(vals)


@main.command("plot-data")
@click.argument("stats", type=click.Path(exists=True, dir_okay=False))
@click.argument("cv", type=click.Path(exists=True, dir_okay=False))
@click.option("--svg/--no-svg", default=False, help="Also render plot.svg.")
@click.option("--title", default="", help="SVG title.")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
def plot_data(stats, cv, svg, title, out):
    """Merge statistic and critical-value files into date,statistic,critical_value."""
    def go():
        si, sd, sv = _read_indexed(stats, "statistic")
        ci, _, cvv = _read_indexed(cv, "critical_value")
        if not np.array_equal(si, ci):
            raise DataError("statistic and critical-value files cover different observations")
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        path = d / "plot.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "statistic", "critical_value"])
            for date, s, c in zip(sd, sv, cvv):
                w.writerow([date, _num(s), _num(c)])
        outputs = [path]
        if svg:
            labels = [dt or str(i) for dt, i in zip(sd, si)]
            (d / "plot.svg").write_text(render_svg(sv, cvv, labels, title))
            outputs.append(d / "plot.svg")
        write_manifest(d / "manifest.json", "plot-data", {"svg": svg, "title": title},
                       [stats, cv], outputs)
        click.echo(f"{len(si)} rows written to {path}")
    _run(go)


@main.command()
@click.argument("grid", type=click.Path(exists=True, dir_okay=False))
@click.option("--trials", default=100, type=click.IntRange(1), help="Trials per grid cell.")
@click.option("--seed", default=None, envvar=config.SEED_ENV, type=int,
              help=f"Override every cell's DGP and bootstrap seeds (also read from {config.SEED_ENV}).")
@click.option("--workers", default=1, type=click.IntRange(1), help="Processes running trials.")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory.")
def simulate(grid, trials, seed, workers, out):
    """Monte Carlo experiment over a JSON grid of DGP and test settings."""
    def go():
        spec = json.loads(Path(grid).read_text())
        if seed is not None:
            for item in spec:
                item.setdefault("dgp", {})["seed"] = seed
                item.setdefault("test", {})["seed"] = seed
        cells = grid_from_json(spec)
        result = run_experiment(cells, trials, workers)
        paths = write_experiment(result, out)
        write_manifest(Path(out) / "manifest.json", "simulate", {"trials": trials, "grid": spec},
                       [grid], list(paths.values()), seed)
        click.echo(result.summary(), nl=False)
    _run(go)


if __name__ == "__main__":
    main()
