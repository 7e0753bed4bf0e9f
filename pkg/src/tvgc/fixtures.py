"""Deterministic generator for the bundled example data.

``write_fixtures(dir)`` recreates every file under ``tvgc/data`` byte for
byte; the test-suite checks the committed copies against it.

* ``prices.csv`` and ``gsvi_US_NN.csv``: a daily price path from 2020-02-11
  to 2022-05-09 and the US attention index in 90-day frames. Attention
  averages 58.68 over the 818 return days and drives returns over part of
  the sample.
* ``aligned_JP.csv``: attention with a strong nine-day cycle, so BIC picks
  nine lags; mean 50.97.
* ``aligned_WN.csv``: independent noise, no causality.
* ``aligned_SW.csv``: causality switched on for observations 150-250.
"""

from importlib import resources
from pathlib import Path

import numpy as np

from tvgc import rng
from tvgc.dataset import AlignedDataset, RawSeries, write_aligned_csv, write_series_csv
from tvgc.simulation import SwitchDgp, simulate_dgp

SEED = 20200211
START, END = np.datetime64("2020-02-11"), np.datetime64("2022-05-09")
FRAME_DAYS = 90
US_MEAN, JP_MEAN = 58.68, 50.97
US_CAUSAL = (420, 560)  # return-day indices where attention feeds returns
SW_WINDOW = (150, 250)


def data_dir() -> Path:
    return Path(str(resources.files("tvgc") / "data"))


def _integer_index(x, mean):
    """Round to integers in [0, 100] whose average rounds to ``mean``."""
    v = np.clip(np.rint(x - x.mean() + mean), 0, 100)
    target = int(round(mean * v.size))
    order = np.argsort(-(x - np.rint(x)))  # nudge the values closest to a rounding boundary
    k = 0
    while v.sum() != target:
        i = order[k % v.size]
        step = 1 if v.sum() < target else -1
        if 0 <= v[i] + step <= 100:
            v[i] += step
        k += 1
    return v


def us_series():
    """``(prices, [gsvi frames])`` as raw series."""
    g = rng.stream(SEED, "fixture", "US")
    days = int((END - START).astype(int)) + 1
    a = np.zeros(days)
    eta = g.standard_normal(days)
    for t in range(1, days):
        a[t] = 0.6 * a[t - 1] + eta[t]
    z = g.standard_normal(days)
    r = 0.035 * z
    lo, hi = US_CAUSAL
    for t in range(lo + 1, hi + 2):  # day t is return index t - 1
        r[t] += 0.035 * 0.4 * a[t - 1]
    dates = START + np.arange(days).astype("timedelta64[D]")
    prices = 8000.0 * np.exp(np.cumsum(np.concatenate([[0.0], r[1:]])))
    prices = np.round(prices, 2)
    att = np.empty(days)
    att[0] = 55.0
    att[1:] = _integer_index(58.68 + 11.0 * a[1:], US_MEAN)
    frames = []
    for n, s in enumerate(range(0, days, FRAME_DAYS), start=1):
        sl = slice(s, min(s + FRAME_DAYS, days))
        frames.append(RawSeries(f"gsvi_US_{n:02d}", dates[sl], att[sl], "gsvi-segment"))
    return RawSeries("prices", dates, prices, "prices"), frames


def jp_dataset() -> AlignedDataset:
    g = rng.stream(SEED, "fixture", "JP")
    n, burn = 818, 300
    a = np.zeros(n + burn)
    eta = g.standard_normal(n + burn)
    for t in range(9, n + burn):
        a[t] = 0.25 * a[t - 1] + 0.55 * a[t - 9] + eta[t]
    a = a[burn:]
    r = 0.04 * g.standard_normal(n)
    dates = START + np.arange(1, n + 1).astype("timedelta64[D]")
    att = _integer_index(JP_MEAN + 9.0 * a, JP_MEAN)
    return AlignedDataset(dates, att, r, "JP", {"individualism": 46, "gsvi_mean": JP_MEAN})


def wn_dataset() -> AlignedDataset:
    g = rng.stream(SEED, "fixture", "WN")
    n = 400
    dates = START + np.arange(1, n + 1).astype("timedelta64[D]")
    att = np.clip(50.0 + 10.0 * g.standard_normal(n), 0, 100)
    return AlignedDataset(dates, np.round(att, 4), 0.04 * g.standard_normal(n), "WN", {})


def sw_dataset() -> AlignedDataset:
    dgp = SwitchDgp(400, base_coeffs=np.array([[0.0, 0.1, 0.0], [0.0, 0.0, 0.5]]),
                    causal_coeff=1.0, causal_window=SW_WINDOW, seed=SEED)
    d = simulate_dgp(dgp)
    return AlignedDataset(d.dates, d.attention, d.returns, "SW",
                          {"causal_window": list(SW_WINDOW), "causal_coeff": 1.0})


def write_fixtures(out) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    prices, frames = us_series()
    written = [out / "prices.csv"]
    write_series_csv(prices, written[0])
    for f in frames:
        written.append(out / f"{f.name}.csv")
        write_series_csv(f, written[-1])
    for name, data in (("JP", jp_dataset()), ("WN", wn_dataset()), ("SW", sw_dataset())):
        path = write_aligned_csv(data, out / f"aligned_{name}.csv")
        written += [path, path.with_name(path.name + ".meta.json")]
    return written
