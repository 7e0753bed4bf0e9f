"""Ingestion, validation and alignment of price and search-attention series.

Input files are headered CSV with columns ``date,value`` and ISO-8601 dates.
Aligned datasets are written as ``date,attention,log_return`` with a
``.meta.json`` sidecar holding the country label and free-form metadata.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tvgc import config
from tvgc.errors import DataError

logger = logging.getLogger(__name__)


def _as_dates(dates) -> np.ndarray:
    return np.asarray(dates, dtype="datetime64[D]")


def _check_dates(dates: np.ndarray, what: str) -> None:
    if dates.size > 1:
        step = np.diff(dates).astype(np.int64)
        bad = np.flatnonzero(step <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            kind = "duplicate" if step[bad[0]] == 0 else "out-of-order"
            raise DataError(f"{what}: {kind} date {dates[i]} at position {i}")


@dataclass(frozen=True, eq=False)
class RawSeries:
    name: str
    dates: np.ndarray
    values: np.ndarray
    source_tag: str = ""

    def __post_init__(self):
        dates = _as_dates(self.dates)
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise DataError(f"{self.name}: dates and values must be 1-d of equal length")
        _check_dates(dates, self.name)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DataError(f"{self.name}: non-finite value on {dates[bad[0]]}")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, RawSeries):
            return NotImplemented
        return (
            self.name == other.name
            and self.source_tag == other.source_tag
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """Date-indexed pair (attention index, log returns) for one country.

    The VAR works on ``matrix``, whose columns are ``[returns, attention]``.
    """

    dates: np.ndarray
    attention: np.ndarray
    returns: np.ndarray
    country: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        dates = _as_dates(self.dates)
        attention = np.asarray(self.attention, dtype=float)
        returns = np.asarray(self.returns, dtype=float)
        if not (dates.ndim == attention.ndim == returns.ndim == 1):
            raise DataError("aligned dataset columns must be 1-d")
        if not (dates.size == attention.size == returns.size):
            raise DataError("aligned dataset columns differ in length")
        if dates.size < 2:
            raise DataError("aligned dataset needs at least 2 observations")
        _check_dates(dates, self.country or "dataset")
        if not np.all(np.isfinite(returns)):
            raise DataError("returns contain non-finite values")
        if not np.all(np.isfinite(attention)):
            raise DataError("attention contains non-finite values")
        outside = np.flatnonzero((attention < 0) | (attention > 100))
        if outside.size:
            i = int(outside[0])
            raise DataError(f"attention value {attention[i]} on {dates[i]} outside [0, 100]")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "attention", attention)
        object.__setattr__(self, "returns", returns)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.dates.size

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack([self.returns, self.attention])

    def __eq__(self, other):
        if not isinstance(other, AlignedDataset):
            return NotImplemented
        return (
            self.country == other.country
            and self.meta == other.meta
            and np.array_equal(self.dates, other.dates)
            and np.array_equal(self.attention, other.attention)
            and np.array_equal(self.returns, other.returns)
        )


def log_returns(prices: RawSeries) -> RawSeries:
    """Daily log returns ``ln(P_t / P_{t-1})`` dated at ``t``."""
    if len(prices) < 2:
        raise DataError(f"{prices.name}: need at least 2 prices for a return")
    bad = np.flatnonzero(prices.values <= 0)
    if bad.size:
        i = int(bad[0])
        raise DataError(f"{prices.name}: non-positive price {prices.values[i]} on {prices.dates[i]}")
    r = np.log(prices.values[1:] / prices.values[:-1])
    return RawSeries(prices.name, prices.dates[1:], r, "log-returns")


def stitch_gsvi(segments, rescale_overlap=False, max_gap_days=config.MAX_GAP_DAYS) -> RawSeries:
    """Merge consecutive download frames of a search index into one series.

    Without rescaling the later frame wins on overlapping dates and no value is
    changed. With ``rescale_overlap`` each later frame is multiplied by the
    ratio of the merged-so-far mean to its own mean over the overlap, then
    clamped to [0, 100]. Consecutive frames may leave at most ``max_gap_days``
    missing days between them.
    """
    segments = list(segments)
    if not segments:
        raise DataError("no GSVI segments given")
    starts = [s.dates[0] for s in segments if len(s)]
    if len(starts) != len(segments):
        raise DataError("empty GSVI segment")
    if any(b < a for a, b in zip(starts, starts[1:])):
        raise DataError("GSVI segments must be ordered by start date")

    dates = segments[0].dates
    values = segments[0].values
    for k, seg in enumerate(segments[1:], start=1):
        missing = int((seg.dates[0] - dates[-1]).astype(np.int64)) - 1
        if missing > max_gap_days:
            raise DataError(
                f"gap of {missing} days between segment {k - 1} (ends {dates[-1]}) "
                f"and segment {k} (starts {seg.dates[0]}); at most {max_gap_days} allowed"
            )
        seg_values = seg.values
        if rescale_overlap:
            common, i_old, i_new = np.intersect1d(dates, seg.dates, return_indices=True)
            if common.size:
                new_mean = seg.values[i_new].mean()
                if new_mean <= 0:
                    raise DataError(f"segment {k}: zero mean over the overlap, cannot rescale")
                factor = values[i_old].mean() / new_mean
                logger.info("segment %d (%s): rescale factor %.6g over %d overlapping days",
                            k, seg.name, factor, common.size)
                seg_values = np.clip(seg.values * factor, 0.0, 100.0)
        keep = dates < seg.dates[0]
        # later segment wins on overlapping dates
        dates = np.concatenate([dates[keep], seg.dates])
        values = np.concatenate([values[keep], seg_values])
    first = segments[0]
    return RawSeries(first.name, dates, values, first.source_tag)


def align(attention: RawSeries, returns: RawSeries, country: str,
          min_window=config.MIN_WINDOW, meta=None) -> AlignedDataset:
    """Inner-join the two series on date. No filling of missing days."""
    common, ia, ir = np.intersect1d(attention.dates, returns.dates, return_indices=True)
    if common.size == 0:
        raise DataError(f"{country}: attention and returns share no dates")
    if common.size < min_window:
        raise DataError(
            f"{country}: {common.size} aligned observations, at least {min_window} required"
        )
    logger.info("%s: %d aligned observations (%d attention, %d returns)",
                country, common.size, len(attention), len(returns))
    return AlignedDataset(common, attention.values[ia], returns.values[ir], country, meta or {})


# --- file formats -----------------------------------------------------------

def read_series_csv(path, name=None, source_tag="") -> RawSeries:
    """Read a ``date,value`` CSV. Errors cite the 1-based file line."""
    path = Path(path)
    dates, values = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        if [h.strip().lower() for h in header[:2]] != ["date", "value"]:
            raise DataError(f"{path}: expected header 'date,value', got {','.join(header)!r}", line=1)
        for row in reader:
            line = reader.line_num
            if not row or not "".join(row).strip():
                continue
            if len(row) < 2:
                raise DataError(f"{path}: expected 2 columns", line=line)
            try:
                d = np.datetime64(row[0].strip(), "D")
            except ValueError:
                raise DataError(f"{path}: malformed date {row[0]!r}", line=line) from None
            try:
                v = float(row[1])
            except ValueError:
                raise DataError(f"{path}: malformed value {row[1]!r}", line=line) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value {row[1]!r}", line=line)
            if dates and d <= dates[-1]:
                kind = "duplicate" if d == dates[-1] else "out-of-order"
                raise DataError(f"{path}: {kind} date {row[0].strip()}", line=line)
            dates.append(d)
            values.append(v)
    if not dates:
        raise DataError(f"{path}: no observations")
    return RawSeries(name or path.stem, np.array(dates, dtype="datetime64[D]"), np.array(values), source_tag)


def write_series_csv(series: RawSeries, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "value"])
        for d, v in zip(series.dates, series.values):
            w.writerow([str(d), repr(float(v))])


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_aligned_csv(data: AlignedDataset, path) -> Path:
    """Write ``date,attention,log_return`` plus the metadata sidecar.

    Floats are written with ``repr`` so a re-read is bit-exact.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "attention", "log_return"])
        for d, a, r in zip(data.dates, data.attention, data.returns):
            w.writerow([str(d), repr(float(a)), repr(float(r))])
    side = {"country": data.country, "meta": data.meta}
    _meta_path(path).write_text(json.dumps(side, sort_keys=True, indent=2) + "\n")
    return path


def read_aligned_csv(path) -> AlignedDataset:
    path = Path(path)
    dates, att, ret = [], [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["date", "attention", "log_return"]:
            raise DataError(f"{path}: expected header 'date,attention,log_return'", line=1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) < 3:
                raise DataError(f"{path}: expected 3 columns", line=line)
            try:
                dates.append(np.datetime64(row[0].strip(), "D"))
                att.append(float(row[1]))
                ret.append(float(row[2]))
            except ValueError as exc:
                raise DataError(f"{path}: {exc}", line=line) from None
    country, meta = "", {}
    side = _meta_path(path)
    if side.exists():
        info = json.loads(side.read_text())
        country, meta = info.get("country", ""), info.get("meta", {})
    elif path.stem.startswith("aligned_"):
        country = path.stem[len("aligned_"):]
    return AlignedDataset(np.array(dates, dtype="datetime64[D]"), att, ret, country, meta)
