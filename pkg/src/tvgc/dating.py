"""Date-stamping of causal episodes from a statistic and critical-value sequence.

An episode opens at the first point whose statistic is strictly above its
critical value and closes just before the next point strictly below it. Ties
keep the current state, missing points neither open nor close, and the scan
repeats until the end of the sample so multiple switches are all reported.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from tvgc import config
from tvgc.errors import DataError


@dataclass(frozen=True)
class CausalEpisode:
    start_index: int
    end_index: int
    peak_statistic: float
    duration_days: int
    algorithm: str = ""
    robust: bool = False
    start_date: str | None = None
    end_date: str | None = None  # None while the episode is still open at sample end
    ongoing: bool = False
    sub_minimal: bool = False

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1


def _arrays(stats, cv):
    if hasattr(stats, "statistic"):
        index, values = stats.index, stats.statistic
        dates, algorithm, robust = stats.dates, stats.algorithm, stats.robust
    else:
        values = np.asarray(stats, dtype=float)
        index, dates, algorithm, robust = np.arange(values.size), None, "", False
    if hasattr(cv, "values"):
        if not np.array_equal(cv.index, index):
            raise DataError("statistic and critical-value sequences cover different observations")
        thresholds = cv.values
    else:
        try:
            thresholds = np.broadcast_to(np.asarray(cv, dtype=float), values.shape)
        except ValueError:
            raise DataError("critical values do not match the statistic sequence") from None
    return index, values, thresholds, dates, algorithm, robust


def date_episodes(stats, cv, min_duration=config.MIN_DURATION) -> list[CausalEpisode]:
    """Episodes of ``stats`` above ``cv``.

    ``stats`` is a :class:`~tvgc.procedures.StatSequence` or plain array;
    ``cv`` a :class:`~tvgc.bootstrap.CriticalValueSequence`, array or scalar.
    Episodes shorter than ``min_duration`` observations are kept and flagged.
    """
    index, values, thresholds, dates, algorithm, robust = _arrays(stats, cv)
    spans = []
    start = None
    for i, (s, c) in enumerate(zip(values, thresholds)):
        if np.isnan(s):
            continue
        if start is None and s > c:
            start = i
        elif start is not None and s < c:
            spans.append((start, i - 1, False))
            start = None
    if start is not None:
        spans.append((start, values.size - 1, True))

    episodes = []
    for a, b, ongoing in spans:
        length = b - a + 1
        if dates is not None:
            duration = int((dates[b] - dates[a]).astype(np.int64)) + 1
            start_date = str(dates[a])
            end_date = None if ongoing else str(dates[b])
        else:
            duration, start_date, end_date = length, None, None
        episodes.append(CausalEpisode(
            int(index[a]), int(index[b]), float(np.nanmax(values[a:b + 1])), duration,
            algorithm, robust, start_date, end_date, ongoing, length < min_duration,
        ))
    return episodes


def episode_record(ep: CausalEpisode, country="") -> dict:
    return {
        "country": country,
        "algorithm": ep.algorithm,
        "robust": ep.robust,
        "start_date": ep.start_date,
        "end_date": ep.end_date,
        "duration_days": ep.duration_days,
        "peak_statistic": ep.peak_statistic,
        "sub_minimal": ep.sub_minimal,
    }


def episode_report(episodes, dataset=None, country=None) -> dict:
    """Structured summary of dated episodes with a short text rendering."""
    if country is None:
        country = getattr(dataset, "country", "") if dataset is not None else ""
    dates = getattr(dataset, "dates", None)
    records, lines = [], []
    for n, ep in enumerate(episodes, start=1):
        if ep.start_date is None and dates is not None:
            start = str(dates[ep.start_index])
            end = None if ep.ongoing else str(dates[ep.end_index])
            days = int((dates[ep.end_index] - dates[ep.start_index]).astype(np.int64)) + 1
            ep = CausalEpisode(ep.start_index, ep.end_index, ep.peak_statistic, days,
                               ep.algorithm, ep.robust, start, end, ep.ongoing, ep.sub_minimal)
        records.append(episode_record(ep, country))
        span = f"{ep.start_date or ep.start_index} to {ep.end_date or ('sample end' if ep.ongoing else ep.end_index)}"
        flag = " (shorter than minimum duration)" if ep.sub_minimal else ""
        lines.append(f"episode {n}: {span}, {ep.duration_days} days, "
                     f"peak statistic {ep.peak_statistic:.3f}{flag}")
    if not records:
        lines.append("no causality detected")
    label = f"{country}: " if country else ""
    summary = label + f"{len(records)} causal episode(s)" if records else label + "no causality detected"
    return {
        "country": country,
        "meta": dict(getattr(dataset, "meta", {}) or {}),
        "n_episodes": len(records),
        "total_days": sum(r["duration_days"] for r in records),
        "longest_days": max((r["duration_days"] for r in records), default=0),
        "episodes": records,
        "summary": summary,
        "lines": lines,
    }


def write_episodes_jsonl(records, path) -> Path:
    """One JSON object per line, keys sorted."""
    path = Path(path)
    with path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def read_episodes_jsonl(path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def as_dict(ep: CausalEpisode) -> dict:
    return asdict(ep)
