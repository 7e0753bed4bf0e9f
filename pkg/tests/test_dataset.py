import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tvgc.dataset import (AlignedDataset, RawSeries, align, log_returns, read_aligned_csv,
                          read_series_csv, stitch_gsvi, write_aligned_csv, write_series_csv)
from tvgc.errors import DataError

D0 = np.datetime64("2021-01-01")


def days(start, n):
    return D0 + np.arange(start, start + n).astype("timedelta64[D]")


def series(values, start=0, name="s"):
    return RawSeries(name, days(start, len(values)), np.asarray(values, float))


class TestLogReturns:
    def test_flat(self):
        assert log_returns(series([100, 100])).values.tolist() == [0.0]

    def test_single_step(self):
        r = log_returns(series([100, 105]))
        assert r.values[0] == pytest.approx(math.log(1.05), rel=1e-15)
        assert r.dates[0] == D0 + 1

    def test_telescoping(self):
        r = log_returns(series([100, 50, 100])).values
        assert r[0] == pytest.approx(-math.log(2), abs=1e-15)
        assert r[1] == pytest.approx(math.log(2), abs=1e-15)
        assert r.sum() == pytest.approx(0.0, abs=1e-15)

    def test_non_positive_price_names_date(self):
        with pytest.raises(DataError, match="2021-01-02"):
            log_returns(series([100, 0, 3]))

    def test_too_short(self):
        with pytest.raises(DataError):
            log_returns(series([100]))

    @given(st.lists(st.floats(1e-3, 1e6), min_size=2, max_size=60))
    def test_cumsum_recovers_log_prices(self, prices):
        p = np.array(prices)
        r = log_returns(series(p)).values
        assert np.allclose(np.cumsum(r), np.log(p[1:]) - np.log(p[0]), rtol=0, atol=1e-12)


class TestStitch:
    def test_single_segment_identity(self):
        s = series([1, 2, 3])
        assert stitch_gsvi([s]) == s

    def test_adjacent_segments_concatenate(self):
        a, b = series(np.arange(90), 0), series(np.arange(90) + 100 % 101, 90)
        out = stitch_gsvi([a, b])
        assert len(out) == 180
        assert np.array_equal(out.values, np.concatenate([a.values, b.values]))

    def test_overlap_later_wins_without_rescale(self):
        a, b = series([10, 20, 30, 40], 0), series([1, 2, 3], 2)
        out = stitch_gsvi([a, b])
        assert out.values.tolist() == [10, 20, 1, 2, 3]

    def test_rescale_hand_example(self, caplog):
        # overlap of 3 days: earlier [40, 60, 80] (mean 60), later [20, 30, 40] (mean 30)
        a = series([50, 40, 60, 80], 0)
        b = series([20, 30, 40, 45], 1)
        with caplog.at_level("INFO", logger="tvgc.dataset"):
            out = stitch_gsvi([a, b], rescale_overlap=True)
        assert out.values.tolist() == [50, 40, 60, 80, 90]
        assert "rescale factor 2" in caplog.text

    def test_rescale_ten_day_overlap_means_match(self):
        a = series(np.linspace(30, 60, 40), 0)
        b = series(np.concatenate([a.values[30:] / 2, np.full(20, 20.0)]), 30)
        out = stitch_gsvi([a, b], rescale_overlap=True)
        assert out.values[30:40].mean() == pytest.approx(a.values[30:40].mean())
        assert np.allclose(out.values[40:], 40.0)

    def test_rescale_clamps(self):
        a, b = series([90, 90], 0), series([30, 60], 1)
        assert stitch_gsvi([a, b], rescale_overlap=True).values.max() == 100

    def test_gap_rejected(self):
        with pytest.raises(DataError, match="gap of 4 days"):
            stitch_gsvi([series([1, 2], 0), series([3], 6)])
        assert len(stitch_gsvi([series([1, 2], 0), series([3], 5)])) == 3

    @given(st.lists(st.integers(0, 100), min_size=3, max_size=30), st.integers(0, 5))
    def test_no_rescale_never_alters_values(self, vals, shift):
        a = series(vals, 0)
        b = series(vals[::-1], len(vals) - min(shift, len(vals) - 1))
        out = stitch_gsvi([a, b])
        assert set(out.values) <= set(a.values) | set(b.values)
        assert np.array_equal(out.values[-len(b):], b.values)


class TestAlign:
    def test_identical_dates(self):
        a, r = series(np.full(100, 50.0)), series(np.zeros(100))
        d = align(a, r, "X")
        assert len(d) == 100 and np.array_equal(d.attention, a.values)

    def test_missing_date_dropped(self):
        a = series(np.arange(100) % 100)
        r = RawSeries("r", np.delete(a.dates, 5), np.delete(np.arange(100.0), 5))
        d = align(a, r, "X")
        assert len(d) == 99 and D0 + 5 not in d.dates

    def test_empty_intersection(self):
        with pytest.raises(DataError, match="share no dates"):
            align(series([1.0] * 10), series([1.0] * 10, 100), "X", min_window=1)

    def test_too_short(self):
        with pytest.raises(DataError, match="at least 90"):
            align(series([1.0] * 50), series([1.0] * 50), "X")

    def test_swap_keeps_dates(self):
        a = series(np.arange(95) % 100, 0)
        r = series(np.arange(100) % 100, 3)
        assert np.array_equal(align(a, r, "X").dates, align(r, a, "X").dates)

    def test_us_fixture_mean(self, data):
        # Table 1 reports a daily GSVI mean of 58.68 for the US
        prices = read_series_csv(data / "prices.csv")
        frames = [read_series_csv(p) for p in sorted(data.glob("gsvi_US_*.csv"))]
        d = align(stitch_gsvi(frames), log_returns(prices), "US")
        assert len(d) == 818
        assert round(d.attention.mean(), 2) == 58.68


class TestAlignedDataset:
    def test_attention_range(self):
        with pytest.raises(DataError, match="outside"):
            AlignedDataset(days(0, 3), [1, 2, 101], [0, 0, 0])

    def test_duplicate_dates(self):
        with pytest.raises(DataError, match="duplicate"):
            AlignedDataset(np.array([D0, D0]), [1, 2], [0, 0])

    def test_non_finite_returns(self):
        with pytest.raises(DataError):
            AlignedDataset(days(0, 2), [1, 2], [0, np.nan])

    @given(st.lists(st.tuples(st.floats(0, 100), st.floats(-1, 1)), min_size=2, max_size=40))
    def test_round_trip_bit_exact(self, tmp_path_factory, rows):
        d = AlignedDataset(days(0, len(rows)), [a for a, _ in rows], [r for _, r in rows],
                           "US", {"individualism": 91})
        path = tmp_path_factory.mktemp("rt") / "aligned_US.csv"
        write_aligned_csv(d, path)
        back = read_aligned_csv(path)
        assert back == d and back.country == "US" and back.meta == {"individualism": 91}


class TestFiles:
    def test_malformed_date_cites_line(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("date,value\n2021-01-01,1\n2021-13-01,2\n")
        with pytest.raises(DataError, match="line 3"):
            read_series_csv(p)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("day,v\n2021-01-01,1\n")
        with pytest.raises(DataError, match="line 1"):
            read_series_csv(p)

    def test_series_round_trip(self, tmp_path):
        s = series([0.1, 1 / 3, 55])
        write_series_csv(s, tmp_path / "s.csv")
        assert read_series_csv(tmp_path / "s.csv") == s

    def test_sidecar_is_json(self, tmp_path):
        d = AlignedDataset(days(0, 2), [1, 2], [0, 0], "JP", {"a": 1})
        write_aligned_csv(d, tmp_path / "aligned_JP.csv")
        meta = json.loads((tmp_path / "aligned_JP.csv.meta.json").read_text())
        assert meta == {"country": "JP", "meta": {"a": 1}}
