import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windforest.timeseries import IngestConfig, IngestError, WindSeries, parse_csv, slice_series, write_csv


def test_two_rows(write_csv):
    path = write_csv("timestamp,speed_ms\n1000,3.2\n1600,3.4\n")
    series, report = parse_csv(path, IngestConfig(interval_s=600))
    assert series.values.tolist() == [3.2, 3.4]
    assert series.start_epoch == 1000 and series.interval_s == 600
    assert report.gaps_filled == 0 and report.rows_read == 2


def test_gap_midpoint_interpolated(write_csv):
    path = write_csv("timestamp,speed_ms\n0,3.0\n1200,5.0\n")
    series, report = parse_csv(path, IngestConfig(interval_s=600, max_gap=1))
    assert series.values.tolist() == [3.0, 4.0, 5.0]
    assert report.gaps_filled == 1


def test_gap_longer_than_max_gap(write_csv):
    path = write_csv("timestamp,speed_ms\n0,3.0\n2400,5.0\n")
    with pytest.raises(IngestError, match="max_gap=2"):
        parse_csv(path, IngestConfig(interval_s=600, max_gap=2))


def test_negative_speed_names_row(write_csv):
    path = write_csv("timestamp,speed_ms\n0,3.0\n600,-1.0\n")
    with pytest.raises(IngestError, match="row 3"):
        parse_csv(path)


@pytest.mark.parametrize("bad", ["nan", "inf", "-inf"])
def test_non_finite_speed(write_csv, bad):
    path = write_csv(f"timestamp,speed_ms\n0,3.0\n600,{bad}\n")
    with pytest.raises(IngestError, match="non-finite"):
        parse_csv(path)


def test_rejections_counted(write_csv):
    path = write_csv("timestamp,speed_ms\n0,1\n600,2\n600,9\n300,9\n1200,3\n1500,9\n1800,4\n")
    series, report = parse_csv(path)
    assert series.values.tolist() == [1, 2, 3, 4]
    assert report.rows_rejected == 3
    assert [r for _, r in report.rejections] == ["duplicate timestamp", "out of order", "off the sampling grid"]
    assert report.rows_read == len(series) + report.rows_rejected - report.gaps_filled


def test_report_identity_with_gaps(write_csv):
    path = write_csv("timestamp,speed_ms\n0,1\n1800,4\n1800,5\n2400,2\n")
    series, report = parse_csv(path)
    assert series.values.tolist() == [1, 2, 3, 4, 2]
    assert (report.rows_read, report.gaps_filled, report.rows_rejected) == (4, 2, 1)
    assert report.rows_read == len(series) + report.rows_rejected - report.gaps_filled


def test_iso_timestamps_and_crlf(write_csv):
    path = write_csv("speed_ms,timestamp\r\n2.5,2004-01-01T00:00:00Z\r\n2.75,2004-01-01T00:10:00\r\n")
    series, _ = parse_csv(path, IngestConfig(timestamp_format="iso"))
    assert series.start_epoch == 1072915200
    assert series.values.tolist() == [2.5, 2.75]


@pytest.mark.parametrize(
    "text,match",
    [
        ("", "empty"),
        ("timestamp,speed_ms\n", "no valid rows"),
        ("time,speed\n0,1\n", "missing column"),
        ("timestamp,speed_ms\n0,abc\n", "cannot parse"),
    ],
)
def test_malformed_files(write_csv, text, match):
    with pytest.raises(IngestError, match=match):
        parse_csv(write_csv(text))


def test_missing_file(tmp_path):
    with pytest.raises(IngestError, match="cannot read"):
        parse_csv(tmp_path / "absent.csv")


def test_thirteen_years_of_ten_minute_samples(tmp_path):
    # calendar enumeration: every day from 2004-01-01 to 2016-12-31 inclusive
    day, end, days = dt.date(2004, 1, 1), dt.date(2016, 12, 31), 0
    while day <= end:
        days += 1
        day += dt.timedelta(days=1)
    expected = days * 24 * 6
    assert days == 366 * 4 + 365 * 9
    assert expected == 683856

    start = int(dt.datetime(2004, 1, 1, tzinfo=dt.timezone.utc).timestamp())
    path = tmp_path / "long.csv"
    speeds = np.round(np.random.default_rng(0).uniform(0, 20, expected), 2)
    with open(path, "w") as fh:
        fh.write("timestamp,speed_ms\n")
        fh.writelines(f"{start + 600 * k},{v}\n" for k, v in enumerate(speeds.tolist()))
    series, report = parse_csv(path, IngestConfig(timestamp_format="epoch"))
    assert len(series) == expected
    last = dt.datetime.fromtimestamp(int(series.timestamps()[-1]), dt.timezone.utc)
    assert last == dt.datetime(2016, 12, 31, 23, 50, tzinfo=dt.timezone.utc)


def test_series_invariants():
    with pytest.raises(ValueError):
        WindSeries(0, 0, [1.0])
    with pytest.raises(ValueError):
        WindSeries(0, 600, [])
    with pytest.raises(ValueError):
        WindSeries(0, 600, [1.0, -0.5])
    s = WindSeries(0, 600, [1.0])
    with pytest.raises(ValueError):
        s.values[0] = 2.0


def test_slice_examples():
    s = WindSeries(100, 10, [1, 2, 3, 4])
    sub = slice_series(s, 1, 2)
    assert sub.values.tolist() == [2, 3] and sub.start_epoch == 110
    assert slice_series(s, 0, len(s)) == s
    with pytest.raises(IndexError):
        slice_series(s, len(s), 1)


@given(
    st.integers(1, 60),
    st.data(),
)
def test_slice_composition(n, data):
    s = WindSeries(7, 60, np.arange(n, dtype=float))
    a = data.draw(st.integers(0, n - 1))
    la = data.draw(st.integers(1, n - a))
    b = data.draw(st.integers(0, la - 1))
    lb = data.draw(st.integers(1, la - b))
    assert s.slice(a, la).slice(b, lb) == s.slice(a + b, lb)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1e6, allow_nan=False, allow_subnormal=True), min_size=1, max_size=40), st.integers(0, 2**40))
def test_write_parse_round_trip(tmp_path_factory, values, start):
    s = WindSeries(start, 600, values)
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_csv(s, path)
    back, report = parse_csv(path, IngestConfig(timestamp_format="epoch"))
    assert back == s
    assert np.array_equal(back.timestamps(), s.timestamps())
    assert report.gaps_filled == 0 and report.rows_rejected == 0
