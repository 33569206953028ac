import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tickerlab.errors import (
    EmptyRange,
    MalformedResponse,
    MalformedRow,
    MissingColumn,
    NetworkUnavailable,
    NonMonotonicDates,
    NonPositivePrice,
    SymbolNotFound,
)
from tickerlab.market_data import (
    FIXTURE_SYMBOLS,
    PriceBar,
    PriceSeries,
    chart_payload,
    closing_prices,
    fetch_daily,
    fixture_dir,
    fixture_endpoint,
    load_fixture,
    parse_chart_payload,
    parse_csv,
    serialize_csv,
    slice_range,
)

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume\n"


def make_series(closes, start=dt.date(2011, 1, 3), symbol="TEST"):
    bars = [PriceBar(start + dt.timedelta(days=k), c, c * 1.01, c * 0.99, c, c, 100 * k)
            for k, c in enumerate(closes)]
    return PriceSeries(symbol, bars)


def test_parse_two_rows():
    text = HEADER + "2011-01-03,10,11,9,10.5,10.4,1000\n2011-01-04,10.5,12,10,11,10.9,2000\n"
    s = parse_csv(text, "MSFT")
    assert len(s) == 2
    assert s.bars[0].date == dt.date(2011, 1, 3)
    assert s.bars[1].adj_close == 10.9


def test_parse_header_is_case_insensitive_and_order_flexible():
    text = "volume,CLOSE,date,adj close,low,High,open\n1000,10.5,2011-01-03,10.4,9,11,10\n"
    bar = parse_csv(text).bars[0]
    assert (bar.open, bar.high, bar.low, bar.close, bar.volume) == (10, 11, 9, 10.5, 1000)


def test_parse_rejects_descending_dates():
    text = HEADER + "2011-01-04,10,11,9,10,10,1\n2011-01-03,10,11,9,10,10,1\n"
    with pytest.raises(NonMonotonicDates) as info:
        parse_csv(text)
    assert info.value.line == 3


def test_parse_rejects_duplicate_dates():
    text = HEADER + "2011-01-03,10,11,9,10,10,1\n2011-01-03,10,11,9,10,10,1\n"
    with pytest.raises(NonMonotonicDates):
        parse_csv(text)


def test_parse_rejects_negative_close():
    text = HEADER + "2011-01-03,10,11,9,-1.0,10,1\n"
    with pytest.raises(NonPositivePrice) as info:
        parse_csv(text)
    assert info.value.line == 2


def test_parse_missing_column():
    with pytest.raises(MissingColumn, match="Adj Close"):
        parse_csv("Date,Open,High,Low,Close,Volume\n")


@pytest.mark.parametrize("row", ["2011-01-03,10,11,9,10,10", "2011/01/03,10,11,9,10,10,1",
                                 "2011-01-03,ten,11,9,10,10,1", "2011-01-03,10,9,9,10,10,1"])
def test_parse_malformed_rows(row):
    with pytest.raises(MalformedRow) as info:
        parse_csv(HEADER + row + "\n")
    assert info.value.line == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_csv_round_trip_is_bit_exact(closes):
    s = make_series(closes)
    back = parse_csv(serialize_csv(s), s.symbol)
    assert back == s


def test_closing_prices_projection():
    s = make_series([1.0, 2.0])
    assert closing_prices(s).tolist() == [1.0, 2.0]
    assert len(closing_prices(make_series([3.0]))) == 1


def test_closing_prices_fixture_first_row():
    first = (fixture_dir() / "MSFT.csv").read_text().splitlines()[1].split(",")
    assert closing_prices(load_fixture("MSFT"))[0] == float(first[4])


def test_slice_range():
    s = make_series(np.arange(1.0, 11.0))
    sub = slice_range(s, s.bars[2].date, s.bars[5].date)
    assert [b.close for b in sub.bars] == [3.0, 4.0, 5.0]
    assert slice_range(s, dt.date(2000, 1, 1), dt.date(2100, 1, 1)) == s
    with pytest.raises(EmptyRange):
        slice_range(s, dt.date(2000, 1, 1), dt.date(2000, 2, 1))
    with pytest.raises(EmptyRange):
        slice_range(s, s.bars[5].date, s.bars[2].date)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 19), st.integers(1, 20))
def test_slice_closing_prices_is_contiguous_subsequence(a, length):
    s = make_series(np.linspace(1.0, 50.0, 20))
    b = min(a + length, 19)
    if b <= a:
        return
    sub = slice_range(s, s.bars[a].date, s.bars[b].date)
    assert closing_prices(sub).tolist() == closing_prices(s)[a:b].tolist()


@pytest.mark.parametrize("symbol", FIXTURE_SYMBOLS)
def test_fixtures_cover_ten_years(symbol):
    s = load_fixture(symbol)
    assert len(s) == 2517
    assert s.bars[0].date == dt.date(2011, 1, 3)
    assert s.bars[-1].date == dt.date(2020, 12, 31)


def test_fetch_replays_fixture_recording():
    s = fetch_daily("MSFT", dt.date(2011, 1, 1), dt.date(2021, 1, 1), endpoint=fixture_endpoint())
    # trading days counted directly from the bundled CSV
    n_rows = len((fixture_dir() / "MSFT.csv").read_text().strip().splitlines()) - 1
    assert len(s) == n_rows == 2517
    assert s == load_fixture("MSFT")


def test_fetch_default_endpoint_is_fixture(monkeypatch):
    monkeypatch.delenv("TICKERLAB_ENDPOINT", raising=False)
    s = fetch_daily("TSLA", "2012-01-01", "2012-02-01")
    assert s.bars[0].date == dt.date(2012, 1, 3)
    assert all(dt.date(2012, 1, 1) <= b.date < dt.date(2012, 2, 1) for b in s.bars)


def test_fetch_errors_without_network():
    with pytest.raises(EmptyRange):
        fetch_daily("MSFT", dt.date(2021, 1, 1), dt.date(2011, 1, 1), endpoint=fixture_endpoint())
    with pytest.raises(SymbolNotFound):
        fetch_daily("ZZZZZZ", dt.date(2011, 1, 1), dt.date(2021, 1, 1), endpoint=fixture_endpoint())
    with pytest.raises(EmptyRange):
        fetch_daily("MSFT", dt.date(1990, 1, 1), dt.date(1991, 1, 1), endpoint=fixture_endpoint())
    with pytest.raises(NetworkUnavailable):
        fetch_daily("MSFT", dt.date(2011, 1, 1), dt.date(2012, 1, 1),
                    endpoint="file:///nonexistent/replay")


def test_fetch_over_http(chart_server):
    server, url = chart_server
    s = fetch_daily("MSFT", dt.date(2011, 1, 1), dt.date(2021, 1, 1), endpoint=url)
    assert s == load_fixture("MSFT")
    again = fetch_daily("MSFT", dt.date(2011, 1, 1), dt.date(2021, 1, 1), endpoint=url)
    assert again == s
    assert "/v8/finance/chart/MSFT?period1=1293840000&period2=1609459200&interval=1d" \
        in server.requests
    sub = fetch_daily("^GSPC", "2015-03-02", "2015-03-07", endpoint=url)
    assert [b.date.day for b in sub.bars] == [2, 3, 4, 5, 6]


def test_fetch_http_errors(chart_server):
    _, url = chart_server
    with pytest.raises(SymbolNotFound):
        fetch_daily("ZZZZZZ", "2011-01-01", "2021-01-01", endpoint=url)
    with pytest.raises(MalformedResponse):
        fetch_daily("BROKEN", "2011-01-01", "2021-01-01", endpoint=url)
    with pytest.raises(NetworkUnavailable):
        fetch_daily("MSFT", "2011-01-01", "2021-01-01", endpoint="http://127.0.0.1:9", timeout=2)


def test_endpoint_from_environment(chart_server, monkeypatch):
    server, url = chart_server
    monkeypatch.setenv("TICKERLAB_ENDPOINT", url)
    before = len(server.requests)
    fetch_daily("IWC", "2013-01-01", "2013-02-01")
    assert len(server.requests) == before + 1


def test_chart_payload_round_trip_and_validation():
    s = make_series([10.0, 11.0, 12.0], symbol="ABC")
    payload = chart_payload(s)
    assert parse_chart_payload(payload, "ABC") == s

    bad = chart_payload(s)
    bad["chart"]["result"][0]["indicators"]["quote"][0]["close"][1] = -5.0
    with pytest.raises(MalformedResponse):
        parse_chart_payload(bad, "ABC")

    holiday = chart_payload(s)
    res = holiday["chart"]["result"][0]
    res["timestamp"].append(res["timestamp"][-1] + 86400)
    for col in res["indicators"]["quote"][0].values():
        col.append(None)
    res["indicators"]["adjclose"][0]["adjclose"].append(None)
    assert parse_chart_payload(holiday, "ABC") == s

    partial = chart_payload(s)
    partial["chart"]["result"][0]["indicators"]["quote"][0]["open"][0] = None
    with pytest.raises(MalformedResponse):
        parse_chart_payload(partial, "ABC")
