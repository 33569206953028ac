"""Daily price history: validated containers, CSV I/O and a chart-API client.

Two sources produce a :class:`PriceSeries`:

* CSV text in the Yahoo Finance daily-history export layout
  (``Date,Open,High,Low,Close,Adj Close,Volume``), and
* a Yahoo-compatible ``/v8/finance/chart`` endpoint.  ``http(s)://`` endpoints
  are fetched over the network, ``file://`` endpoints are replayed from
  recorded responses stored as ``<base>/v8/finance/chart/<SYMBOL>.json``.

Without an explicit endpoint (argument or ``TICKERLAB_ENDPOINT``) the client
replays the recordings bundled with the package, so nothing touches the network
unless asked to.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import os
import re
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    DataError,
    EmptyRange,
    MalformedResponse,
    MalformedRow,
    MissingColumn,
    NetworkUnavailable,
    NonMonotonicDates,
    NonPositivePrice,
    SymbolNotFound,
)

ENDPOINT_ENV = "TICKERLAB_ENDPOINT"
CSV_COLUMNS = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")
FIXTURE_SYMBOLS = ("MSFT", "TSLA", "^GSPC", "IWC")

_SYMBOL_RE = re.compile(r"^[A-Z0-9^.=\-]{1,10}$")


@dataclass(frozen=True)
class PriceBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    adj_close: float
    volume: int

    def __post_init__(self):
        problem = _bar_problem(self)
        if problem:
            raise DataError(f"{self.date}: {problem}")


def _bar_problem(bar):
    prices = (bar.open, bar.high, bar.low, bar.close, bar.adj_close)
    if not all(math.isfinite(p) for p in prices):
        return "non-finite price"
    if min(prices) <= 0:
        return "non-positive price"
    if bar.volume < 0:
        return "negative volume"
    if bar.low > min(bar.open, bar.close) or bar.high < max(bar.open, bar.close):
        return "low/high do not bracket open/close"
    return None


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    bars: tuple

    def __post_init__(self):
        if not isinstance(self.symbol, str) or not _SYMBOL_RE.match(self.symbol):
            raise DataError(f"invalid ticker symbol {self.symbol!r}")
        object.__setattr__(self, "bars", tuple(self.bars))
        if not self.bars:
            raise EmptyRange(f"{self.symbol}: no bars")
        for k in range(1, len(self.bars)):
            if self.bars[k].date <= self.bars[k - 1].date:
                raise NonMonotonicDates(k + 1, f"{self.bars[k].date} after {self.bars[k - 1].date}")

    def __len__(self):
        return len(self.bars)

    @property
    def dates(self):
        return [b.date for b in self.bars]


# -- CSV -----------------------------------------------------------------------

def parse_csv(text: str, symbol: str = "UNKNOWN") -> PriceSeries:
    """Parse a daily-history CSV document into a validated series.

    Column names are matched case-insensitively and may appear in any order;
    extra columns are ignored.  Line numbers in errors count the header as 1.
    Rows must already be in strictly increasing date order: the check is
    enforced, never repaired.
    """
    reader = csv.reader(io.StringIO(text.lstrip("﻿")))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn("empty document") from None
    index = {name.strip().lower(): k for k, name in enumerate(header)}
    missing = [c for c in CSV_COLUMNS if c.lower() not in index]
    if missing:
        raise MissingColumn(", ".join(missing))
    cols = [index[c.lower()] for c in CSV_COLUMNS]

    bars = []
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            date_s, o, h, lo, c, ac, v = (row[k].strip() for k in cols)
            date = dt.date.fromisoformat(date_s)
            prices = [float(x) for x in (o, h, lo, c, ac)]
            volume = int(float(v))
        except (IndexError, ValueError) as exc:
            raise MalformedRow(line, str(exc)) from None
        if bars and date <= bars[-1].date:
            raise NonMonotonicDates(line, f"{date} does not follow {bars[-1].date}")
        if any(not math.isfinite(p) for p in prices) or float(v) != volume:
            raise MalformedRow(line, "non-finite price or fractional volume")
        if min(prices) <= 0:
            raise NonPositivePrice(line, f"prices {prices}")
        try:
            bars.append(PriceBar(date, *prices, volume))
        except DataError as exc:
            raise MalformedRow(line, str(exc)) from None
    return PriceSeries(symbol, bars)


def serialize_csv(series: PriceSeries) -> str:
    """Inverse of :func:`parse_csv`; floats are written with ``repr`` so the
    round trip is bit-exact."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for b in series.bars:
        writer.writerow([b.date.isoformat(), repr(b.open), repr(b.high), repr(b.low),
                         repr(b.close), repr(b.adj_close), b.volume])
    return out.getvalue()


def load_csv(path, symbol: Optional[str] = None) -> PriceSeries:
    path = Path(path)
    return parse_csv(path.read_text(encoding="utf-8"), symbol or path.stem.upper())


def fixture_dir() -> Path:
    return Path(str(resources.files("tickerlab") / "fixtures"))


def load_fixture(symbol: str) -> PriceSeries:
    """Bundled daily history for one of :data:`FIXTURE_SYMBOLS`."""
    path = fixture_dir() / f"{symbol}.csv"
    if not path.exists():
        raise SymbolNotFound(f"no bundled fixture for {symbol!r}")
    return load_csv(path, symbol)


# -- projections ---------------------------------------------------------------

def closing_prices(series: PriceSeries, adjusted: bool = False) -> np.ndarray:
    """Close (or adjusted close) of every bar, in order, as float64."""
    attr = "adj_close" if adjusted else "close"
    return np.array([getattr(b, attr) for b in series.bars], dtype=np.float64)


def slice_range(series: PriceSeries, start: dt.date, end: dt.date) -> PriceSeries:
    """Bars with ``start <= date < end``."""
    start, end = _as_date(start), _as_date(end)
    if not start < end:
        raise EmptyRange(f"start {start} is not before end {end}")
    bars = [b for b in series.bars if start <= b.date < end]
    if not bars:
        raise EmptyRange(f"{series.symbol}: no bars in [{start}, {end})")
    return PriceSeries(series.symbol, bars)


def _as_date(value) -> dt.date:
    if isinstance(value, dt.datetime):
        return value.date()
    if isinstance(value, dt.date):
        return value
    return dt.date.fromisoformat(str(value))


# -- chart endpoint client -----------------------------------------------------

def fixture_endpoint() -> str:
    return fixture_dir().joinpath("chart").resolve().as_uri()


def resolve_endpoint(endpoint: Optional[str] = None, offline: bool = False) -> str:
    if offline:
        return fixture_endpoint()
    return endpoint or os.environ.get(ENDPOINT_ENV) or fixture_endpoint()


def chart_url(endpoint: str, symbol: str, start: dt.date, end: dt.date) -> str:
    period1 = _unix(start)
    period2 = _unix(end)
    quoted = urllib.parse.quote(symbol, safe="")
    return (f"{endpoint.rstrip('/')}/v8/finance/chart/{quoted}"
            f"?period1={period1}&period2={period2}&interval=1d")


def _unix(day: dt.date) -> int:
    return int(dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc).timestamp())


def fetch_daily(symbol: str, start, end, endpoint: Optional[str] = None,
                timeout: float = 30.0) -> PriceSeries:
    """Daily bars for ``symbol`` on trading days in ``[start, end)``.

    The response is validated as a whole: either every returned bar satisfies
    the :class:`PriceBar` invariants or an error is raised.
    """
    start, end = _as_date(start), _as_date(end)
    if not start < end:
        raise EmptyRange(f"start {start} is not before end {end}")
    endpoint = resolve_endpoint(endpoint)
    payload = _get_chart(endpoint, symbol, start, end, timeout)
    series = parse_chart_payload(payload, symbol)
    bars = [b for b in series.bars if start <= b.date < end]
    if not bars:
        raise EmptyRange(f"{symbol}: no bars in [{start}, {end})")
    return PriceSeries(symbol, bars)


def _get_chart(endpoint, symbol, start, end, timeout):
    parsed = urllib.parse.urlparse(endpoint)
    if parsed.scheme == "file":
        base = Path(urllib.request.url2pathname(parsed.path))
        path = base / "v8" / "finance" / "chart" / f"{symbol}.json"
        if not base.is_dir():
            raise NetworkUnavailable(f"replay directory {base} does not exist")
        if not path.exists():
            raise SymbolNotFound(f"unknown symbol {symbol!r}")
        raw = path.read_bytes()
    elif parsed.scheme in ("http", "https"):
        request = urllib.request.Request(
            chart_url(endpoint, symbol, start, end),
            headers={"User-Agent": "tickerlab/0.1", "Accept": "application/json"})
        try:
            with urllib.request.urlopen(request, timeout=timeout) as resp:
                raw = resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code == 404:
                raise SymbolNotFound(f"unknown symbol {symbol!r}") from None
            raise NetworkUnavailable(f"HTTP {exc.code} from {endpoint}") from None
        except (urllib.error.URLError, OSError) as exc:
            raise NetworkUnavailable(str(exc)) from None
    else:
        raise NetworkUnavailable(f"unsupported endpoint scheme {parsed.scheme!r}")
    try:
        return json.loads(raw)
    except ValueError as exc:
        raise MalformedResponse(f"invalid JSON: {exc}") from None


def parse_chart_payload(payload: dict, symbol: str) -> PriceSeries:
    """Convert a ``/v8/finance/chart`` JSON payload into a series.

    Rows whose quote fields are all null (exchange holidays occasionally show
    up this way) are dropped; a partially-null row is malformed.
    """
    try:
        chart = payload["chart"]
        error = chart.get("error")
        if error:
            code = str(error.get("code", "")).lower()
            if "not found" in code or "no data" in str(error.get("description", "")).lower():
                raise SymbolNotFound(f"unknown symbol {symbol!r}")
            raise MalformedResponse(f"endpoint error: {error}")
        results = chart.get("result")
        if not results:
            raise SymbolNotFound(f"unknown symbol {symbol!r}")
        result = results[0]
        timestamps = result.get("timestamp") or []
        offset = int(result.get("meta", {}).get("gmtoffset", 0))
        quote = result["indicators"]["quote"][0]
        adj = result["indicators"].get("adjclose", [{}])[0].get("adjclose")
        columns = [quote["open"], quote["high"], quote["low"], quote["close"],
                   adj if adj is not None else quote["close"], quote["volume"]]
    except (KeyError, IndexError, TypeError, AttributeError) as exc:
        raise MalformedResponse(f"unexpected payload layout: {exc!r}") from None
    if any(len(col) != len(timestamps) for col in columns):
        raise MalformedResponse("quote arrays and timestamps differ in length")

    bars = []
    for k, ts in enumerate(timestamps):
        values = [col[k] for col in columns]
        if all(v is None for v in values):
            continue
        if any(v is None for v in values):
            raise MalformedResponse(f"partially null row at index {k}")
        day = dt.datetime.fromtimestamp(int(ts) + offset, tz=dt.timezone.utc).date()
        try:
            bars.append(PriceBar(day, *(float(v) for v in values[:5]), int(values[5])))
        except (DataError, ValueError, TypeError) as exc:
            raise MalformedResponse(f"row {k}: {exc}") from None
    if not bars:
        raise EmptyRange(f"{symbol}: response contains no bars")
    try:
        return PriceSeries(symbol, bars)
    except DataError as exc:
        raise MalformedResponse(str(exc)) from None


def chart_payload(series: PriceSeries, gmtoffset: int = -18000) -> dict:
    """Build a chart-API payload for ``series`` (used to record fixtures and by
    the test replay server)."""
    # 09:30 America/New_York, standard time
    stamps = [_unix(b.date) + 14 * 3600 + 30 * 60 for b in series.bars]
    return {
        "chart": {
            "result": [{
                "meta": {"symbol": series.symbol, "currency": "USD", "gmtoffset": gmtoffset,
                         "exchangeTimezoneName": "America/New_York", "dataGranularity": "1d"},
                "timestamp": stamps,
                "indicators": {
                    "quote": [{
                        "open": [b.open for b in series.bars],
                        "high": [b.high for b in series.bars],
                        "low": [b.low for b in series.bars],
                        "close": [b.close for b in series.bars],
                        "volume": [b.volume for b in series.bars],
                    }],
                    "adjclose": [{"adjclose": [b.adj_close for b in series.bars]}],
                },
            }],
            "error": None,
        }
    }


def filter_payload(payload: dict, period1: int, period2: int) -> dict:
    """Restrict a recorded payload to ``period1 <= timestamp < period2``, the way
    the live endpoint answers a ranged query."""
    result = json.loads(json.dumps(payload))
    res = result["chart"]["result"][0]
    keep = [k for k, ts in enumerate(res["timestamp"]) if period1 <= ts < period2]
    res["timestamp"] = [res["timestamp"][k] for k in keep]
    quote = res["indicators"]["quote"][0]
    for key in list(quote):
        quote[key] = [quote[key][k] for k in keep]
    for adj in res["indicators"].get("adjclose", []):
        adj["adjclose"] = [adj["adjclose"][k] for k in keep]
    return result

