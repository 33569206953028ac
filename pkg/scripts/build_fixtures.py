"""Regenerate the bundled price fixtures and their recorded chart responses.

MSFT and ^GSPC are real daily closes taken from the datasets shipped inside the
skfolio wheel (BSD-3 licensed).  TSLA and IWC are synthetic: seeded log-price
Brownian bridges pinned to approximate year-end closing levels, laid on the
real NYSE calendar of the MSFT series.  The data sources carry closes only, so
Open/High/Low/Adj Close repeat the close and Volume is 0.

    python scripts/build_fixtures.py path/to/skfolio-*.whl
"""
import datetime as dt
import gzip
import io
import json
import sys
import zipfile
from pathlib import Path

import numpy as np

from tickerlab.market_data import PriceBar, PriceSeries, chart_payload, serialize_csv

OUT = Path(__file__).resolve().parents[1] / "src" / "tickerlab" / "fixtures"
START, END = dt.date(2011, 1, 1), dt.date(2021, 1, 1)

# approximate year-end closes, 2010..2020 (split-adjusted for TSLA)
ANCHORS = {
    "TSLA": (1.775, 1.904, 2.258, 10.03, 14.83, 16.00, 14.25, 20.76, 22.19, 27.89, 235.22),
    "IWC": (51.3, 44.7, 52.4, 75.0, 76.3, 68.5, 84.6, 96.0, 80.8, 103.3, 130.5),
}
DAILY_VOL = {"TSLA": 0.034, "IWC": 0.013}
SEEDS = {"TSLA": 20110103, "IWC": 20110104}


def read_gz_csv(wheel, name):
    with zipfile.ZipFile(wheel) as zf:
        text = gzip.decompress(zf.read(f"skfolio/datasets/data/{name}")).decode()
    rows = [line.split(",") for line in text.strip().splitlines()]
    return rows[0], rows[1:]


def close_only_series(symbol, dates, closes):
    bars = [PriceBar(d, c, c, c, c, c, 0) for d, c in zip(dates, closes)]
    return PriceSeries(symbol, bars)


def real_series(wheel, name, column, symbol):
    header, rows = read_gz_csv(wheel, name)
    k = header.index(column)
    dates, closes = [], []
    for row in rows:
        d = dt.date.fromisoformat(row[0])
        if START <= d < END:
            dates.append(d)
            closes.append(float(row[k]))
    return close_only_series(symbol, dates, closes)


def bridge_series(symbol, dates):
    rng = np.random.default_rng(SEEDS[symbol])
    anchors = np.log(ANCHORS[symbol])
    years = np.array([d.year for d in dates])
    logp = np.empty(len(dates))
    for j, year in enumerate(range(2011, 2021)):
        idx = np.flatnonzero(years == year)
        n = len(idx)
        walk = np.cumsum(rng.normal(0.0, DAILY_VOL[symbol], n))
        frac = np.arange(1, n + 1) / n
        logp[idx] = anchors[j] + frac * (anchors[j + 1] - anchors[j]) + walk - frac * walk[-1]
    closes = [round(float(np.exp(v)), 4) for v in logp]
    return close_only_series(symbol, dates, closes)


def write(series):
    (OUT / f"{series.symbol}.csv").write_text(serialize_csv(series), encoding="utf-8")
    chart = OUT / "chart" / "v8" / "finance" / "chart"
    chart.mkdir(parents=True, exist_ok=True)
    (chart / f"{series.symbol}.json").write_text(
        json.dumps(chart_payload(series), separators=(",", ":")), encoding="utf-8")
    print(f"{series.symbol}: {len(series)} bars {series.bars[0].date}..{series.bars[-1].date}")


def main(wheel):
    msft = real_series(wheel, "sp500_dataset.csv.gz", "MSFT", "MSFT")
    gspc = real_series(wheel, "sp500_index.csv.gz", "SP500", "^GSPC")
    write(msft)
    write(gspc)
    for symbol in ("TSLA", "IWC"):
        write(bridge_series(symbol, msft.dates))


if __name__ == "__main__":
    main(sys.argv[1])
