import csv
import datetime as dt
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tickerlab import experiments as ex
from tickerlab.errors import AlignmentError, ConfigError, ExperimentError, SymbolNotFound
from tickerlab.kalman import KalmanConfig
from tickerlab.models import ModelSpec, TrainConfig, save

SMALL = ModelSpec(units=4, units2=3, filters=4)
QUICK = TrainConfig(epochs=2, seed=11)


def quick_config(**kw):
    base = dict(symbols=("MSFT",), start=dt.date(2017, 1, 1), end=dt.date(2021, 1, 1),
                models=("SingleLstm", "CnnLstm"), model_template=SMALL, train=QUICK,
                offline=True)
    base.update(kw)
    return ex.ExperimentConfig(**base)


@pytest.fixture(scope="module")
def quick_report():
    return ex.run_comparison(quick_config())


def test_empty_config_is_rejected():
    with pytest.raises(ConfigError):
        ex.ExperimentConfig(models=(), include_kalman=False)


def test_report_shape(quick_report):
    rows = quick_report.rows
    assert [r.symbol for r in rows] == ["MSFT"] * 3
    assert sorted(r.algorithm for r in rows) == ["CnnLstm", "Kalman", "SingleLstm"]
    assert [r.metrics.rmse for r in rows] == sorted(r.metrics.rmse for r in rows)
    data = quick_report.data["MSFT"]
    assert all(r.metrics.n == len(data.prices) - data.n_train for r in rows)
    assert data.n_train == int(0.75 * len(data.prices))


def test_kalman_row_matches_direct_filter(quick_report):
    from tickerlab.kalman import filter_one_step_ahead
    from tickerlab.metrics import evaluate
    data = quick_report.data["MSFT"]
    r = 1e-4 * data.prices[:data.n_train].mean() ** 2
    pred = filter_one_step_ahead(data.prices, KalmanConfig(r))[data.n_train - 3:]
    assert quick_report.row("MSFT", "Kalman").metrics == evaluate(pred, data.test_prices)


def test_report_is_deterministic(quick_report, tmp_path):
    again = ex.run_comparison(quick_config())
    assert ex.report_csv(again) == ex.report_csv(quick_report)
    a = ex.write_report(quick_report, tmp_path / "a")
    b = ex.write_report(again, tmp_path / "b")
    assert a["csv"].read_bytes() == b["csv"].read_bytes()
    assert a["json"].read_bytes() == b["json"].read_bytes()
    rows = list(csv.DictReader(a["csv"].open()))
    assert list(rows[0]) == list(ex.REPORT_COLUMNS)


def test_seed_changes_fingerprint(quick_report):
    other = ex.run_comparison(quick_config(train=TrainConfig(epochs=2, seed=12),
                                           include_kalman=False, models=("SingleLstm",)))
    assert other.rows[0].fingerprint != quick_report.row("MSFT", "SingleLstm").fingerprint


def test_self_transfer_matches_comparison(quick_report, tmp_path):
    path = save(quick_report.models[("MSFT", "CnnLstm")], tmp_path / "cnn.tklb")
    result = ex.run_transfer(path, "MSFT", quick_config())
    assert result.metrics == quick_report.row("MSFT", "CnnLstm").metrics
    assert result.predictions.tobytes() == \
        quick_report.predictions[("MSFT", "CnnLstm")].tobytes()


def test_transfer_refits_only_scaler(quick_report, tmp_path):
    model = quick_report.models[("MSFT", "SingleLstm")]
    path = save(model, tmp_path / "single.tklb")
    result = ex.run_transfer(path, "^GSPC", quick_config(symbols=("^GSPC",)))
    assert all(np.array_equal(result.model.params[k], model.params[k]) for k in model.params)
    gspc = result.data
    assert result.predictions.shape == (len(gspc.prices) - gspc.n_train,)
    assert np.all(np.isfinite(result.predictions))


def test_unknown_symbol_is_wrapped():
    with pytest.raises(ExperimentError) as info:
        ex.run_comparison(quick_config(symbols=("ZZZZZZ",)))
    assert isinstance(info.value.cause, SymbolNotFound)
    assert info.value.exit_code == 1


def test_emit_plot_toy(tmp_path):
    dates = [dt.date(2020, 1, 1) + dt.timedelta(days=k) for k in range(10)]
    actual = np.arange(10.0) + 1
    svg, table = ex.emit_plot(dates, actual, actual[7:] + 0.5, 7, tmp_path / "toy", "toy")
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 10
    assert sum(1 for r in rows if r["prediction"]) == 3
    assert [r["partition"] for r in rows].count("test") == 3
    assert float(rows[7]["prediction"]) == 8.5

    root = ET.parse(svg).getroot()
    ns = {"s": "http://www.w3.org/2000/svg"}
    lines = root.findall(".//s:polyline", ns)
    assert sorted(pl.get("class") for pl in lines) == ["prediction", "test", "train"]
    counts = {pl.get("class"): len(pl.get("points").split()) for pl in lines}
    assert counts == {"train": 7, "test": 3, "prediction": 3}
    assert root.findall(".//s:line", ns)


def test_emit_plot_alignment(tmp_path):
    dates = list(range(10))
    with pytest.raises(AlignmentError):
        ex.emit_plot(dates, np.arange(10.0), np.zeros(4), 7, tmp_path / "bad")
    with pytest.raises(AlignmentError):
        ex.emit_plot(dates[:9], np.arange(10.0), np.zeros(3), 7, tmp_path / "bad")
