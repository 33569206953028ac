"""End-to-end runs: model comparison per symbol, cross-symbol transfer and
plot artifacts."""
from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .errors import AlignmentError, ConfigError, ExperimentError, IoFailure, TickerlabError
from .kalman import KalmanConfig, KalmanForecaster
from .market_data import closing_prices, fetch_daily, resolve_endpoint
from .metrics import MetricsReport, evaluate
from .models import (
    LstmForecaster,
    ModelSpec,
    TrainConfig,
    TrainedModel,
    canonical_architecture,
    load,
    predict_one_step_series,
)
from .preprocess import SplitSpec, fit_scaler, train_size, transform

log = logging.getLogger(__name__)

KALMAN = "Kalman"
DEFAULT_MODELS = ("SingleLstm", "DualLstm", "BiLstm", "CnnLstm")
REPORT_COLUMNS = ("symbol", "algorithm", "rmse", "mae", "r_squared", "n", "fingerprint")


@dataclass(frozen=True)
class ExperimentConfig:
    symbols: tuple = ("MSFT",)
    start: dt.date = dt.date(2011, 1, 1)
    end: dt.date = dt.date(2021, 1, 1)
    split: SplitSpec = SplitSpec()
    models: tuple = DEFAULT_MODELS
    model_template: ModelSpec = ModelSpec()
    train: TrainConfig = TrainConfig()
    kalman: KalmanConfig = KalmanConfig()
    include_kalman: bool = True
    output_dir: Optional[Path] = None
    endpoint: Optional[str] = None
    offline: bool = False
    adjusted: bool = False

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "models", tuple(canonical_architecture(m) for m in self.models))
        if not self.models and not self.include_kalman:
            raise ConfigError("nothing to run: no models selected and the Kalman filter is off")
        if not self.symbols:
            raise ConfigError("no symbols given")
        if not self.start < self.end:
            raise ConfigError(f"invalid date range {self.start} .. {self.end}")

    def spec_for(self, architecture) -> ModelSpec:
        return replace(self.model_template, architecture=architecture)

    def as_dict(self):
        return {
            "symbols": list(self.symbols), "start": self.start.isoformat(),
            "end": self.end.isoformat(), "train_fraction": self.split.train_fraction,
            "models": list(self.models), "model_template": self.model_template.as_dict(),
            "train": self.train.as_dict(), "include_kalman": self.include_kalman,
            "kalman": {"measurement_variance": self.kalman.measurement_variance,
                       "process_scale": self.kalman.process_scale,
                       "variance_window": self.kalman.variance_window,
                       "initial_variance": self.kalman.initial_variance},
            "adjusted": self.adjusted,
        }


@dataclass
class SymbolData:
    symbol: str
    dates: list
    prices: np.ndarray
    n_train: int

    @property
    def test_prices(self):
        return self.prices[self.n_train:]


@dataclass(frozen=True)
class ReportRow:
    symbol: str
    algorithm: str
    metrics: MetricsReport
    fingerprint: str


@dataclass
class ComparisonReport:
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    # run artifacts, not serialized
    predictions: dict = field(default_factory=dict, repr=False)
    models: dict = field(default_factory=dict, repr=False)
    data: dict = field(default_factory=dict, repr=False)

    def row(self, symbol, algorithm) -> ReportRow:
        for r in self.rows:
            if r.symbol == symbol and r.algorithm == algorithm:
                return r
        raise KeyError((symbol, algorithm))


def _hash(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _price_hash(prices) -> str:
    return hashlib.sha256(np.ascontiguousarray(prices, dtype="<f8").tobytes()).hexdigest()[:16]


def load_symbol(symbol, config: ExperimentConfig) -> SymbolData:
    endpoint = resolve_endpoint(config.endpoint, config.offline)
    series = fetch_daily(symbol, config.start, config.end, endpoint=endpoint)
    prices = closing_prices(series, adjusted=config.adjusted)
    return SymbolData(symbol, series.dates, prices, train_size(len(prices), config.split))


def kalman_test_predictions(data: SymbolData, kalman: KalmanConfig) -> np.ndarray:
    """Kalman forecasts for the test partition; R defaults from training prices."""
    est = KalmanForecaster(kalman.measurement_variance, kalman.process_scale,
                           kalman.variance_window, kalman.initial_variance)
    est.fit(data.prices[:data.n_train])
    return est.predict(data.prices)[data.n_train - kalman.variance_window:]


def train_model(data: SymbolData, spec: ModelSpec, train: TrainConfig) -> TrainedModel:
    est = LstmForecaster(spec.architecture, spec.units, spec.units2, spec.filters,
                         spec.kernel_width, spec.window, train.epochs, train.learning_rate,
                         train.batch_size, train.early_stop_patience,
                         train.validation_fraction, train.clip_norm, train.seed)
    return est.fit(data.prices[:data.n_train]).model_


def model_test_predictions(model: TrainedModel, data: SymbolData, refit_scaler=False):
    scaler = fit_scaler(data.prices[:data.n_train]) if refit_scaler else model.scaler
    if refit_scaler:
        model = replace(model, scaler=scaler)
    scaled = transform(data.prices, scaler)
    return predict_one_step_series(model, scaled, range(data.n_train, len(data.prices)))


def run_comparison(config: ExperimentConfig) -> ComparisonReport:
    """Train and evaluate every selected algorithm on every symbol.

    Rows are grouped by symbol (in the order given) and sorted by RMSE within
    each symbol.
    """
    report = ComparisonReport(config=config.as_dict())
    for symbol in config.symbols:
        try:
            data = load_symbol(symbol, config)
        except TickerlabError as exc:
            raise ExperimentError(symbol, "data", exc) from exc
        report.data[symbol] = data
        base = {"symbol": symbol, "prices": _price_hash(data.prices),
                "train_fraction": config.split.train_fraction}
        rows = []
        if config.include_kalman:
            try:
                pred = kalman_test_predictions(data, config.kalman)
                metrics = evaluate(pred, data.test_prices)
            except TickerlabError as exc:
                raise ExperimentError(symbol, KALMAN, exc) from exc
            fp = _hash({**base, "algorithm": KALMAN, "kalman": config.as_dict()["kalman"]})
            rows.append(ReportRow(symbol, KALMAN, metrics, fp))
            report.predictions[(symbol, KALMAN)] = pred
        for arch in config.models:
            spec = config.spec_for(arch)
            log.info("training %s on %s", arch, symbol)
            try:
                model = train_model(data, spec, config.train)
                pred = model_test_predictions(model, data)
                metrics = evaluate(pred, data.test_prices)
            except TickerlabError as exc:
                raise ExperimentError(symbol, arch, exc) from exc
            fp = _hash({**base, "algorithm": arch, "model": model.fingerprint,
                        "spec": spec.as_dict()})
            rows.append(ReportRow(symbol, arch, metrics, fp))
            report.predictions[(symbol, arch)] = pred
            report.models[(symbol, arch)] = model
        rows.sort(key=lambda r: (r.metrics.rmse, r.algorithm))
        report.rows.extend(rows)
    return report


@dataclass
class TransferResult:
    metrics: MetricsReport
    predictions: np.ndarray
    data: SymbolData
    model: TrainedModel


def run_transfer(model_path, target_symbol, config: ExperimentConfig) -> TransferResult:
    """Evaluate a saved model on another symbol without touching its weights.

    Only the min-max scaler is refitted, on the target's training partition.
    """
    model = load(model_path)
    try:
        data = load_symbol(target_symbol, config)
        pred = model_test_predictions(model, data, refit_scaler=True)
        metrics = evaluate(pred, data.test_prices)
    except TickerlabError as exc:
        raise ExperimentError(target_symbol, model.spec.architecture, exc) from exc
    return TransferResult(metrics, pred, data, model)


# -- report output -------------------------------------------------------------

def report_csv(report: ComparisonReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in report.rows:
        m = r.metrics
        writer.writerow([r.symbol, r.algorithm, repr(m.rmse), repr(m.mae), repr(m.r_squared),
                         m.n, r.fingerprint])
    return out.getvalue()


def report_json(report: ComparisonReport) -> str:
    rows = [{"symbol": r.symbol, "algorithm": r.algorithm, **r.metrics.as_dict(),
             "fingerprint": r.fingerprint} for r in report.rows]
    return json.dumps({"config": report.config, "rows": rows}, indent=2, sort_keys=True) + "\n"


def format_table(report: ComparisonReport) -> str:
    lines = [f"{'symbol':<8} {'algorithm':<11} {'RMSE':>10} {'MAE':>10} {'R²':>8} {'n':>5}"]
    for r in report.rows:
        m = r.metrics
        lines.append(f"{r.symbol:<8} {r.algorithm:<11} {m.rmse:>10.3f} {m.mae:>10.3f} "
                     f"{m.r_squared:>8.4f} {m.n:>5d}")
    return "\n".join(lines)


def write_report(report: ComparisonReport, output_dir) -> dict:
    output_dir = Path(output_dir)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        paths = {"csv": output_dir / "comparison.csv", "json": output_dir / "comparison.json"}
        paths["csv"].write_text(report_csv(report), encoding="utf-8")
        paths["json"].write_text(report_json(report), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return paths


# -- plots ---------------------------------------------------------------------

_COLOURS = {"train": "#1f77b4", "test": "#2ca02c", "prediction": "#d62728"}


def emit_plot(dates, actual, predictions, n_train, path, title=""):
    """Write ``<path>.svg`` (train/test/prediction overlay with a split
    marker) and ``<path>.csv`` (date, actual, prediction, partition).

    ``predictions`` must align one-to-one with the test partition
    ``actual[n_train:]``.
    """
    actual = np.asarray(actual, dtype=np.float64)
    predictions = np.asarray(predictions, dtype=np.float64)
    if len(dates) != len(actual):
        raise AlignmentError(f"{len(dates)} dates for {len(actual)} values")
    if not 0 < n_train < len(actual):
        raise AlignmentError(f"split {n_train} outside series of length {len(actual)}")
    if predictions.shape != (len(actual) - n_train,):
        raise AlignmentError(f"{predictions.size} predictions for a test partition of "
                             f"{len(actual) - n_train}")
    path = Path(path)
    csv_path, svg_path = path.parent / (path.name + ".csv"), path.parent / (path.name + ".svg")

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", "actual", "prediction", "partition"])
    for k, (day, value) in enumerate(zip(dates, actual)):
        test = k >= n_train
        pred = repr(float(predictions[k - n_train])) if test else ""
        writer.writerow([str(day), repr(float(value)), pred, "test" if test else "train"])

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(out.getvalue(), encoding="utf-8")
        svg_path.write_text(_svg(actual, predictions, n_train, title), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from None
    return svg_path, csv_path


def _svg(actual, predictions, n_train, title, width=960, height=480, pad=40):
    n = len(actual)
    values = np.concatenate([actual, predictions])
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo or 1.0

    def xy(k, v):
        x = pad + (width - 2 * pad) * k / max(n - 1, 1)
        y = height - pad - (height - 2 * pad) * (v - lo) / span
        return f"{x:.2f},{y:.2f}"

    def polyline(name, idx, vals):
        pts = " ".join(xy(k, v) for k, v in zip(idx, vals))
        return (f'  <polyline class="{name}" fill="none" stroke="{_COLOURS[name]}" '
                f'stroke-width="1" points="{pts}"/>')

    split_x = xy(n_train - 0.5, lo).split(",")[0]
    test_idx = range(n_train, n)
    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"  <title>{escape(title)}</title>",
        f'  <rect width="{width}" height="{height}" fill="white"/>',
        polyline("train", range(n_train), actual[:n_train]),
        polyline("test", test_idx, actual[n_train:]),
        polyline("prediction", test_idx, predictions),
        f'  <line class="split" x1="{split_x}" y1="{pad}" x2="{split_x}" '
        f'y2="{height - pad}" stroke="#555" stroke-dasharray="4 4"/>',
        f'  <text x="{pad}" y="{pad - 12}" font-size="14">{escape(title)}</text>',
        "</svg>",
        "",
    ])
