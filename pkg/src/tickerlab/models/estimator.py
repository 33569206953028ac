from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..preprocess import fit_scaler, make_windows, transform
from .spec import ModelSpec, TrainConfig
from .training import TrainedModel, build, predict_one_step_series, train


def _prices(X):
    return check_array(np.asarray(X, dtype=np.float64).reshape(-1, 1)).ravel()


class LstmForecaster(RegressorMixin, BaseEstimator):
    """One-step-ahead forecaster backed by one of the four LSTM architectures.

    ``fit(prices)`` fits the min-max scaler on ``prices``, windows them and
    trains; ``predict(prices)`` returns forecasts for positions
    ``window .. N-1`` of any series, each made from the true preceding days.

    Examples
    --------
    >>> f = LstmForecaster("SingleLstm", units=8, epochs=2).fit(train_prices)
    >>> f.predict(all_prices)[n_train - f.window:]   # test-period forecasts
    """

    def __init__(self, architecture="SingleLstm", units=64, units2=64, filters=64,
                 kernel_width=2, window=3, epochs=100, learning_rate=1e-3, batch_size=32,
                 early_stop_patience=10, validation_fraction=0.1, clip_norm=1.0,
                 random_state=0):
        self.architecture = architecture
        self.units = units
        self.units2 = units2
        self.filters = filters
        self.kernel_width = kernel_width
        self.window = window
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.early_stop_patience = early_stop_patience
        self.validation_fraction = validation_fraction
        self.clip_norm = clip_norm
        self.random_state = random_state

    def model_spec(self) -> ModelSpec:
        return ModelSpec(self.architecture, self.units, self.units2, self.filters,
                         self.kernel_width, self.window)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.learning_rate, self.batch_size,
                           int(self.random_state), self.early_stop_patience,
                           self.validation_fraction, self.clip_norm)

    def fit(self, X, y=None):
        prices = _prices(X)
        spec, config = self.model_spec(), self.train_config()
        scaler = fit_scaler(prices)
        data = make_windows(transform(prices, scaler), spec.window)
        self.model_ = train(build(spec, config.seed), data, config, scaler)
        return self

    @classmethod
    def from_model(cls, model: TrainedModel):
        """Wrap an already trained (e.g. loaded) model."""
        s = model.spec
        cfg = model.fingerprint.get("train_config", {})
        est = cls(s.architecture, s.units, s.units2, s.filters, s.kernel_width, s.window,
                  **{k: cfg[k] for k in ("epochs", "learning_rate", "batch_size",
                                         "early_stop_patience", "validation_fraction",
                                         "clip_norm") if k in cfg},
                  random_state=model.fingerprint.get("seed", 0))
        est.model_ = model
        return est

    def predict(self, X):
        check_is_fitted(self, "model_")
        prices = _prices(X)
        scaled = transform(prices, self.model_.scaler)
        return predict_one_step_series(self.model_, scaled, range(self.model_.spec.window,
                                                                  len(prices)))
