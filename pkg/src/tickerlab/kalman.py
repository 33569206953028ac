"""Scalar Kalman filter with a random-walk state model.

The state is the day's price; the transition is the identity, the process
variance for day ``t`` is ``process_scale`` times the population variance of
the ``variance_window`` prices before ``t``, and the measurement variance is a
small constant.  The filter runs on raw prices.

The first ``variance_window`` days only seed the variance estimate: the state
starts at the last of them with variance ``initial_variance`` and the first
forecast is for day ``variance_window``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import InsufficientHistory, TooShort


@dataclass(frozen=True)
class KalmanConfig:
    """Filter settings.

    ``measurement_variance=None`` means ``1e-4 * mean(price)**2``, resolved
    against the prices given to :meth:`resolve`.
    """
    measurement_variance: Optional[float] = None
    process_scale: float = 1.0
    variance_window: int = 3
    initial_variance: float = 0.0

    def __post_init__(self):
        if self.measurement_variance is not None and not self.measurement_variance > 0:
            raise ValueError("measurement_variance must be > 0")
        if not self.process_scale > 0:
            raise ValueError("process_scale must be > 0")
        if self.variance_window < 2:
            raise ValueError("variance_window must be >= 2")
        if not self.initial_variance >= 0:
            raise ValueError("initial_variance must be >= 0")

    def resolve(self, prices) -> "KalmanConfig":
        if self.measurement_variance is not None:
            return self
        r = 1e-4 * float(np.mean(prices)) ** 2
        return KalmanConfig(r, self.process_scale, self.variance_window, self.initial_variance)


@dataclass(frozen=True)
class KalmanState:
    estimate: float
    variance: float


def local_variance(prices, t: int, window: int) -> float:
    """Population variance of ``prices[t - window:t]``."""
    if t < window or t > len(prices):
        raise InsufficientHistory(f"need {window} prices before index {t}")
    return float(np.var(np.asarray(prices[t - window:t], dtype=np.float64)))


def kalman_gain(predicted_variance: float, measurement_variance: float) -> float:
    return predicted_variance / (predicted_variance + measurement_variance)


def kalman_step(state: KalmanState, measurement: float, process_variance: float,
                config: KalmanConfig) -> KalmanState:
    """One predict/update cycle of the random-walk filter."""
    if config.measurement_variance is None:
        raise ValueError("config must carry a resolved measurement_variance")
    prior = state.variance + process_variance
    gain = kalman_gain(prior, config.measurement_variance)
    estimate = state.estimate + gain * (measurement - state.estimate)
    return KalmanState(estimate, (1.0 - gain) * prior)


def filter_one_step_ahead(prices, config: KalmanConfig = KalmanConfig()) -> np.ndarray:
    """Forecast each day from strictly earlier days.

    Returns an array of length ``N - variance_window`` whose entry ``j`` is the
    forecast for ``prices[variance_window + j]``.
    """
    prices = np.asarray(prices, dtype=np.float64)
    w = config.variance_window
    if len(prices) <= w:
        raise TooShort(f"need more than {w} prices, got {len(prices)}")
    config = config.resolve(prices)
    # rolling population variance of prices[t-w:t] for t = w..N-1
    local = np.lib.stride_tricks.sliding_window_view(prices[:-1], w).var(axis=1)

    out = np.empty(len(prices) - w)
    state = KalmanState(prices[w - 1], config.initial_variance)
    for j, t in enumerate(range(w, len(prices))):
        out[j] = state.estimate
        state = kalman_step(state, prices[t], config.process_scale * local[j], config)
    return out


class KalmanForecaster(RegressorMixin, BaseEstimator):
    """One-step-ahead price forecaster.

    ``fit`` only resolves the default measurement variance from the training
    prices; ``predict`` filters whatever series it is given and returns the
    forecasts for positions ``variance_window .. N-1``.
    """

    def __init__(self, measurement_variance=None, process_scale=1.0, variance_window=3,
                 initial_variance=0.0):
        self.measurement_variance = measurement_variance
        self.process_scale = process_scale
        self.variance_window = variance_window
        self.initial_variance = initial_variance

    def fit(self, X, y=None):
        prices = check_array(np.asarray(X, dtype=np.float64).reshape(-1, 1)).ravel()
        self.config_ = KalmanConfig(self.measurement_variance, self.process_scale,
                                    self.variance_window, self.initial_variance).resolve(prices)
        return self

    def predict(self, X):
        check_is_fitted(self, "config_")
        prices = check_array(np.asarray(X, dtype=np.float64).reshape(-1, 1)).ravel()
        return filter_one_step_ahead(prices, self.config_)
