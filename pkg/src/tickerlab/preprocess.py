"""Min-max scaling, sliding windows and chronological splits.

The scaler is meant to be fitted on the training partition only and then
applied to the whole series, so test-period values can land outside [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateRange, EmptyPartition, TooShort


@dataclass(frozen=True)
class ScalingParams:
    min_value: float
    max_value: float

    def __post_init__(self):
        if not self.max_value > self.min_value:
            raise DegenerateRange(f"max {self.max_value} is not above min {self.min_value}")

    @property
    def span(self):
        return self.max_value - self.min_value


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.75

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised view of a scaled series.

    ``inputs[k]`` holds ``series[k0 + k : k0 + k + window]`` with shape
    ``(window, 1)`` and ``targets[k]`` the value right after it;
    ``target_index[k]`` is that value's position in the source series.
    """
    inputs: np.ndarray
    targets: np.ndarray
    window: int
    target_index: np.ndarray

    def __len__(self):
        return len(self.targets)

    def subset(self, mask):
        return WindowedDataset(self.inputs[mask], self.targets[mask], self.window,
                               self.target_index[mask])


def _as_1d(values):
    return check_array(np.asarray(values, dtype=np.float64).reshape(-1, 1),
                       ensure_2d=True, ensure_min_samples=0).ravel()


def fit_scaler(train_values) -> ScalingParams:
    values = _as_1d(train_values)
    if len(values) < 2:
        raise TooShort(f"need at least 2 values to fit a scaler, got {len(values)}")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        raise DegenerateRange(f"constant series ({lo})")
    return ScalingParams(lo, hi)


def transform(values, params: ScalingParams) -> np.ndarray:
    return (np.asarray(values, dtype=np.float64) - params.min_value) / params.span


def inverse_transform(scaled, params: ScalingParams) -> np.ndarray:
    return np.asarray(scaled, dtype=np.float64) * params.span + params.min_value


def make_windows(scaled, window: int) -> WindowedDataset:
    scaled = np.asarray(scaled, dtype=np.float64).ravel()
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(scaled) <= window:
        raise TooShort(f"series of length {len(scaled)} has no target for window {window}")
    inputs = np.lib.stride_tricks.sliding_window_view(scaled[:-1], window).copy()
    return WindowedDataset(inputs[:, :, None], scaled[window:].copy(), window,
                           np.arange(window, len(scaled)))


def train_size(n: int, spec: SplitSpec = SplitSpec()) -> int:
    """Length of the training partition, ``floor(fraction * n)``."""
    n_train = int(np.floor(spec.train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise EmptyPartition(f"{n} values split at {spec.train_fraction} leave an empty side")
    return n_train


def chrono_split(values, spec: SplitSpec = SplitSpec()):
    values = np.asarray(values)
    n_train = train_size(len(values), spec)
    return values[:n_train], values[n_train:]


def split_windows(dataset: WindowedDataset, n_train: int):
    """Windows whose target falls in the training partition, then the rest.

    Test windows keep the last training days as context, so the first test
    prediction is a genuine next-day forecast.
    """
    in_train = dataset.target_index < n_train
    train, test = dataset.subset(in_train), dataset.subset(~in_train)
    if len(train) == 0 or len(test) == 0:
        raise EmptyPartition(f"split at {n_train} leaves an empty window set")
    return train, test


class PriceScaler(TransformerMixin, BaseEstimator):
    """Estimator wrapper around :func:`fit_scaler` for 1-D price arrays.

    Accepts either a flat sequence or an ``(n, 1)`` column.
    """

    def fit(self, X, y=None):
        self.params_ = fit_scaler(X)
        self.data_min_ = self.params_.min_value
        self.data_max_ = self.params_.max_value
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        return transform(_as_1d(X), self.params_)

    def inverse_transform(self, X):
        check_is_fitted(self, "params_")
        return inverse_transform(np.asarray(X, dtype=np.float64).ravel(), self.params_)
