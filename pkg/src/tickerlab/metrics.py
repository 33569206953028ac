"""RMSE, MAE and R² on aligned prediction/actual pairs, in price units."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConstantActuals, Empty, LengthMismatch


@dataclass(frozen=True)
class MetricsReport:
    rmse: float
    mae: float
    r_squared: float
    n: int

    def as_dict(self):
        return asdict(self)


def _pair(pred, actual):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if pred.shape != actual.shape:
        raise LengthMismatch(f"{len(pred)} predictions vs {len(actual)} actuals")
    if pred.size == 0:
        raise Empty("no prediction/actual pairs")
    if not (np.isfinite(pred).all() and np.isfinite(actual).all()):
        raise ValueError("non-finite values in metric inputs")
    return pred, actual


def rmse(pred, actual) -> float:
    pred, actual = _pair(pred, actual)
    err = np.abs(pred - actual)
    scale = err.max()
    if scale == 0.0:
        return 0.0
    # scaled so tiny or huge errors neither underflow nor overflow when squared
    return float(scale * np.sqrt(np.mean((err / scale) ** 2)))


def mae(pred, actual) -> float:
    pred, actual = _pair(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def r_squared(pred, actual) -> float:
    """Coefficient of determination about the mean of ``actual``."""
    pred, actual = _pair(pred, actual)
    if actual.size < 2:
        raise Empty("R² needs at least two pairs")
    total = np.sum((actual - actual.mean()) ** 2)
    if total == 0.0:
        raise ConstantActuals("actual values are constant")
    return float(1.0 - np.sum((actual - pred) ** 2) / total)


def evaluate(pred, actual) -> MetricsReport:
    pred, actual = _pair(pred, actual)
    return MetricsReport(rmse(pred, actual), mae(pred, actual), r_squared(pred, actual),
                         int(pred.size))
