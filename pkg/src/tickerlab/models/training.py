"""Mini-batch Adam training with early stopping, and one-step-ahead prediction."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import InsufficientContext, NonFiniteActivation, NonFiniteLoss, ShapeMismatch
from ..neural import AdamState, adam_update, clip_global_norm
from ..preprocess import ScalingParams, WindowedDataset, inverse_transform
from . import network
from .spec import ModelSpec, TrainConfig

log = logging.getLogger(__name__)


@dataclass
class LossHistory:
    """Per-epoch mean squared error in scaled units; entry 0 is the untrained
    model.  ``validation`` is empty when no validation split was used."""
    train: list = field(default_factory=list)
    validation: list = field(default_factory=list)
    best_epoch: int = 0
    clipped_updates: int = 0

    def as_dict(self):
        return {"train": list(self.train), "validation": list(self.validation),
                "best_epoch": self.best_epoch, "clipped_updates": self.clipped_updates}

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["train"]), list(d["validation"]), int(d["best_epoch"]),
                   int(d["clipped_updates"]))


@dataclass
class UntrainedModel:
    spec: ModelSpec
    params: dict
    seed: int


@dataclass
class TrainedModel:
    spec: ModelSpec
    params: dict
    scaler: ScalingParams
    fingerprint: dict
    loss_history: LossHistory

    def predict_scaled(self, inputs):
        return network.forward(self.spec, self.params, inputs)[0]

    def predict_prices(self, inputs):
        return inverse_transform(self.predict_scaled(inputs), self.scaler)


def build(spec: ModelSpec, seed: int) -> UntrainedModel:
    return UntrainedModel(spec, network.init_params(spec, seed), seed)


def config_hash(spec: ModelSpec, config: TrainConfig) -> str:
    blob = json.dumps({"spec": spec.as_dict(), "train": config.as_dict()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def data_hash(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


def mse(spec, params, inputs, targets, chunk=4096):
    total = 0.0
    for s in range(0, len(targets), chunk):
        out = network.forward(spec, params, inputs[s:s + chunk])[0]
        with np.errstate(over="ignore"):  # an inf total is reported as NonFiniteLoss
            total += float(np.sum((out - targets[s:s + chunk]) ** 2))
    return total / len(targets)


def train(model: UntrainedModel, train_data: WindowedDataset, config: TrainConfig,
          scaler: ScalingParams) -> TrainedModel:
    """Fit ``model`` to the windows' scaled targets.

    The last ``validation_fraction`` of the windows (chronologically) is held
    out for early stopping; the returned weights are those of the epoch with
    the lowest validation loss (training loss when there is no hold-out).
    """
    spec = model.spec
    inputs, targets = train_data.inputs, train_data.targets
    if len(targets) == 0:
        raise ShapeMismatch("empty training set")
    if inputs.shape[1:] != (spec.window, network.FEATURES):
        raise ShapeMismatch(f"windows of shape {inputs.shape[1:]} do not fit {spec}")

    n_val = int(np.floor(config.validation_fraction * len(targets)))
    if n_val >= len(targets):
        n_val = 0
    n_fit = len(targets) - n_val
    x_fit, y_fit = inputs[:n_fit], targets[:n_fit]
    x_val, y_val = inputs[n_fit:], targets[n_fit:]

    rng = np.random.default_rng([config.seed, 1])
    params = {k: v.copy() for k, v in model.params.items()}
    adam = AdamState.zeros_like(params)
    history = LossHistory()

    def record(epoch):
        try:
            tr = mse(spec, params, x_fit, y_fit)
            va = mse(spec, params, x_val, y_val) if n_val else None
        except NonFiniteActivation:
            raise NonFiniteLoss(epoch) from None
        if not np.isfinite(tr) or (va is not None and not np.isfinite(va)):
            raise NonFiniteLoss(epoch)
        history.train.append(tr)
        if va is not None:
            history.validation.append(va)
        return va if va is not None else tr

    best = record(0)
    best_params, wait, step = params, 0, 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_fit)
        for start in range(0, n_fit, config.batch_size):
            idx = order[start:start + config.batch_size]
            # overflow here surfaces as a non-finite gradient norm below
            with np.errstate(over="ignore", invalid="ignore"):
                try:
                    out, cache = network.forward(spec, params, x_fit[idx])
                    resid = out - y_fit[idx]
                    grads = network.backward(spec, params, 2.0 * resid / len(idx), cache)
                except NonFiniteActivation:
                    raise NonFiniteLoss(epoch) from None
                grads, norm = clip_global_norm(grads, config.clip_norm)
            if not np.isfinite(norm):
                raise NonFiniteLoss(epoch)
            history.clipped_updates += norm > config.clip_norm
            step += 1
            params, adam = adam_update(params, grads, adam, step, lr=config.learning_rate)
        score = record(epoch)
        if score < best:
            best, best_params, wait = score, params, 0
            history.best_epoch = epoch
        else:
            wait += 1
            if wait >= config.early_stop_patience:
                log.info("early stop at epoch %d (best %d)", epoch, history.best_epoch)
                break
    log.info("%s trained: best epoch %d, %d clipped updates", spec.architecture,
             history.best_epoch, history.clipped_updates)

    fingerprint = {"seed": int(config.seed), "config_hash": config_hash(spec, config),
                   "data_hash": data_hash(inputs, targets), "train_config": config.as_dict()}
    return TrainedModel(spec, best_params, scaler, fingerprint, history)


def predict_one_step_series(model: TrainedModel, full_scaled_series, test_range) -> np.ndarray:
    """Price-unit forecasts for each index in ``test_range`` from the true
    scaled values of the preceding ``window`` days."""
    series = np.asarray(full_scaled_series, dtype=np.float64).ravel()
    idx = np.asarray(list(test_range), dtype=np.int64)
    w = model.spec.window
    if idx.size == 0:
        return np.empty(0)
    if idx.min() < w or idx.max() > len(series):
        raise InsufficientContext(f"indices must lie in [{w}, {len(series)}], got "
                                  f"[{idx.min()}, {idx.max()}]")
    windows = series[idx[:, None] + np.arange(-w, 0)[None, :]][:, :, None]
    return model.predict_prices(windows)
