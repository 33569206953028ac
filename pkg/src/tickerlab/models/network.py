"""The four forecasting architectures as forward/backward pairs over a flat
dict of named parameter arrays."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from ..neural import (
    Conv1dParams,
    DenseParams,
    LstmCellParams,
    conv1d_backward,
    conv1d_forward,
    dense_backward,
    dense_forward,
    lstm_backward,
    lstm_sequence_forward,
)
from .spec import ModelSpec

FEATURES = 1


def _group(params, prefix):
    head = prefix + "."
    return {k[len(head):]: v for k, v in params.items() if k.startswith(head)}


def _flatten(prefix, arrays):
    return {f"{prefix}.{k}": v for k, v in arrays.items()}


def init_params(spec: ModelSpec, seed: int) -> dict:
    """Glorot-uniform weights, zero biases except forget gates at 1."""
    rng = np.random.default_rng(seed)
    params = {}
    arch = spec.architecture
    if arch == "CnnLstm":
        params.update(_flatten("conv", Conv1dParams.initialize(
            rng, FEATURES, spec.filters, spec.kernel_width).arrays()))
        lstm_in = spec.filters
    else:
        lstm_in = FEATURES
    params.update(_flatten("lstm", LstmCellParams.initialize(rng, spec.units, lstm_in).arrays()))
    if arch == "DualLstm":
        params.update(_flatten("lstm2", LstmCellParams.initialize(
            rng, spec.units2, spec.units).arrays()))
    if arch == "BiLstm":
        params.update(_flatten("lstm_rev", LstmCellParams.initialize(
            rng, spec.units, FEATURES).arrays()))
    params.update(_flatten("dense", DenseParams.initialize(rng, spec.head_inputs, 1).arrays()))
    return params


def forward(spec: ModelSpec, params: dict, inputs):
    """Scaled next-day prediction for each window.

    ``inputs`` has shape ``(..., window, 1)``; returns ``(outputs, cache)``
    with ``outputs`` of shape ``(...)``.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim < 2 or inputs.shape[-2:] != (spec.window, FEATURES):
        raise ShapeMismatch(f"expected (..., {spec.window}, {FEATURES}) windows, "
                            f"got {inputs.shape}")
    arch = spec.architecture
    lstm = LstmCellParams.from_arrays(_group(params, "lstm"))
    cache = {}
    if arch == "CnnLstm":
        conv = Conv1dParams.from_arrays(_group(params, "conv"))
        seq, cache["conv_pre"] = conv1d_forward(inputs, conv)
    else:
        seq = inputs
    if arch == "DualLstm":
        _, hs, cache["lstm"] = lstm_sequence_forward(seq, lstm)
        lstm2 = LstmCellParams.from_arrays(_group(params, "lstm2"))
        features, _, cache["lstm2"] = lstm_sequence_forward(hs, lstm2)
    elif arch == "BiLstm":
        h_fwd, _, cache["lstm"] = lstm_sequence_forward(seq, lstm)
        rev = LstmCellParams.from_arrays(_group(params, "lstm_rev"))
        h_rev, _, cache["lstm_rev"] = lstm_sequence_forward(seq[..., ::-1, :], rev)
        features = np.concatenate([h_fwd, h_rev], axis=-1)
    else:
        features, _, cache["lstm"] = lstm_sequence_forward(seq, lstm)
    dense = DenseParams.from_arrays(_group(params, "dense"))
    out = dense_forward(features, dense)[..., 0]
    cache.update(inputs=inputs, seq=seq, features=features)
    return out, cache


def backward(spec: ModelSpec, params: dict, grad_output, cache) -> dict:
    """Gradients of ``Σ grad_output * outputs`` for every parameter."""
    arch = spec.architecture
    grads = {}
    dense = DenseParams.from_arrays(_group(params, "dense"))
    g_dense, d_features = dense_backward(np.asarray(grad_output)[..., None],
                                         cache["features"], dense)
    grads.update(_flatten("dense", g_dense.arrays()))
    lstm = LstmCellParams.from_arrays(_group(params, "lstm"))
    if arch == "DualLstm":
        lstm2 = LstmCellParams.from_arrays(_group(params, "lstm2"))
        g2, d_hs = lstm_backward(d_features, cache["lstm2"], lstm2)
        grads.update(_flatten("lstm2", g2.arrays()))
        g1, d_seq = lstm_backward(d_hs, cache["lstm"], lstm, per_step=True)
    elif arch == "BiLstm":
        units = spec.units
        g1, d_seq = lstm_backward(d_features[..., :units], cache["lstm"], lstm)
        rev = LstmCellParams.from_arrays(_group(params, "lstm_rev"))
        g_rev, d_seq_rev = lstm_backward(d_features[..., units:], cache["lstm_rev"], rev)
        grads.update(_flatten("lstm_rev", g_rev.arrays()))
        d_seq = d_seq + d_seq_rev[..., ::-1, :]
    else:
        g1, d_seq = lstm_backward(d_features, cache["lstm"], lstm)
    grads.update(_flatten("lstm", g1.arrays()))
    if arch == "CnnLstm":
        conv = Conv1dParams.from_arrays(_group(params, "conv"))
        g_conv, _ = conv1d_backward(d_seq, cache["inputs"], cache["conv_pre"], conv)
        grads.update(_flatten("conv", g_conv.arrays()))
    return {k: grads[k] for k in params}
