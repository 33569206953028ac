"""LSTM cell, its unrolled sequence form, and backpropagation through time.

Gate order everywhere is forget, input, candidate, output::

    f = σ(W_f x + U_f h + b_f)      i = σ(W_i x + U_i h + b_i)
    g = tanh(W_c x + U_c h + b_c)   o = σ(W_o x + U_o h + b_o)
    c' = f ⊙ c + i ⊙ g              h' = o ⊙ tanh(c')
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import CacheMismatch, ShapeMismatch
from .core import check_finite, expect_last_dim, glorot_uniform, sigmoid, sum_outer

GATES = ("f", "i", "c", "o")


@dataclass
class LstmCellParams:
    """Stacked gate parameters.

    ``input_weights`` is ``(4, hidden, input)``, ``recurrent_weights``
    ``(4, hidden, hidden)`` and ``biases`` ``(4, hidden)``, indexed by
    :data:`GATES`.
    """
    input_weights: np.ndarray
    recurrent_weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        W, U, b = self.input_weights, self.recurrent_weights, self.biases
        if W.ndim != 3 or W.shape[0] != 4:
            raise ShapeMismatch(f"input_weights must be (4, hidden, input), got {W.shape}")
        hidden = W.shape[1]
        if U.shape != (4, hidden, hidden) or b.shape != (4, hidden):
            raise ShapeMismatch(f"inconsistent LSTM shapes {W.shape}, {U.shape}, {b.shape}")

    @property
    def hidden_size(self):
        return self.input_weights.shape[1]

    @property
    def input_size(self):
        return self.input_weights.shape[2]

    def gate(self, name):
        k = GATES.index(name)
        return self.input_weights[k], self.recurrent_weights[k], self.biases[k]

    W_f = property(lambda self: self.input_weights[0])
    W_i = property(lambda self: self.input_weights[1])
    W_c = property(lambda self: self.input_weights[2])
    W_o = property(lambda self: self.input_weights[3])
    U_f = property(lambda self: self.recurrent_weights[0])
    U_i = property(lambda self: self.recurrent_weights[1])
    U_c = property(lambda self: self.recurrent_weights[2])
    U_o = property(lambda self: self.recurrent_weights[3])
    b_f = property(lambda self: self.biases[0])
    b_i = property(lambda self: self.biases[1])
    b_c = property(lambda self: self.biases[2])
    b_o = property(lambda self: self.biases[3])

    def arrays(self):
        return {"W": self.input_weights, "U": self.recurrent_weights, "b": self.biases}

    @classmethod
    def from_arrays(cls, arrays):
        return cls(arrays["W"], arrays["U"], arrays["b"])

    @classmethod
    def zeros(cls, hidden, inputs):
        return cls(np.zeros((4, hidden, inputs)), np.zeros((4, hidden, hidden)),
                   np.zeros((4, hidden)))

    @classmethod
    def initialize(cls, rng, hidden, inputs, forget_bias=1.0):
        W = np.stack([glorot_uniform(rng, (hidden, inputs), inputs, hidden) for _ in GATES])
        U = np.stack([glorot_uniform(rng, (hidden, hidden), hidden, hidden) for _ in GATES])
        b = np.zeros((4, hidden))
        b[0] = forget_bias
        return cls(W, U, b)


class LstmStepState(NamedTuple):
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden, batch_shape=()):
        shape = tuple(batch_shape) + (hidden,)
        return cls(np.zeros(shape), np.zeros(shape))


class LstmStepCache(NamedTuple):
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    f: np.ndarray
    i: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def lstm_cell_forward(x, prev: LstmStepState, p: LstmCellParams):
    x = np.asarray(x, dtype=np.float64)
    expect_last_dim("x", x, p.input_size)
    expect_last_dim("h", prev.h, p.hidden_size)
    expect_last_dim("c", prev.c, p.hidden_size)
    # (..., 4, hidden) pre-activations in one contraction per operand
    pre = (np.einsum("...i,ghi->...gh", x, p.input_weights)
           + np.einsum("...j,ghj->...gh", prev.h, p.recurrent_weights) + p.biases)
    f = sigmoid(pre[..., 0, :])
    i = sigmoid(pre[..., 1, :])
    g = np.tanh(pre[..., 2, :])
    o = sigmoid(pre[..., 3, :])
    c = f * prev.c + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    check_finite("LSTM cell state", c, h)
    return LstmStepState(h, c), LstmStepCache(x, prev.h, prev.c, f, i, g, o, c, tanh_c)


def lstm_cell_backward(dh, dc, cache: LstmStepCache, p: LstmCellParams):
    """Reverse one cell step.

    Returns ``(dW, dU, db, dx, dh_prev, dc_prev)``.
    """
    x, h_prev, c_prev, f, i, g, o, c, tanh_c = cache
    d_o = dh * tanh_c
    dc_total = dc + dh * o * (1.0 - tanh_c ** 2)
    da = np.stack([
        dc_total * c_prev * f * (1.0 - f),
        dc_total * g * i * (1.0 - i),
        dc_total * i * (1.0 - g ** 2),
        d_o * o * (1.0 - o),
    ], axis=-2)  # (..., 4, hidden)
    dW = np.stack([sum_outer(da[..., k, :], x) for k in range(4)])
    dU = np.stack([sum_outer(da[..., k, :], h_prev) for k in range(4)])
    db = da.reshape(-1, 4, da.shape[-1]).sum(axis=0)
    dx = np.einsum("...gh,ghi->...i", da, p.input_weights)
    dh_prev = np.einsum("...gh,ghj->...j", da, p.recurrent_weights)
    dc_prev = dc_total * f
    return dW, dU, db, dx, dh_prev, dc_prev


def lstm_sequence_forward(inputs, p: LstmCellParams, initial: LstmStepState | None = None):
    """Left fold of :func:`lstm_cell_forward` over axis ``-2`` of ``inputs``.

    Returns ``(final_h, hidden_states, caches)`` where ``hidden_states`` has
    shape ``(..., timesteps, hidden)``.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim < 2 or inputs.shape[-2] < 1:
        raise ShapeMismatch(f"inputs must be (..., timesteps>=1, features), got {inputs.shape}")
    if initial is None:
        initial = LstmStepState.zeros(p.hidden_size, inputs.shape[:-2])
    state, caches, hs = initial, [], []
    for t in range(inputs.shape[-2]):
        state, cache = lstm_cell_forward(inputs[..., t, :], state, p)
        caches.append(cache)
        hs.append(state.h)
    return state.h, np.stack(hs, axis=-2), caches


def lstm_backward(grad_output, caches, p: LstmCellParams, per_step: bool = False):
    """Backpropagation through time for :func:`lstm_sequence_forward`.

    ``grad_output`` is the gradient of the loss with respect to the final
    hidden state, or, with ``per_step=True``, with respect to every hidden
    state (shape ``(..., timesteps, hidden)``).

    Returns ``(grads, d_inputs)`` with ``grads`` shaped like ``p``.
    """
    if not caches:
        raise CacheMismatch("empty cache list")
    grad_output = np.asarray(grad_output, dtype=np.float64)
    h_shape = caches[-1].c.shape
    steps = len(caches)
    if per_step:
        if grad_output.shape != h_shape[:-1] + (steps,) + h_shape[-1:]:
            raise CacheMismatch(f"per-step gradient {grad_output.shape} does not match "
                                f"{steps} cached steps of shape {h_shape}")
    elif grad_output.shape != h_shape:
        raise CacheMismatch(f"gradient {grad_output.shape} does not match hidden {h_shape}")
    if caches[0].x.shape[-1] != p.input_size or h_shape[-1] != p.hidden_size:
        raise CacheMismatch("caches were produced with different parameters")

    dW = np.zeros_like(p.input_weights)
    dU = np.zeros_like(p.recurrent_weights)
    db = np.zeros_like(p.biases)
    dxs = [None] * steps
    dh = np.zeros(h_shape)
    dc = np.zeros(h_shape)
    for t in reversed(range(steps)):
        if per_step:
            dh = dh + grad_output[..., t, :]
        elif t == steps - 1:
            dh = dh + grad_output
        gW, gU, gb, dxs[t], dh, dc = lstm_cell_backward(dh, dc, caches[t], p)
        dW += gW
        dU += gU
        db += gb
    return LstmCellParams(dW, dU, db), np.stack(dxs, axis=-2)
