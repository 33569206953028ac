from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatch, WindowTooSmall
from .core import check_finite, expect_last_dim, glorot_uniform, sum_outer


@dataclass
class DenseParams:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray     # (out,)

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeMismatch(f"dense shapes {self.weights.shape}, {self.bias.shape}")

    def arrays(self):
        return {"W": self.weights, "b": self.bias}

    @classmethod
    def from_arrays(cls, arrays):
        return cls(arrays["W"], arrays["b"])

    @classmethod
    def initialize(cls, rng, inputs, outputs):
        return cls(glorot_uniform(rng, (outputs, inputs), inputs, outputs), np.zeros(outputs))


def dense_forward(x, p: DenseParams):
    x = np.asarray(x, dtype=np.float64)
    expect_last_dim("dense input", x, p.weights.shape[1])
    y = x @ p.weights.T + p.bias
    check_finite("dense output", y)
    return y


def dense_backward(grad_out, x, p: DenseParams):
    """Returns ``(DenseParams-shaped grads, dx)``."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    expect_last_dim("dense gradient", grad_out, p.weights.shape[0])
    dW = sum_outer(grad_out, np.asarray(x, dtype=np.float64))
    db = grad_out.reshape(-1, grad_out.shape[-1]).sum(axis=0)
    return DenseParams(dW, db), grad_out @ p.weights


@dataclass
class Conv1dParams:
    kernels: np.ndarray  # (filters, kernel_width, in_channels)
    bias: np.ndarray     # (filters,)

    def __post_init__(self):
        if self.kernels.ndim != 3 or self.bias.shape != (self.kernels.shape[0],):
            raise ShapeMismatch(f"conv1d shapes {self.kernels.shape}, {self.bias.shape}")

    @property
    def kernel_width(self):
        return self.kernels.shape[1]

    def arrays(self):
        return {"K": self.kernels, "b": self.bias}

    @classmethod
    def from_arrays(cls, arrays):
        return cls(arrays["K"], arrays["b"])

    @classmethod
    def initialize(cls, rng, in_channels, filters, kernel_width):
        k = glorot_uniform(rng, (filters, kernel_width, in_channels),
                           kernel_width * in_channels, kernel_width * filters)
        return cls(k, np.zeros(filters))


def conv1d_forward(inputs, p: Conv1dParams):
    """Valid cross-correlation along axis ``-2`` followed by ReLU.

    Returns ``(output, pre_activation)``; the latter is the backward cache.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    expect_last_dim("conv1d input", inputs, p.kernels.shape[2])
    width = p.kernel_width
    if inputs.ndim < 2 or inputs.shape[-2] < width:
        raise WindowTooSmall(f"{inputs.shape[-2] if inputs.ndim > 1 else 0} timesteps "
                             f"cannot hold a kernel of width {width}")
    # (..., out_steps, channels, width)
    patches = np.lib.stride_tricks.sliding_window_view(inputs, width, axis=-2)
    pre = np.einsum("...tck,fkc->...tf", patches, p.kernels) + p.bias
    out = np.maximum(pre, 0.0)
    check_finite("conv1d output", out)
    return out, pre


def conv1d_backward(grad_out, inputs, pre, p: Conv1dParams):
    """Returns ``(Conv1dParams-shaped grads, d_inputs)``."""
    inputs = np.asarray(inputs, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != pre.shape:
        raise ShapeMismatch(f"conv1d gradient {grad_out.shape} vs output {pre.shape}")
    width = p.kernel_width
    d_pre = grad_out * (pre > 0.0)
    patches = np.lib.stride_tricks.sliding_window_view(inputs, width, axis=-2)
    lead = d_pre.ndim - 2
    axes = tuple(range(lead + 1))
    dK = np.tensordot(d_pre, patches, axes=(axes, axes)).transpose(0, 2, 1)
    db = d_pre.reshape(-1, d_pre.shape[-1]).sum(axis=0)
    dx = np.zeros_like(inputs)
    steps = pre.shape[-2]
    for k in range(width):
        dx[..., k:k + steps, :] += d_pre @ p.kernels[:, k, :]
    return Conv1dParams(dK, db), dx
