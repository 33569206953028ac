import numpy as np

from ..errors import NonFiniteActivation, ShapeMismatch


def sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def check_finite(name, *arrays):
    for a in arrays:
        if not np.isfinite(a).all():
            raise NonFiniteActivation(f"non-finite values in {name}")


def expect_last_dim(name, array, size):
    if array.ndim < 1 or array.shape[-1] != size:
        raise ShapeMismatch(f"{name}: expected trailing dimension {size}, got shape {array.shape}")


def glorot_uniform(rng, shape, fan_in, fan_out):
    """Uniform on ``±sqrt(6 / (fan_in + fan_out))``."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def sum_outer(grad_out, inputs):
    """``Σ_batch grad_out ⊗ inputs`` over all leading dimensions."""
    g = grad_out.reshape(-1, grad_out.shape[-1])
    x = inputs.reshape(-1, inputs.shape[-1])
    return g.T @ x
