"""Adam and global-norm clipping over dicts of named arrays."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params):
        return cls({k: np.zeros_like(a) for k, a in params.items()},
                   {k: np.zeros_like(a) for k, a in params.items()})


def adam_update(params, grads, state: AdamState, step, lr=1e-3, beta1=0.9, beta2=0.999,
                eps=1e-8):
    """Bias-corrected Adam step.

    ``step`` counts from 1.  Returns ``(new_params, new_state)`` and leaves the
    inputs untouched.
    """
    if step < 1:
        raise ValueError("step counts from 1")
    if params.keys() != grads.keys():
        raise ShapeMismatch("parameter and gradient names differ")
    new_params, m_new, v_new = {}, {}, {}
    c1 = 1.0 - beta1 ** step
    c2 = 1.0 - beta2 ** step
    for name, p in params.items():
        g = grads[name]
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        if g.shape != p.shape or m.shape != p.shape or v.shape != p.shape:
            raise ShapeMismatch(f"{name}: parameter {p.shape}, gradient {g.shape}")
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        new_params[name] = p - lr * (m / c1) / (np.sqrt(v / c2) + eps)
        m_new[name], v_new[name] = m, v
    return new_params, AdamState(m_new, v_new)


def global_norm(grads):
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_global_norm(grads, max_norm):
    """Scale all gradients together so their joint L2 norm is at most
    ``max_norm``.  Returns ``(grads, norm_before_clipping)``."""
    norm = global_norm(grads)
    if norm <= max_norm or norm == 0.0:
        return grads, norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm
