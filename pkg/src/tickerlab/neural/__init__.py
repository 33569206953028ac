"""From-scratch float64 neural primitives: LSTM with BPTT, dense, conv1d, Adam.

Arrays are plain :class:`numpy.ndarray`; every op accepts arbitrary leading
batch dimensions, so a single sample is just the batch-free case.
"""
from .core import check_finite, glorot_uniform, sigmoid
from .layers import (
    Conv1dParams,
    DenseParams,
    conv1d_backward,
    conv1d_forward,
    dense_backward,
    dense_forward,
)
from .lstm import (
    GATES,
    LstmCellParams,
    LstmStepCache,
    LstmStepState,
    lstm_backward,
    lstm_cell_backward,
    lstm_cell_forward,
    lstm_sequence_forward,
)
from .optim import AdamState, adam_update, clip_global_norm, global_norm

__all__ = [
    "GATES", "AdamState", "Conv1dParams", "DenseParams", "LstmCellParams", "LstmStepCache",
    "LstmStepState", "adam_update", "check_finite", "clip_global_norm", "conv1d_backward",
    "conv1d_forward", "dense_backward", "dense_forward", "glorot_uniform", "global_norm",
    "lstm_backward", "lstm_cell_backward", "lstm_cell_forward", "lstm_sequence_forward",
    "sigmoid",
]
