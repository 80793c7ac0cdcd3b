"""From-scratch neural toolkit: embeddings, bi-LSTM encoders, MLP heads.

Everything is float64 numpy with hand-written backward passes; no autodiff.
Forward calls cache intermediates on the layer objects for the matching
backward call, so a given layer instance must not be shared across threads
while training or scoring.
"""

from .params import NNError, ParamBank, load_params, save_params
from .layers import (
    MLP,
    BiLSTMStack,
    Embedding,
    LSTM,
    log_softmax,
    sigmoid,
    softmax,
    softmax_cross_entropy,
)
from .training import gradient_check, sgd_step

__all__ = [
    "NNError",
    "ParamBank",
    "load_params",
    "save_params",
    "MLP",
    "BiLSTMStack",
    "Embedding",
    "LSTM",
    "log_softmax",
    "sigmoid",
    "softmax",
    "softmax_cross_entropy",
    "gradient_check",
    "sgd_step",
]
