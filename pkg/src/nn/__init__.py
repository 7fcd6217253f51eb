"""Minimal differentiable building blocks."""

from .gradcheck import grad_check
from .layers import (
    BiLSTM,
    Dense,
    Dropout,
    bilstm_forward,
    cross_entropy_grad,
    dense_forward,
    dropout,
    mean_max_pool,
    mean_max_pool_backward,
    softmax,
    softmax_cross_entropy,
    softmax_cross_entropy_batch,
)
from .optim import Adam, adam_step
from .tensor import Parameter, Rng, derive_rng, make_rng

__all__ = [
    "Adam",
    "BiLSTM",
    "Dense",
    "Dropout",
    "Parameter",
    "Rng",
    "adam_step",
    "bilstm_forward",
    "cross_entropy_grad",
    "dense_forward",
    "derive_rng",
    "dropout",
    "grad_check",
    "make_rng",
    "mean_max_pool",
    "mean_max_pool_backward",
    "softmax",
    "softmax_cross_entropy",
    "softmax_cross_entropy_batch",
]
