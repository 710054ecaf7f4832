"""Numeric substrate: tape autodiff, Adam, metrics and gradient checking."""

from .gradcheck import GradCheckReport, finite_diff_check
from .metrics import MetricsReport, auc, f1_acc
from .params import AdamState, ParamStore, adam_step
from .tensor import (
    Tensor,
    add,
    backward,
    gelu,
    layer_norm,
    linear,
    linear_map,
    masked_mean,
    matmul,
    softmax,
    softmax_cross_entropy,
    total,
    weighted_sum,
)

__all__ = [
    "AdamState",
    "GradCheckReport",
    "MetricsReport",
    "ParamStore",
    "Tensor",
    "adam_step",
    "add",
    "auc",
    "backward",
    "f1_acc",
    "finite_diff_check",
    "gelu",
    "layer_norm",
    "linear",
    "linear_map",
    "masked_mean",
    "matmul",
    "softmax",
    "softmax_cross_entropy",
    "total",
    "weighted_sum",
]
