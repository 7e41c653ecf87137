"""Minimal reverse-mode NN core: layers, distributions, Adam, verification."""

from .adam import Adam
from .checkpoint import load_tensors, save_tensors
from .functional import (
    categorical_entropy,
    categorical_sample,
    categorical_sample_rows,
    entropy_rows,
    log_softmax_rows,
    softmax,
)
from .gradcheck import GradCheckReport, finite_difference_check
from .layers import Conv2d, Dense, Flatten, ReLU
from .tensor import Tensor, orthogonal

__all__ = [
    "Adam",
    "Conv2d",
    "Dense",
    "Flatten",
    "GradCheckReport",
    "ReLU",
    "Tensor",
    "categorical_entropy",
    "categorical_sample",
    "categorical_sample_rows",
    "entropy_rows",
    "finite_difference_check",
    "load_tensors",
    "log_softmax_rows",
    "orthogonal",
    "save_tensors",
    "softmax",
]
