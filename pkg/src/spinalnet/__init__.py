"""Gradual-input ("spinal") fully-connected layers on a small from-scratch
autodiff library, with exact cost accounting and a benchmark CLI."""

from . import costing, data, layers, modelspec, presets, spinal
from . import tensor, train
from .kernels import BACKEND as KERNEL_BACKEND
from .modelspec import ModelSpec
from .spinal import SpinalConfig, SpinalLayer, build_equivalent_spinal
from .tensor import Tensor

__version__ = "0.1.0"

__all__ = [
    "Tensor", "ModelSpec", "SpinalConfig", "SpinalLayer",
    "build_equivalent_spinal", "KERNEL_BACKEND",
    "tensor", "layers", "spinal", "costing", "data", "train",
    "modelspec", "presets",
]
