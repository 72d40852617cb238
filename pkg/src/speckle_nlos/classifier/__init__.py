"""SimpleNet convolutional classifier."""

from .checkpoint import load_params, save_params
from .net import (
    SimpleNetParams,
    cross_entropy,
    flatten_dim,
    forward,
    init_params,
    loss_and_gradients,
    predict,
)
from .train import EvalReport, TrainConfig, evaluate, report_from_predictions, train

__all__ = [
    "EvalReport",
    "SimpleNetParams",
    "TrainConfig",
    "cross_entropy",
    "evaluate",
    "flatten_dim",
    "forward",
    "init_params",
    "load_params",
    "loss_and_gradients",
    "predict",
    "report_from_predictions",
    "save_params",
    "train",
]
