"""Mini-batch training and evaluation for SimpleNet."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigurationError, TrainingError
from .net import N_CLASSES, loss_and_gradients, predict


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 10
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    init_seed: int = 0
    shuffle_seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")

    def to_dict(self):
        return asdict(self)


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * math.sqrt(1 - b2**self.t) / (1 - b1**self.t)
        for name, p in params.items():
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= (lr_t * m / (np.sqrt(v) + self.eps)).astype(p.dtype, copy=False)


class SGD:
    def __init__(self, params, lr=1e-2):
        self.lr = lr

    def step(self, params, grads):
        for name, p in params.items():
            p -= (self.lr * grads[name]).astype(p.dtype, copy=False)


def _optimizer(params, cfg):
    if cfg.optimizer == "adam":
        return Adam(params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    return SGD(params, cfg.learning_rate)


def train(params, images, labels, cfg=TrainConfig(), test_images=None, test_labels=None, on_epoch=None):
    """Train a copy of ``params`` and return it with a per-epoch log.

    Each log entry holds ``epoch``, ``loss`` (mean training loss over the
    epoch), ``train_acc`` and, when a test set is given, ``test_acc``.
    ``on_epoch`` is called with each entry as it is produced.
    """
    images = np.asarray(images)
    labels = np.asarray(labels)
    if len(images) == 0:
        raise ConfigurationError("training split is empty")
    params = params.copy()
    opt = _optimizer(params, cfg)
    rng = np.random.default_rng(cfg.shuffle_seed)
    log = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(images))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_gradients(params, images[idx], labels[idx])
            if not math.isfinite(loss):
                raise TrainingError("training loss is not finite", epoch)
            opt.step(params, grads)
            total += loss * len(idx)
        if not params.all_finite():
            raise TrainingError("parameters diverged", epoch)
        entry = {
            "epoch": epoch,
            "loss": total / len(order),
            "train_acc": float(np.mean(predict(params, images) == labels)),
        }
        if test_images is not None and len(test_images):
            entry["test_acc"] = float(np.mean(predict(params, test_images) == np.asarray(test_labels)))
        log.append(entry)
        if on_epoch is not None:
            on_epoch(entry)
    return params, log


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    confusion: np.ndarray
    per_class_accuracy: np.ndarray

    @property
    def total(self):
        return int(self.confusion.sum())

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "n": self.total,
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": [None if math.isnan(a) else float(a) for a in self.per_class_accuracy],
        }


def report_from_predictions(true_labels, predicted):
    """Confusion matrix with true classes on rows, predictions on columns."""
    true_labels = np.asarray(true_labels, dtype=np.intp)
    predicted = np.asarray(predicted, dtype=np.intp)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (true_labels, predicted), 1)
    counts = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(counts > 0, np.diag(confusion) / np.maximum(counts, 1), np.nan)
    accuracy = float(np.trace(confusion) / confusion.sum()) if confusion.sum() else math.nan
    return EvalReport(accuracy, confusion, per_class)


def evaluate(params, images, labels):
    if len(images) == 0:
        raise ConfigurationError("test split is empty")
    return report_from_predictions(labels, predict(params, images))
