"""SimpleNet: four conv(3x3)+ReLU+maxpool(2x2) stages, FC-1024, FC-10.

Parameters live in a name -> array mapping. Conv weights are
``(out, in, 3, 3)``; FC weights are ``(fan_in, fan_out)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError, ShapeError
from . import kernels

CONV_CHANNELS = (16, 16, 32, 32)
HIDDEN = 1024
N_CLASSES = 10
LAYER_NAMES = (
    "conv1.weight", "conv1.bias",
    "conv2.weight", "conv2.bias",
    "conv3.weight", "conv3.bias",
    "conv4.weight", "conv4.bias",
    "fc1.weight", "fc1.bias",
    "fc2.weight", "fc2.bias",
)


def spatial_sizes(input_size):
    """Feature-map side after each of the four pooling stages."""
    sizes = []
    s = input_size
    for _ in CONV_CHANNELS:
        s //= 2
        sizes.append(s)
    return sizes


def flatten_dim(input_size):
    return CONV_CHANNELS[-1] * spatial_sizes(input_size)[-1] ** 2


def layer_shapes(input_size):
    shapes = {}
    c_in = 1
    for i, c_out in enumerate(CONV_CHANNELS, start=1):
        shapes[f"conv{i}.weight"] = (c_out, c_in, 3, 3)
        shapes[f"conv{i}.bias"] = (c_out,)
        c_in = c_out
    shapes["fc1.weight"] = (flatten_dim(input_size), HIDDEN)
    shapes["fc1.bias"] = (HIDDEN,)
    shapes["fc2.weight"] = (HIDDEN, N_CLASSES)
    shapes["fc2.bias"] = (N_CLASSES,)
    return shapes


@dataclass
class SimpleNetParams:
    input_size: int
    tensors: dict

    def __post_init__(self):
        expected = layer_shapes(self.input_size)
        for name in LAYER_NAMES:
            if name not in self.tensors:
                raise ShapeError(f"missing parameter {name}")
            if self.tensors[name].shape != expected[name]:
                raise ShapeError(f"{name} has shape {self.tensors[name].shape}, expected {expected[name]}")

    def __getitem__(self, name):
        return self.tensors[name]

    @property
    def dtype(self):
        return self.tensors["fc2.weight"].dtype

    def astype(self, dtype):
        return SimpleNetParams(self.input_size, {k: v.astype(dtype) for k, v in self.tensors.items()})

    def copy(self):
        return SimpleNetParams(self.input_size, {k: v.copy() for k, v in self.tensors.items()})

    def items(self):
        return ((name, self.tensors[name]) for name in LAYER_NAMES)

    def all_finite(self):
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())

    def equal(self, other):
        return self.input_size == other.input_size and all(
            np.array_equal(a, other.tensors[k]) for k, a in self.items()
        )


def init_params(input_size, seed=0, dtype=np.float32):
    """He-normal weights, zero biases."""
    if input_size < 16:
        raise ConfigurationError(f"input size {input_size} is too small for four 2x2 pooling stages (need >= 16)")
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, shape in layer_shapes(input_size).items():
        if name.endswith(".bias"):
            tensors[name] = np.zeros(shape, dtype=dtype)
            continue
        fan_in = int(np.prod(shape[1:])) if name.startswith("conv") else shape[0]
        std = np.sqrt(2.0 / fan_in)
        tensors[name] = (rng.standard_normal(shape) * std).astype(dtype)
    return SimpleNetParams(input_size, tensors)


def _as_batch(params, images):
    x = np.asarray(images)
    if x.ndim == 2:
        x = x[None]
    if x.ndim == 3:
        x = x[:, None]
    if x.ndim != 4 or x.shape[1] != 1:
        raise ShapeError(f"expected a batch of single-channel images, got shape {np.shape(images)}")
    if x.shape[2] != params.input_size or x.shape[3] != params.input_size:
        raise ShapeError(f"images are {x.shape[2]}x{x.shape[3]}, network expects {params.input_size}x{params.input_size}")
    return x.astype(params.dtype, copy=False)


def forward(params, images):
    """Logits ``(batch, 10)`` and the activation cache used by ``backward``."""
    x = _as_batch(params, images)
    cache = []
    for i in range(1, len(CONV_CHANNELS) + 1):
        z = kernels.conv3x3_forward(x, params[f"conv{i}.weight"], params[f"conv{i}.bias"])
        a = np.maximum(z, 0)
        p, arg = kernels.maxpool2_forward(a)
        cache.append((x, a, arg))
        x = p
    flat = x.reshape(x.shape[0], -1)
    h_pre = flat @ params["fc1.weight"] + params["fc1.bias"]
    h = np.maximum(h_pre, 0)
    logits = h @ params["fc2.weight"] + params["fc2.bias"]
    return logits, {"conv": cache, "pooled_shape": x.shape, "flat": flat, "h_pre": h_pre, "h": h}


def log_softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(logits, labels):
    labels = _check_labels(labels, len(logits))
    return float(-log_softmax(logits)[np.arange(len(labels)), labels].mean())


def _check_labels(labels, n):
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ShapeError(f"expected {n} labels, got shape {labels.shape}")
    if labels.dtype.kind not in "iu" or np.any(labels < 0) or np.any(labels >= N_CLASSES):
        raise DomainError("labels must be integers in 0..9")
    return labels.astype(np.intp)


def backward(params, cache, dlogits):
    grads = {}
    h, h_pre, flat = cache["h"], cache["h_pre"], cache["flat"]
    grads["fc2.weight"] = h.T @ dlogits
    grads["fc2.bias"] = dlogits.sum(axis=0)
    dh = (dlogits @ params["fc2.weight"].T) * (h_pre > 0)
    grads["fc1.weight"] = flat.T @ dh
    grads["fc1.bias"] = dh.sum(axis=0)
    d = (dh @ params["fc1.weight"].T).reshape(cache["pooled_shape"])
    for i in range(len(CONV_CHANNELS), 0, -1):
        x, a, arg = cache["conv"][i - 1]
        da = kernels.maxpool2_backward(d, arg, a.shape)
        dz = da * (a > 0)
        d, dw, db = kernels.conv3x3_backward(dz, x, params[f"conv{i}.weight"])
        grads[f"conv{i}.weight"] = dw
        grads[f"conv{i}.bias"] = db
    dtype = params.dtype
    return SimpleNetParams(params.input_size, {k: v.astype(dtype, copy=False) for k, v in grads.items()})


def loss_and_gradients(params, images, labels):
    """Mean softmax cross-entropy over the batch and its exact gradient."""
    logits, cache = forward(params, images)
    labels = _check_labels(labels, len(logits))
    logp = log_softmax(logits)
    n = len(labels)
    loss = float(-logp[np.arange(n), labels].mean())
    dlogits = np.exp(logp)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, backward(params, cache, dlogits)


def predict(params, images, batch_size=256):
    images = np.asarray(images)
    out = []
    for start in range(0, len(images), batch_size):
        logits, _ = forward(params, images[start : start + batch_size])
        out.append(logits.argmax(axis=1))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.intp)
