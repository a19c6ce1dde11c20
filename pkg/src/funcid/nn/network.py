"""Classifier models: presets, inference, loss/gradients, checkpoints.

Three presets cover the study's models: a single-layer perceptron, a
3-layer perceptron (hidden widths 256/128), and the classic 7-layer
conv-pool-dense topology on M x M single-channel inputs.  Input pixels are
min-max normalized per image by default before the first layer; the
normalization mode travels with the model so inference always matches
training.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

from .. import rng
from .layers import (
    AvgPool2D,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    MaxPool2D,
    ReLU,
    Reshape,
    Tanh,
)

PRESETS = ("perceptron1", "perceptron3", "lenet5")

_DTYPE_NAMES = {"float32": np.float32, "float64": np.float64}


class ModelError(ValueError):
    """Invalid model configuration or input."""


@dataclass
class ModelMeta:
    preset: str
    class_count: int
    frame_size: int
    init_seed: int
    input_norm: str  # "minmax" | "raw"
    activation: str  # "relu" | "tanh"
    pooling: str  # "avg" | "max"
    dtype: str  # "float32" | "float64"


class Network:
    """An ordered layer stack with shape-checked parameters."""

    def __init__(self, meta: ModelMeta, layers: list[Layer]):
        self.meta = meta
        self.layers = layers

    # -- parameters -------------------------------------------------------

    def parameters(self) -> list[tuple[int, str, np.ndarray]]:
        out = []
        for i, layer in enumerate(self.layers):
            for name in sorted(layer.params):
                out.append((i, name, layer.params[name]))
        return out

    def parameter_count(self) -> int:
        return sum(p.size for _, _, p in self.parameters())

    def copy(self) -> "Network":
        clone = build_network(self.meta)
        for (_, _, dst), (_, _, src) in zip(clone.parameters(), self.parameters()):
            np.copyto(dst, src)
        return clone

    # -- passes -----------------------------------------------------------

    def apply_input_norm(self, batch: np.ndarray) -> np.ndarray:
        x = np.asarray(batch, dtype=_DTYPE_NAMES[self.meta.dtype])
        if x.ndim != 3 or x.shape[1:] != (self.meta.frame_size, self.meta.frame_size):
            raise ModelError(
                f"expected batch of shape (B, {self.meta.frame_size}, {self.meta.frame_size}),"
                f" got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise ModelError("non-finite values in input batch")
        if self.meta.input_norm == "raw":
            return x
        lo = x.min(axis=(1, 2), keepdims=True)
        span = x.max(axis=(1, 2), keepdims=True) - lo
        safe = np.where(span == 0.0, 1.0, span)
        out = (x - lo) / safe
        return np.where(span == 0.0, 0.0, out).astype(x.dtype)

    def forward_normalized(self, x: np.ndarray, want_caches: bool = False):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x)
            if want_caches:
                caches.append(cache)
        return (x, caches) if want_caches else x

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Logits of shape (B, class_count) for a (B, M, M) pixel batch."""
        return self.forward_normalized(self.apply_input_norm(batch))

    def backward(self, grad_logits: np.ndarray, caches: list):
        """Per-layer parameter grads, mirrored on parameters() order."""
        grads: dict[tuple[int, str], np.ndarray] = {}
        grad = grad_logits
        for i in range(len(self.layers) - 1, -1, -1):
            grad, layer_grads = self.layers[i].backward(grad, caches[i])
            for name, g in layer_grads.items():
                grads[(i, name)] = g
        return grads


def _activation(meta: ModelMeta) -> Layer:
    return ReLU() if meta.activation == "relu" else Tanh()


def _pool(meta: ModelMeta) -> Layer:
    return (AvgPool2D if meta.pooling == "avg" else MaxPool2D)(2)


def _layer_stack(meta: ModelMeta) -> list[Layer]:
    m, k = meta.frame_size, meta.class_count
    if meta.preset == "perceptron1":
        return [Flatten(), Dense(k)]
    if meta.preset == "perceptron3":
        return [Flatten(), Dense(256), _activation(meta), Dense(128), _activation(meta), Dense(k)]
    if meta.preset == "lenet5":
        after_c1 = m - 4
        after_p1 = after_c1 // 2
        after_c2 = after_p1 - 4
        if after_c1 < 2 or after_c1 % 2 or after_c2 < 2 or after_c2 % 2:
            raise ModelError(
                f"frame size {m} cannot pass two 5x5 conv + 2x2 pool stages"
            )
        return [
            Reshape((1, m, m)),
            Conv2D(6, 5),
            _activation(meta),
            _pool(meta),
            Conv2D(16, 5),
            _activation(meta),
            _pool(meta),
            Flatten(),
            Dense(120),
            _activation(meta),
            Dense(84),
            _activation(meta),
            Dense(k),
        ]
    raise ModelError(f"unknown preset {meta.preset!r}; choose from {PRESETS}")


def build_network(meta: ModelMeta) -> Network:
    """Instantiate and deterministically initialize the preset topology."""
    if meta.dtype not in _DTYPE_NAMES:
        raise ModelError(f"unsupported dtype {meta.dtype!r}")
    if meta.class_count < 2:
        raise ModelError("need at least two classes")
    layers = _layer_stack(meta)
    shape: tuple = (meta.frame_size, meta.frame_size)
    dtype = _DTYPE_NAMES[meta.dtype]
    for i, layer in enumerate(layers):
        generator = rng.substream(meta.init_seed, rng.WEIGHT_INIT, i)
        shape = layer.init(shape, generator, dtype)
    if shape != (meta.class_count,):
        raise ModelError(f"topology ends with shape {shape}, expected ({meta.class_count},)")
    return Network(meta, layers)


def init_model(
    preset: str,
    class_count: int,
    frame_size: int,
    seed: int,
    input_norm: str = "minmax",
    activation: str = "relu",
    pooling: str = "avg",
    dtype: str = "float32",
) -> Network:
    """Build one of the three preset classifiers with seeded init."""
    meta = ModelMeta(
        preset=preset,
        class_count=class_count,
        frame_size=frame_size,
        init_seed=seed,
        input_norm=input_norm,
        activation=activation,
        pooling=pooling,
        dtype=dtype,
    )
    return build_network(meta)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model: Network, batch: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and gradients for every parameter.

    Returns (loss, grads) with grads keyed (layer_index, param_name),
    shapes mirroring the parameters.
    """
    labels = np.asarray(labels)
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= model.meta.class_count:
        raise ModelError(f"labels outside [0, {model.meta.class_count})")
    x = model.apply_input_norm(batch)
    logits, caches = model.forward_normalized(x, want_caches=True)
    b = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    log_probs = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = float(-log_probs[np.arange(b), labels].mean())
    dlogits = np.exp(log_probs)
    dlogits[np.arange(b), labels] -= 1.0
    dlogits /= b
    grads = model.backward(dlogits.astype(logits.dtype), caches)
    return loss, grads


def predict_logits(model: Network, pixels: np.ndarray, batch_size: int = 256) -> np.ndarray:
    chunks = [
        model.forward(pixels[i : i + batch_size]) for i in range(0, len(pixels), batch_size)
    ]
    if not chunks:
        return np.zeros((0, model.meta.class_count))
    return np.concatenate(chunks)


def predict(model: Network, data) -> np.ndarray:
    """Argmax class indices; ties break to the lowest class index."""
    pixels = data.arrays()[0] if hasattr(data, "arrays") else np.asarray(data)
    return predict_logits(model, pixels).argmax(axis=1)


_MAGIC = b"LMDL"
_VERSION = 1


class CheckpointError(RuntimeError):
    """Unreadable or corrupt model checkpoint."""


def save_model(model: Network, path) -> None:
    """Checkpoint: descriptor JSON + little-endian float32 tensors + digest."""
    meta = model.meta
    descriptor = {
        "preset": meta.preset,
        "class_count": meta.class_count,
        "frame_size": meta.frame_size,
        "init_seed": meta.init_seed,
        "input_norm": meta.input_norm,
        "activation": meta.activation,
        "pooling": meta.pooling,
        "dtype": meta.dtype,
        "layers": [layer.spec() for layer in model.layers],
    }
    blob = json.dumps(descriptor, sort_keys=True).encode("utf-8")
    body = bytearray()
    body += _MAGIC
    body += struct.pack("<HI", _VERSION, len(blob))
    body += blob
    for _, _, p in model.parameters():
        body += np.ascontiguousarray(p, dtype="<f4").tobytes()
    body += hashlib.sha256(bytes(body)).digest()
    with open(path, "wb") as fh:
        fh.write(bytes(body))


def load_model(path) -> Network:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 10 + 32 or raw[:4] != _MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint")
    if hashlib.sha256(raw[:-32]).digest() != raw[-32:]:
        raise CheckpointError(f"{path}: checkpoint digest mismatch")
    version, blob_len = struct.unpack("<HI", raw[4:10])
    if version != _VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    descriptor = json.loads(raw[10 : 10 + blob_len].decode("utf-8"))
    meta = ModelMeta(
        preset=descriptor["preset"],
        class_count=descriptor["class_count"],
        frame_size=descriptor["frame_size"],
        init_seed=descriptor["init_seed"],
        input_norm=descriptor["input_norm"],
        activation=descriptor["activation"],
        pooling=descriptor["pooling"],
        dtype=descriptor["dtype"],
    )
    model = build_network(meta)
    offset = 10 + blob_len
    for _, _, p in model.parameters():
        n = p.size * 4
        if offset + n > len(raw) - 32:
            raise CheckpointError(f"{path}: truncated parameter data")
        tensor = np.frombuffer(raw, dtype="<f4", count=p.size, offset=offset).reshape(p.shape)
        np.copyto(p, tensor.astype(p.dtype))
        offset += n
    if offset != len(raw) - 32:
        raise CheckpointError(f"{path}: trailing bytes after parameters")
    return model
