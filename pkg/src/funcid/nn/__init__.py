"""From-scratch neural classifiers: layers, presets, SGD training."""

from .layers import (
    AvgPool2D,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    LayerError,
    MaxPool2D,
    ReLU,
    Reshape,
    Tanh,
)
from .network import (
    CheckpointError,
    ModelError,
    ModelMeta,
    Network,
    PRESETS,
    init_model,
    load_model,
    loss_and_grads,
    predict,
    predict_logits,
    save_model,
    softmax,
)
from .training import TrainConfig, TrainReport, TrainingDivergedError, evaluate_loss, train

__all__ = [
    "AvgPool2D",
    "CheckpointError",
    "Conv2D",
    "Dense",
    "Flatten",
    "Layer",
    "LayerError",
    "MaxPool2D",
    "ModelError",
    "ModelMeta",
    "Network",
    "PRESETS",
    "ReLU",
    "Reshape",
    "Tanh",
    "TrainConfig",
    "TrainReport",
    "TrainingDivergedError",
    "evaluate_loss",
    "init_model",
    "load_model",
    "loss_and_grads",
    "predict",
    "predict_logits",
    "save_model",
    "softmax",
    "train",
]
