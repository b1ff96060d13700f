from .layers import AttentionGate, Conv2d, Dense, Dropout, Flatten, Layer, MaxPool2d, Param, Relu
from .loss import softmax_weighted_ce
from .optim import Adam, adam_step
from .model import CnnConfig, Model, build_model, count_parameters, predict, train
from .checkpoint import (
    MAGIC_BASELINE,
    MAGIC_CNN,
    load_checkpoint,
    read_container,
    save_checkpoint,
    write_container,
)

__all__ = [
    "AttentionGate", "Conv2d", "Dense", "Dropout", "Flatten", "Layer", "MaxPool2d",
    "Param", "Relu", "softmax_weighted_ce", "Adam", "adam_step", "CnnConfig",
    "Model", "build_model", "count_parameters", "predict", "train",
    "MAGIC_BASELINE", "MAGIC_CNN", "load_checkpoint", "read_container",
    "save_checkpoint", "write_container",
]
