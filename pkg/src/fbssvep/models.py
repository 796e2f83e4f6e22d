"""The classifier architectures and their training presets.

Layer stacks (conv kernels / pools / channels) are fixed; flatten widths
are asserted at construction so any drift in the shape arithmetic fails
fast. Expected learnable parameter totals at n_classes=2:

  FBRNN 87,836   FBCNN-3D 23,378   FBCNN-2D 6,674
  A-CNN 6,290    A-RNN    85,532   SVM      46
"""
from __future__ import annotations

import numpy as np

from .nn import (BatchNorm, Conv, Dropout, Flatten, LeakyReLU, Linear, LSTM,
                 MaxPool, Model, ReLU, ToSequence, TrainConfig)
from .nn.checkpoint import load_checkpoint

MODEL_KINDS = ("fbcnn2d", "fbcnn3d", "fbrnn", "acnn", "arnn", "svm")

FEATURE_KINDS = {
    "fbcnn2d": "complex_spectrum_matrix",
    "fbcnn3d": "complex_spectrogram_tensor",
    "fbrnn": "sub_band_stack",
    "acnn": "complex_spectrogram_single",
    "arnn": "window",
    "svm": "magnitude_db",
    "forest": "magnitude_db",
    "fbcca": "window_raw",
}


def _flatten_width(layers, input_shape) -> int:
    shape = tuple(input_shape)
    for layer in layers:
        shape = layer.out_shape(shape)
    return int(np.prod(shape))


def build_fbcnn2d(n_classes: int, seed: int = 0) -> Model:
    rng = np.random.default_rng(seed)
    body = [
        Conv(2, 1, 16, (20, 6), padding=(1, 1), rng=rng),
        BatchNorm(16),
        ReLU(),
        MaxPool(2, (3, 2)),
        Dropout(0.25),
        Conv(2, 16, 32, (1, 8), padding=(0, 1), rng=rng),
        BatchNorm(32),
        ReLU(),
        MaxPool(2, (1, 2)),
        Dropout(0.25),
        Flatten(),
    ]
    width = _flatten_width(body, (1, 20, 45))
    assert width == 256, f"fbcnn2d flatten width drifted to {width}"
    layers = body + [Linear(width, n_classes, rng=rng)]
    return Model("fbcnn2d", n_classes, FEATURE_KINDS["fbcnn2d"], (1, 20, 45), layers)


def build_fbcnn3d(n_classes: int, seed: int = 0) -> Model:
    rng = np.random.default_rng(seed)
    body = [
        Conv(3, 1, 16, (4, 6, 6), padding=(1, 1, 1), rng=rng),
        BatchNorm(16),
        LeakyReLU(0.01),
        MaxPool(3, (2, 2, 3)),
        Dropout(0.25),
        Conv(3, 16, 32, (4, 10, 1), padding=(1, 1, 0), rng=rng),
        BatchNorm(32),
        LeakyReLU(0.01),
        MaxPool(3, (3, 2, 1)),
        Dropout(0.25),
        Flatten(),
    ]
    width = _flatten_width(body, (1, 10, 45, 6))
    assert width == 224, f"fbcnn3d flatten width drifted to {width}"
    layers = body + [Linear(width, n_classes, rng=rng)]
    return Model("fbcnn3d", n_classes, FEATURE_KINDS["fbcnn3d"], (1, 10, 45, 6), layers)


def build_acnn(n_classes: int, seed: int = 0) -> Model:
    # fbcnn3d with the sub-band dimension removed everywhere
    rng = np.random.default_rng(seed)
    body = [
        Conv(2, 1, 16, (6, 6), padding=(1, 1), rng=rng),
        BatchNorm(16),
        ReLU(),
        MaxPool(2, (2, 3)),
        Dropout(0.25),
        Conv(2, 16, 32, (10, 1), padding=(1, 0), rng=rng),
        BatchNorm(32),
        ReLU(),
        MaxPool(2, (2, 1)),
        Dropout(0.25),
        Flatten(),
    ]
    width = _flatten_width(body, (1, 45, 6))
    assert width == 224, f"acnn flatten width drifted to {width}"
    layers = body + [Linear(width, n_classes, rng=rng)]
    return Model("acnn", n_classes, FEATURE_KINDS["acnn"], (1, 45, 6), layers)


def _build_rnn(kind: str, in_channels: int, n_classes: int, seed: int) -> Model:
    rng = np.random.default_rng(seed)
    layers = [
        Conv(1, in_channels, 8, (32,), rng=rng),
        BatchNorm(8),
        ReLU(),
        MaxPool(1, (2,)),
        Dropout(0.4),
        Conv(1, 8, 10, (32,), rng=rng),
        BatchNorm(10),
        ReLU(),
        MaxPool(1, (2,)),
        Dropout(0.4),
        ToSequence(),  # (n, 10 ch, 8 steps) -> (n, 8 steps, 10 features)
    ]
    in_features = 10
    for hidden in (100, 50, 20, 10, 5):
        layers.append(LSTM(in_features, hidden, rng=rng))
        layers.append(Dropout(0.4))
        in_features = hidden
    layers.append(Flatten())  # all 8 time steps of the last LSTM: 8 * 5 = 40
    layers.append(Linear(40, n_classes, rng=rng))
    return Model(kind, n_classes, FEATURE_KINDS[kind], (in_channels, 125), layers)


def build_fbrnn(n_classes: int, seed: int = 0) -> Model:
    return _build_rnn("fbrnn", 10, n_classes, seed)


def build_arnn(n_classes: int, seed: int = 0) -> Model:
    return _build_rnn("arnn", 1, n_classes, seed)


def build_svm(n_classes: int, seed: int = 0) -> Model:
    """Linear margin classifier over the 45 magnitude-dB features.

    Binary: one score, hinge loss. Multiclass: one score per class,
    multiclass hinge. No regularization term.
    """
    rng = np.random.default_rng(seed)
    out = 1 if n_classes == 2 else n_classes
    layers = [Linear(45, out, rng=rng)]
    return Model("svm", n_classes, FEATURE_KINDS["svm"], (45,), layers)


_BUILDERS = {
    "fbcnn2d": build_fbcnn2d,
    "fbcnn3d": build_fbcnn3d,
    "fbrnn": build_fbrnn,
    "acnn": build_acnn,
    "arnn": build_arnn,
    "svm": build_svm,
}


def build_model(kind: str, n_classes: int, seed: int = 0) -> Model:
    if kind not in _BUILDERS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    return _BUILDERS[kind](n_classes, seed)


def param_count(model: Model) -> int:
    """Learnable parameter elements; batch-norm running stats excluded."""
    return sum(p.size for p in model.params())


def load_model(path):
    return load_checkpoint(path, build_model)


def default_train_config(kind: str, n_classes: int, seed: int = 0) -> TrainConfig:
    """Per-architecture presets; batch and schedule depend on class count."""
    two = n_classes == 2
    batch = 16 if two else 64
    if kind in ("fbcnn2d", "fbcnn3d", "acnn"):
        return TrainConfig(optimizer="sgd_momentum", lr=1e-3, momentum=0.9,
                           batch_size=batch, max_epochs=1000 if two else 2000,
                           patience=50 if two else 250, loss="cross_entropy", seed=seed)
    if kind in ("fbrnn", "arnn"):
        return TrainConfig(optimizer="adam", lr=1e-3, betas=(0.9, 0.999), eps=1e-8,
                           batch_size=batch, max_epochs=10000, patience=300,
                           loss="cross_entropy", seed=seed)
    if kind == "svm":
        return TrainConfig(optimizer="sgd_momentum", lr=1e-3, momentum=0.9,
                           batch_size=batch, max_epochs=3000, patience=200,
                           loss="hinge" if two else "multiclass_hinge", seed=seed)
    raise ValueError(f"no training preset for {kind!r}")
