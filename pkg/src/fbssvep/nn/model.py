"""Model container: an ordered layer stack with a declared input shape."""
from __future__ import annotations

import numpy as np

from .autograd import Tensor
from .layers import Dropout, Layer
from .losses import softmax


class Model:
    def __init__(self, kind: str, n_classes: int, feature_kind: str,
                 input_shape: tuple, layers: list[Layer]):
        self.kind = kind
        self.n_classes = n_classes
        self.feature_kind = feature_kind
        self.input_shape = tuple(input_shape)
        self.layers = list(layers)
        self.training = False

    def train(self):
        self.training = True
        for layer in self.layers:
            layer.training = True
        return self

    def eval(self):
        self.training = False
        for layer in self.layers:
            layer.training = False
        return self

    def set_rng(self, rng: np.random.Generator):
        for layer in self.layers:
            if isinstance(layer, Dropout):
                layer.rng = rng

    def forward(self, x: np.ndarray) -> Tensor:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ValueError(
                f"{self.kind} expects input (n,) + {self.input_shape}, got {x.shape}")
        t = Tensor(x)
        for layer in self.layers:
            t = layer(t)
        return t

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Eval-mode class predictions; argmax ties go to the lower index."""
        was_training = self.training
        self.eval()
        out = self.forward(x).data
        if was_training:
            self.train()
        if out.shape[1] == 1:  # binary margin head
            return (out[:, 0] > 0).astype(np.int64)
        return out.argmax(axis=1)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        was_training = self.training
        self.eval()
        out = self.forward(x).data
        if was_training:
            self.train()
        if out.shape[1] == 1:
            raise ValueError("margin-head model has no probability output")
        return softmax(out)

    def params(self) -> list[Tensor]:
        return [p for layer in self.layers for _, p in layer.params()]

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Parameters plus non-learnable state, in checkpoint order."""
        out = []
        for i, layer in enumerate(self.layers):
            for name, p in layer.params():
                out.append((f"layers.{i}.{name}", p.data))
            for name, arr in layer.state_arrays():
                out.append((f"layers.{i}.{name}", arr))
        return out

    def layer_specs(self) -> list[dict]:
        return [layer.spec() for layer in self.layers]

    def param_snapshot(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.params()]

    def load_param_snapshot(self, snapshot: list[np.ndarray]):
        for p, saved in zip(self.params(), snapshot):
            p.data[...] = saved
