"""Layers: convolutions, batch norm, pooling, dropout, LSTM, linear.

Each layer owns its parameters as leaf Tensors, exposes a spec() dict for
checkpointing, can infer its output shape, and builds the autograd graph
through fused operations backed by the kernel backend.

Convolutions of any rank run through the 3-D kernels by padding the kernel
and input with singleton trailing dimensions.
"""
from __future__ import annotations

import numpy as np

from . import backend as K
from .autograd import Tensor, reshape, transpose


def _triple(t: tuple) -> tuple:
    """Extend kernel/stride tuples to rank 3 with neutral size-1 dims."""
    return tuple(t) + (1,) * (3 - len(t))


def _triple_pad(t: tuple) -> tuple:
    """Extend a padding tuple to rank 3 with neutral zero padding."""
    return tuple(t) + (0,) * (3 - len(t))


class Layer:
    training = False

    def params(self) -> list[tuple[str, Tensor]]:
        return []

    def state_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Non-learnable arrays that still belong in a checkpoint."""
        return []

    def spec(self) -> dict:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    def __call__(self, x: Tensor) -> Tensor:
        raise NotImplementedError


class Conv(Layer):
    """Cross-correlation with zero padding; dims is 1, 2 or 3."""

    def __init__(self, dims, in_ch, out_ch, kernel, stride=None, padding=None, rng=None):
        kernel = tuple(np.atleast_1d(kernel).tolist())
        assert len(kernel) == dims
        self.dims = dims
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.kernel = kernel
        self.stride = tuple(stride) if stride else (1,) * dims
        self.padding = tuple(padding) if padding else (0,) * dims
        fan_in = in_ch * int(np.prod(kernel))
        limit = np.sqrt(6.0 / fan_in)
        rng = rng or np.random.default_rng()
        self.weight = Tensor(rng.uniform(-limit, limit, (out_ch, in_ch) + kernel))
        self.bias = Tensor(np.zeros(out_ch))

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def spec(self):
        return dict(kind=f"conv{self.dims}d", in_ch=self.in_ch, out_ch=self.out_ch,
                    kernel=list(self.kernel), stride=list(self.stride),
                    padding=list(self.padding))

    def out_shape(self, in_shape):
        if in_shape[0] != self.in_ch:
            raise ValueError(f"expected {self.in_ch} input channels, got {in_shape[0]}")
        spatial = tuple(
            (s + 2 * p - k) // st + 1
            for s, k, st, p in zip(in_shape[1:], self.kernel, self.stride, self.padding)
        )
        if any(s < 1 for s in spatial):
            raise ValueError(f"kernel {self.kernel} too large for input {in_shape}")
        return (self.out_ch,) + spatial

    def __call__(self, x: Tensor) -> Tensor:
        n = x.shape[0]
        out_sp = self.out_shape(x.shape[1:])[1:]
        pad3 = _triple_pad(self.padding)
        s3 = _triple(self.stride)
        x5 = x.data.reshape((n, self.in_ch) + _triple(x.shape[2:]))
        xp = np.pad(x5, [(0, 0), (0, 0)] + [(p, p) for p in pad3])
        w5 = self.weight.data.reshape((self.out_ch, self.in_ch) + _triple(self.kernel))
        out, ctx = K.conv3d_forward(xp, w5, self.bias.data, *s3)
        weight, bias, x_shape, w_shape = self.weight, self.bias, x.shape, self.weight.shape
        out_shape = (n, self.out_ch) + out_sp

        def backward_fn(g):
            g5 = np.ascontiguousarray(g.reshape(out.shape))
            dxp, dw, db = K.conv3d_backward(ctx, xp, w5, g5, *s3)
            crop = tuple(slice(p, dxp.shape[2 + i] - p) for i, p in enumerate(pad3))
            dx = dxp[(slice(None), slice(None)) + crop].reshape(x_shape)
            return dx, dw.reshape(w_shape), db

        return Tensor(out.reshape(out_shape), (x, weight, bias), backward_fn)


class MaxPool(Layer):
    """Non-overlapping max pooling; stride equals kernel, remainders dropped."""

    def __init__(self, dims, kernel):
        kernel = tuple(np.atleast_1d(kernel).tolist())
        assert len(kernel) == dims
        self.dims = dims
        self.kernel = kernel

    def spec(self):
        return dict(kind=f"maxpool{self.dims}d", kernel=list(self.kernel))

    def out_shape(self, in_shape):
        return (in_shape[0],) + tuple(s // k for s, k in zip(in_shape[1:], self.kernel))

    def __call__(self, x: Tensor) -> Tensor:
        n, c = x.shape[:2]
        k3 = _triple(self.kernel)
        x5 = x.data.reshape((n, c) + _triple(x.shape[2:]))
        out, idx = K.maxpool3d_forward(x5, *k3)
        out_shape = (n,) + self.out_shape(x.shape[1:])
        x_shape, sp5 = x.shape, x5.shape[2:]

        def backward_fn(g):
            g5 = np.ascontiguousarray(g.reshape(out.shape))
            dx = K.maxpool3d_backward(g5, idx, *sp5, *k3)
            return (dx.reshape(x_shape),)

        return Tensor(out.reshape(out_shape), (x,), backward_fn)


class BatchNorm(Layer):
    """Per-channel normalization over batch and spatial dims, affine output."""

    def __init__(self, channels, momentum=0.1, eps=1e-5):
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = Tensor(np.ones(channels))
        self.beta = Tensor(np.zeros(channels))
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def state_arrays(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]

    def spec(self):
        return dict(kind="batchnorm", channels=self.channels,
                    momentum=self.momentum, eps=self.eps)

    def __call__(self, x: Tensor) -> Tensor:
        axes = (0,) + tuple(range(2, x.data.ndim))
        shape = [1] * x.data.ndim
        shape[1] = self.channels
        gamma_b = self.gamma.data.reshape(shape)
        beta_b = self.beta.data.reshape(shape)
        if self.training:
            if x.shape[0] < 2:
                raise ValueError("batch norm in train mode needs batch size >= 2")
            mu = x.data.mean(axis=axes)
            var = x.data.var(axis=axes)
            self.running_mean += self.momentum * (mu - self.running_mean)
            self.running_var += self.momentum * (var - self.running_var)
        else:
            mu, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x.data - mu.reshape(shape)) * inv_std.reshape(shape)
        out = gamma_b * xhat + beta_b
        gamma, beta, training = self.gamma, self.beta, self.training
        m = x.data.size // self.channels

        def backward_fn(g):
            dgamma = (g * xhat).sum(axis=axes)
            dbeta = g.sum(axis=axes)
            if training:
                gh = g * gamma_b
                dx = (gh - gh.mean(axis=axes, keepdims=True)
                      - xhat * (gh * xhat).sum(axis=axes, keepdims=True) / m) \
                    * inv_std.reshape(shape)
            else:
                dx = g * gamma_b * inv_std.reshape(shape)
            return dx, dgamma, dbeta

        return Tensor(out, (x, gamma, beta), backward_fn)


class Dropout(Layer):
    """Inverted dropout; identity in eval mode or at p=0."""

    def __init__(self, p):
        if not 0.0 <= p < 1.0:
            raise ValueError(f"drop probability must be in [0, 1), got {p}")
        self.p = p
        self.rng = np.random.default_rng()

    def spec(self):
        return dict(kind="dropout", p=self.p)

    def __call__(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = 1.0 - self.p
        mask = (self.rng.random(x.shape) >= self.p) / keep
        return Tensor(x.data * mask, (x,), lambda g: (g * mask,))


class ReLU(Layer):
    def spec(self):
        return dict(kind="relu")

    def __call__(self, x: Tensor) -> Tensor:
        mask = x.data > 0
        return Tensor(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


class LeakyReLU(Layer):
    def __init__(self, slope=0.01):
        self.slope = slope

    def spec(self):
        return dict(kind="leaky_relu", slope=self.slope)

    def __call__(self, x: Tensor) -> Tensor:
        mask = x.data > 0
        slope = self.slope
        return Tensor(np.where(mask, x.data, slope * x.data), (x,),
                      lambda g: (np.where(mask, g, slope * g),))


class Linear(Layer):
    def __init__(self, in_features, out_features, rng=None):
        self.in_features = in_features
        self.out_features = out_features
        limit = np.sqrt(6.0 / in_features)
        rng = rng or np.random.default_rng()
        self.weight = Tensor(rng.uniform(-limit, limit, (out_features, in_features)))
        self.bias = Tensor(np.zeros(out_features))

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def spec(self):
        return dict(kind="linear", in_features=self.in_features,
                    out_features=self.out_features)

    def out_shape(self, in_shape):
        if in_shape != (self.in_features,):
            raise ValueError(f"expected ({self.in_features},) input, got {in_shape}")
        return (self.out_features,)

    def __call__(self, x: Tensor) -> Tensor:
        weight, bias = self.weight, self.bias
        out = x.data @ weight.data.T + bias.data

        def backward_fn(g):
            return g @ weight.data, g.T @ x.data, g.sum(axis=0)

        return Tensor(out, (x, weight, bias), backward_fn)


class LSTM(Layer):
    """Single LSTM layer over (N, T, features), returning every hidden state.

    Gates use input weights, recurrent weights and two additive bias vectors
    (input-side and recurrent-side); blocks ordered input/forget/cell/output.
    """

    def __init__(self, in_features, hidden, rng=None):
        self.in_features = in_features
        self.hidden = hidden
        limit = 1.0 / np.sqrt(hidden)
        rng = rng or np.random.default_rng()
        u = lambda shape: Tensor(rng.uniform(-limit, limit, shape))
        self.w_ih = u((4 * hidden, in_features))
        self.w_hh = u((4 * hidden, hidden))
        self.b_ih = u(4 * hidden)
        self.b_hh = u(4 * hidden)

    def params(self):
        return [("w_ih", self.w_ih), ("w_hh", self.w_hh),
                ("b_ih", self.b_ih), ("b_hh", self.b_hh)]

    def spec(self):
        return dict(kind="lstm", in_features=self.in_features, hidden=self.hidden)

    def out_shape(self, in_shape):
        if in_shape[1] != self.in_features:
            raise ValueError(f"expected {self.in_features} features, got {in_shape[1]}")
        return (in_shape[0], self.hidden)

    def __call__(self, x: Tensor) -> Tensor:
        xd = np.ascontiguousarray(x.data)
        h_seq, *cache = K.lstm_forward(xd, self.w_ih.data, self.w_hh.data,
                                       self.b_ih.data, self.b_hh.data)
        parents = (x, self.w_ih, self.w_hh, self.b_ih, self.b_hh)
        w_ih_d, w_hh_d = self.w_ih.data, self.w_hh.data

        def backward_fn(g):
            dx, dw_ih, dw_hh, db = K.lstm_backward(
                np.ascontiguousarray(g), xd, h_seq, *cache, w_ih_d, w_hh_d)
            return dx, dw_ih, dw_hh, db, db.copy()

        return Tensor(h_seq, parents, backward_fn)


class Flatten(Layer):
    def spec(self):
        return dict(kind="flatten")

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def __call__(self, x: Tensor) -> Tensor:
        return reshape(x, (x.shape[0], -1))


class ToSequence(Layer):
    """(N, channels, length) -> (N, length, channels) for the LSTM stack."""

    def spec(self):
        return dict(kind="to_sequence")

    def out_shape(self, in_shape):
        return (in_shape[1], in_shape[0])

    def __call__(self, x: Tensor) -> Tensor:
        return transpose(x, (0, 2, 1))
