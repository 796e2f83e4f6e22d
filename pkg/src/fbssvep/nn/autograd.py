"""Minimal reverse-mode automatic differentiation.

A Tensor wraps a float64 ndarray plus an optional backward record (parent
tensors and a function mapping the output gradient to parent gradients).
The graph is acyclic by construction; backward() runs an iterative
topological sweep so deep graphs cannot hit the recursion limit.

Layers build the graph from a small set of fused operations (see layers.py
and losses.py); the generic ops here cover composition and testing.
"""
from __future__ import annotations

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward_fn")

    def __init__(self, data, parents=(), backward_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = tuple(parents)
        self._backward_fn = backward_fn

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        """Accumulate gradients of this (scalar) tensor into the graph."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without an explicit gradient needs a scalar")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = grad if self.grad is None else self.grad + grad
        for node in reversed(topo):
            if node._backward_fn is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._backward_fn(node.grad)):
                if g is None:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def add(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    return Tensor(x.data + y.data, (x, y),
                  lambda g: (_unbroadcast(g, x.shape), _unbroadcast(g, y.shape)))


def mul(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    return Tensor(x.data * y.data, (x, y),
                  lambda g: (_unbroadcast(g * y.data, x.shape),
                             _unbroadcast(g * x.data, y.shape)))


def _unbroadcast(g: np.ndarray, shape) -> np.ndarray:
    """Reduce a gradient back to the shape it broadcast from."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def matmul(x, y) -> Tensor:
    x, y = _as_tensor(x), _as_tensor(y)
    return Tensor(x.data @ y.data, (x, y),
                  lambda g: (g @ y.data.T, x.data.T @ g))


def reshape(x: Tensor, shape) -> Tensor:
    old = x.data.shape
    return Tensor(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),))


def transpose(x: Tensor, axes) -> Tensor:
    inverse = tuple(np.argsort(axes))
    return Tensor(np.ascontiguousarray(x.data.transpose(axes)), (x,),
                  lambda g: (g.transpose(inverse),))


def mean(x: Tensor) -> Tensor:
    n = x.data.size
    return Tensor(x.data.mean(), (x,), lambda g: (np.full_like(x.data, float(g) / n),))


def total(x: Tensor) -> Tensor:
    return Tensor(x.data.sum(), (x,), lambda g: (np.full_like(x.data, float(g)),))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return Tensor(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    mask = x.data > 0
    return Tensor(np.where(mask, x.data, slope * x.data), (x,),
                  lambda g: (np.where(mask, g, slope * g),))


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return Tensor(y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    y = 1.0 / (1.0 + np.exp(-x.data))
    return Tensor(y, (x,), lambda g: (g * y * (1.0 - y),))
