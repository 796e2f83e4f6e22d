"""Loss functions producing scalar Tensors (mean over the batch)."""
from __future__ import annotations

import numpy as np

from .autograd import Tensor


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_targets(targets, n, n_classes):
    targets = np.asarray(targets)
    if targets.shape != (n,):
        raise ValueError(f"targets must be shape ({n},), got {targets.shape}")
    if targets.min() < 0 or targets.max() >= n_classes:
        raise ValueError(f"target index out of range [0, {n_classes})")
    return targets.astype(np.int64)


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean of -log softmax(logits)[target]."""
    n, k = logits.shape
    targets = _check_targets(targets, n, k)
    if not np.all(np.isfinite(logits.data)):
        raise ValueError("logits must be finite")
    p = softmax(logits.data)
    loss = -np.mean(np.log(p[np.arange(n), targets] + 1e-300))

    def backward_fn(g):
        d = p.copy()
        d[np.arange(n), targets] -= 1.0
        return (float(g) * d / n,)

    return Tensor(loss, (logits,), backward_fn)


def hinge_binary(scores: Tensor, targets) -> Tensor:
    """Mean of max(0, 1 - y*s) with y in {-1,+1} from 0/1 targets."""
    s = scores.data.reshape(-1)
    n = s.shape[0]
    targets = _check_targets(targets, n, 2)
    y = 2.0 * targets - 1.0
    margin = 1.0 - y * s
    active = margin > 0
    loss = np.where(active, margin, 0.0).mean()
    shape = scores.shape

    def backward_fn(g):
        d = np.where(active, -y, 0.0) / n
        return (float(g) * d.reshape(shape),)

    return Tensor(loss, (scores,), backward_fn)


def hinge_multiclass(scores: Tensor, targets) -> Tensor:
    """Mean over samples of mean over j != y of max(0, 1 - s_y + s_j)."""
    n, k = scores.shape
    targets = _check_targets(targets, n, k)
    rows = np.arange(n)
    s_y = scores.data[rows, targets]
    margin = 1.0 - s_y[:, None] + scores.data
    margin[rows, targets] = 0.0
    active = margin > 0
    loss = np.where(active, margin, 0.0).sum() / (n * (k - 1))

    def backward_fn(g):
        d = active.astype(np.float64)
        d[rows, targets] = -active.sum(axis=1)
        return (float(g) * d / (n * (k - 1)),)

    return Tensor(loss, (scores,), backward_fn)


LOSSES = {
    "cross_entropy": cross_entropy,
    "hinge": hinge_binary,
    "multiclass_hinge": hinge_multiclass,
}
