"""Central finite-difference checks against the backward pass."""
from __future__ import annotations

import numpy as np

from .autograd import Tensor


def grad_check(fn, wrt: list[Tensor], eps: float = 1e-3) -> float:
    """Compare analytic gradients of a scalar fn() with central differences.

    fn must rebuild the graph on each call (so data perturbations take
    effect). Every element of every tensor in wrt is perturbed. Returns the
    worst relative error max|num - ana| / max(|num|, |ana|, 1).
    """
    for t in wrt:
        t.zero_grad()
    out = fn()
    out.backward()
    analytic = [t.grad.copy() if t.grad is not None else np.zeros_like(t.data) for t in wrt]

    worst = 0.0
    for t, ana in zip(wrt, analytic):
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + eps
            up = fn().item()
            flat[i] = keep - eps
            down = fn().item()
            flat[i] = keep
            num = (up - down) / (2.0 * eps)
            a = ana.reshape(-1)[i]
            worst = max(worst, abs(num - a) / max(abs(num), abs(a), 1.0))
    return worst
