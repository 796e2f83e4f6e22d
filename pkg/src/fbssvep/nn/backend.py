"""Kernel backend selection.

FBSSVEP_BACKEND picks the hot-kernel implementation:

  auto  (default)  mixed: GEMM-bound convolutions and the transcendental-
                   heavy LSTM sweeps run on the numpy path (BLAS plus
                   vectorized exp/tanh); the loop-bound max-pool and the
                   conv input-gradient scatter run on numba when it is
                   importable. benchmarks/bench_kernels.py holds the
                   measurements behind this split.
  numba            everything on the numba kernels, error if unavailable
  numpy            everything on the pure-numpy fallback

Both backends implement identical semantics; tests hold them to each other
elementwise.
"""
from __future__ import annotations

import os

from . import kernels_numpy

_CHOICE = os.environ.get("FBSSVEP_BACKEND", "auto").lower()
if _CHOICE not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"FBSSVEP_BACKEND must be auto, numba or numpy, got {_CHOICE!r}")

_numba_kernels = None
if _CHOICE in ("auto", "numba"):
    try:
        from . import kernels_numba as _numba_kernels
    except ImportError:
        if _CHOICE == "numba":
            raise

if _CHOICE == "numba":
    _VEC, _LOOPY = _numba_kernels, _numba_kernels
    _ACTIVE = "numba"
elif _CHOICE == "auto" and _numba_kernels is not None:
    _VEC, _LOOPY = kernels_numpy, _numba_kernels
    _ACTIVE = "mixed"
else:
    _VEC, _LOOPY = kernels_numpy, kernels_numpy
    _ACTIVE = "numpy"

if _ACTIVE == "mixed":
    # GEMMs on BLAS, the gather/scatter loops on numba
    def conv3d_forward(xp, w, b, s1, s2, s3):
        col = _numba_kernels.im2col(xp, *w.shape[2:], s1, s2, s3)
        return kernels_numpy.conv_gemm_forward(col, w, b)

    def conv3d_backward(ctx, xp, w, dy, s1, s2, s3):
        return kernels_numpy.conv3d_backward(ctx, xp, w, dy, s1, s2, s3,
                                             scatter=_numba_kernels.col2im_add,
                                             gather=_numba_kernels.im2col)
else:
    conv3d_forward = _VEC.conv3d_forward
    conv3d_backward = _VEC.conv3d_backward
maxpool3d_forward = _LOOPY.maxpool3d_forward
maxpool3d_backward = _LOOPY.maxpool3d_backward
lstm_forward = _VEC.lstm_forward
lstm_backward = _VEC.lstm_backward


def active_backend() -> str:
    return _ACTIVE
