"""Pure-numpy implementations of the hot training kernels.

Convolutions gather the padded input into a column matrix once per call
(im2col) and run GEMMs on it; the forward pass hands the column matrix
back so the backward pass reuses it. Max pooling uses reshape tricks on
the non-overlapping grid; the LSTM loops over time with batched matmuls.
Semantics (accumulation order, argmax tie handling) match the numba
kernels in kernels_numba.py.

All convolution kernels take pre-padded input; padding and rank expansion
to 3 spatial dims happen in the layer wrappers.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(xp, k1, k2, k3, s1, s2, s3):
    """(N, C, D, H, W) -> (N, od, oh, ow, C, k1, k2, k3), contiguous."""
    win = sliding_window_view(xp, (k1, k2, k3), axis=(2, 3, 4))
    win = win[:, :, ::s1, ::s2, ::s3]
    return np.ascontiguousarray(win.transpose(0, 2, 3, 4, 1, 5, 6, 7))


def conv_gemm_forward(col, w, b):
    """GEMM on a gathered column matrix; returns (out, col) for backward."""
    n, od, oh, ow = col.shape[:4]
    f = w.shape[0]
    out = col.reshape(n, od * oh * ow, -1) @ w.reshape(f, -1).T
    out += b
    out = np.ascontiguousarray(out.transpose(0, 2, 1)).reshape(n, f, od, oh, ow)
    return out, col


def conv3d_forward(xp, w, b, s1, s2, s3):
    """Returns (out, ctx); ctx carries the column matrix for backward."""
    return conv_gemm_forward(im2col(xp, *w.shape[2:], s1, s2, s3), w, b)


def col2im_add(dcol, dxp, s1, s2, s3):
    """Scatter-add per-window gradient planes back onto the padded input.

    dcol is (N, od, oh, ow, C, k1, k2, k3) as produced by the backward GEMM.
    """
    _, od, oh, ow, _, k1, k2, k3 = dcol.shape
    for a in range(k1):
        for bb in range(k2):
            for cc in range(k3):
                dxp[:, :, a:a + od * s1:s1, bb:bb + oh * s2:s2, cc:cc + ow * s3:s3] += \
                    dcol[..., a, bb, cc].transpose(0, 4, 1, 2, 3)


def conv3d_backward(ctx, xp, w, dy, s1, s2, s3, scatter=col2im_add, gather=im2col):
    """Gradients from the saved forward context (column matrix)."""
    col = ctx if ctx is not None else gather(xp, *w.shape[2:], s1, s2, s3)
    n, od, oh, ow = col.shape[:4]
    f = w.shape[0]
    p = od * oh * ow
    dy2 = np.ascontiguousarray(dy.reshape(n, f, p).transpose(0, 2, 1))  # (N, P, F)
    col2 = col.reshape(n, p, -1)
    dw = np.tensordot(dy2, col2, axes=([0, 1], [0, 1])).reshape(w.shape)
    db = dy.sum(axis=(0, 2, 3, 4))
    dcol = (dy2 @ w.reshape(f, -1)).reshape(col.shape)
    dxp = np.zeros_like(xp)
    scatter(dcol, dxp, s1, s2, s3)
    return dxp, dw, db


def maxpool3d_forward(x, k1, k2, k3):
    n, c, d, h, w = x.shape
    od, oh, ow = d // k1, h // k2, w // k3
    xr = x[:, :, :od * k1, :oh * k2, :ow * k3]
    xr = xr.reshape(n, c, od, k1, oh, k2, ow, k3).transpose(0, 1, 2, 4, 6, 3, 5, 7)
    xr = xr.reshape(n, c, od, oh, ow, k1 * k2 * k3)
    idx = xr.argmax(axis=-1)
    out = np.take_along_axis(xr, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool3d_backward(dy, idx, d, h, w, k1, k2, k3):
    n, c, od, oh, ow = dy.shape
    flat = np.zeros((n, c, od, oh, ow, k1 * k2 * k3))
    np.put_along_axis(flat, idx[..., None], dy[..., None], axis=-1)
    flat = flat.reshape(n, c, od, oh, ow, k1, k2, k3).transpose(0, 1, 2, 5, 3, 6, 4, 7)
    dx = np.zeros((n, c, d, h, w))
    dx[:, :, :od * k1, :oh * k2, :ow * k3] = flat.reshape(n, c, od * k1, oh * k2, ow * k3)
    return dx


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_forward(x, w_ih, w_hh, b_ih, b_hh):
    """Run an LSTM over (N, T, I) input; returns hidden states and gate cache.

    Gate blocks are ordered input, forget, cell, output. Initial hidden and
    cell state are zero; hidden state is returned for every time step.
    """
    n, t_steps, _ = x.shape
    hid = w_hh.shape[1]
    h = np.zeros((n, hid))
    c = np.zeros((n, hid))
    h_seq = np.empty((n, t_steps, hid))
    i_seq = np.empty((n, t_steps, hid))
    f_seq = np.empty((n, t_steps, hid))
    g_seq = np.empty((n, t_steps, hid))
    o_seq = np.empty((n, t_steps, hid))
    c_seq = np.empty((n, t_steps, hid))
    bias = b_ih + b_hh
    for t in range(t_steps):
        z = x[:, t] @ w_ih.T + h @ w_hh.T + bias
        i = _sigmoid(z[:, :hid])
        f = _sigmoid(z[:, hid:2 * hid])
        g = np.tanh(z[:, 2 * hid:3 * hid])
        o = _sigmoid(z[:, 3 * hid:])
        c = f * c + i * g
        h = o * np.tanh(c)
        i_seq[:, t] = i
        f_seq[:, t] = f
        g_seq[:, t] = g
        o_seq[:, t] = o
        c_seq[:, t] = c
        h_seq[:, t] = h
    return h_seq, i_seq, f_seq, g_seq, o_seq, c_seq


def lstm_backward(dh_seq, x, h_seq, i_seq, f_seq, g_seq, o_seq, c_seq, w_ih, w_hh):
    """Backpropagation through time; returns (dx, dw_ih, dw_hh, db).

    db is the gradient of each bias vector (they enter the gates as a sum,
    so both bias gradients are identical).
    """
    n, t_steps, hid = dh_seq.shape
    dx = np.empty_like(x)
    dw_ih = np.zeros_like(w_ih)
    dw_hh = np.zeros_like(w_hh)
    db = np.zeros(4 * hid)
    dh_next = np.zeros((n, hid))
    dc_next = np.zeros((n, hid))
    for t in range(t_steps - 1, -1, -1):
        i, f, g, o, c = i_seq[:, t], f_seq[:, t], g_seq[:, t], o_seq[:, t], c_seq[:, t]
        c_prev = c_seq[:, t - 1] if t > 0 else np.zeros((n, hid))
        h_prev = h_seq[:, t - 1] if t > 0 else np.zeros((n, hid))
        tc = np.tanh(c)
        dh = dh_seq[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_next = dc * f
        dz = np.concatenate([
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        dx[:, t] = dz @ w_ih
        dh_next = dz @ w_hh
        dw_ih += dz.T @ x[:, t]
        dw_hh += dz.T @ h_prev
        db += dz.sum(axis=0)
    return dx, dw_ih, dw_hh, db
