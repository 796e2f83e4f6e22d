"""Numba-jitted training kernels, mirroring kernels_numpy exactly.

Direct nested loops; first call triggers JIT compilation (cached on disk).
Max-pool ties keep the first occurrence in C order of kernel offsets, the
same rule the numpy reshape/argmax path follows.
"""
from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath=True)


@njit(**_JIT)
def _conv3d_forward_loops(xp, w, b, s1, s2, s3):
    n_b, n_c, _, _, _ = xp.shape
    n_f, _, k1, k2, k3 = w.shape
    od = (xp.shape[2] - k1) // s1 + 1
    oh = (xp.shape[3] - k2) // s2 + 1
    ow = (xp.shape[4] - k3) // s3 + 1
    out = np.empty((n_b, n_f, od, oh, ow))
    for n in range(n_b):
        for f in range(n_f):
            for z in range(od):
                for y in range(oh):
                    for x in range(ow):
                        acc = b[f]
                        for c in range(n_c):
                            for a in range(k1):
                                for e in range(k2):
                                    for d in range(k3):
                                        acc += xp[n, c, z * s1 + a, y * s2 + e, x * s3 + d] \
                                            * w[f, c, a, e, d]
                        out[n, f, z, y, x] = acc
    return out


def conv3d_forward(xp, w, b, s1, s2, s3):
    return _conv3d_forward_loops(xp, w, b, s1, s2, s3), None


@njit(**_JIT)
def _conv3d_backward_loops(xp, w, dy, s1, s2, s3):
    n_b, n_c, _, _, _ = xp.shape
    n_f, _, k1, k2, k3 = w.shape
    _, _, od, oh, ow = dy.shape
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    db = np.zeros(n_f)
    for n in range(n_b):
        for f in range(n_f):
            for z in range(od):
                for y in range(oh):
                    for x in range(ow):
                        g = dy[n, f, z, y, x]
                        db[f] += g
                        for c in range(n_c):
                            for a in range(k1):
                                for e in range(k2):
                                    for d in range(k3):
                                        dxp[n, c, z * s1 + a, y * s2 + e, x * s3 + d] += \
                                            g * w[f, c, a, e, d]
                                        dw[f, c, a, e, d] += \
                                            g * xp[n, c, z * s1 + a, y * s2 + e, x * s3 + d]
    return dxp, dw, db


def conv3d_backward(ctx, xp, w, dy, s1, s2, s3):
    return _conv3d_backward_loops(xp, w, dy, s1, s2, s3)


@njit(**_JIT)
def im2col(xp, k1, k2, k3, s1, s2, s3):
    n_b, n_c, d, h, w = xp.shape
    od = (d - k1) // s1 + 1
    oh = (h - k2) // s2 + 1
    ow = (w - k3) // s3 + 1
    col = np.empty((n_b, od, oh, ow, n_c, k1, k2, k3))
    for n in range(n_b):
        for z in range(od):
            for y in range(oh):
                for x in range(ow):
                    for c in range(n_c):
                        for a in range(k1):
                            for e in range(k2):
                                for dd in range(k3):
                                    col[n, z, y, x, c, a, e, dd] = \
                                        xp[n, c, z * s1 + a, y * s2 + e, x * s3 + dd]
    return col


@njit(**_JIT)
def col2im_add(dcol, dxp, s1, s2, s3):
    n_b, od, oh, ow, n_c, k1, k2, k3 = dcol.shape
    for n in range(n_b):
        for z in range(od):
            for y in range(oh):
                for x in range(ow):
                    for c in range(n_c):
                        for a in range(k1):
                            for e in range(k2):
                                for d in range(k3):
                                    dxp[n, c, z * s1 + a, y * s2 + e, x * s3 + d] += \
                                        dcol[n, z, y, x, c, a, e, d]


@njit(**_JIT)
def maxpool3d_forward(x, k1, k2, k3):
    n_b, n_c, d, h, w = x.shape
    od, oh, ow = d // k1, h // k2, w // k3
    out = np.empty((n_b, n_c, od, oh, ow))
    idx = np.empty((n_b, n_c, od, oh, ow), dtype=np.int64)
    for n in range(n_b):
        for c in range(n_c):
            for z in range(od):
                for y in range(oh):
                    for x_ in range(ow):
                        best = x[n, c, z * k1, y * k2, x_ * k3]
                        best_i = 0
                        flat = 0
                        for a in range(k1):
                            for e in range(k2):
                                for d_ in range(k3):
                                    v = x[n, c, z * k1 + a, y * k2 + e, x_ * k3 + d_]
                                    if v > best:
                                        best = v
                                        best_i = flat
                                    flat += 1
                        out[n, c, z, y, x_] = best
                        idx[n, c, z, y, x_] = best_i
    return out, idx


@njit(**_JIT)
def maxpool3d_backward(dy, idx, d, h, w, k1, k2, k3):
    n_b, n_c, od, oh, ow = dy.shape
    dx = np.zeros((n_b, n_c, d, h, w))
    for n in range(n_b):
        for c in range(n_c):
            for z in range(od):
                for y in range(oh):
                    for x_ in range(ow):
                        flat = idx[n, c, z, y, x_]
                        a = flat // (k2 * k3)
                        e = (flat // k3) % k2
                        d_ = flat % k3
                        dx[n, c, z * k1 + a, y * k2 + e, x_ * k3 + d_] += dy[n, c, z, y, x_]
    return dx


@njit(**_JIT)
def lstm_forward(x, w_ih, w_hh, b_ih, b_hh):
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
    w_ih_t = np.ascontiguousarray(w_ih.T)
    w_hh_t = np.ascontiguousarray(w_hh.T)
    for t in range(t_steps):
        z = np.dot(np.ascontiguousarray(x[:, t]), w_ih_t) + np.dot(h, w_hh_t) + bias
        for row in range(n):
            for j in range(hid):
                i = 1.0 / (1.0 + np.exp(-z[row, j]))
                f = 1.0 / (1.0 + np.exp(-z[row, hid + j]))
                g = np.tanh(z[row, 2 * hid + j])
                o = 1.0 / (1.0 + np.exp(-z[row, 3 * hid + j]))
                cc = f * c[row, j] + i * g
                c[row, j] = cc
                h[row, j] = o * np.tanh(cc)
                i_seq[row, t, j] = i
                f_seq[row, t, j] = f
                g_seq[row, t, j] = g
                o_seq[row, t, j] = o
                c_seq[row, t, j] = cc
                h_seq[row, t, j] = h[row, j]
    return h_seq, i_seq, f_seq, g_seq, o_seq, c_seq


@njit(**_JIT)
def lstm_backward(dh_seq, x, h_seq, i_seq, f_seq, g_seq, o_seq, c_seq, w_ih, w_hh):
    n, t_steps, hid = dh_seq.shape
    dx = np.empty_like(x)
    dw_ih = np.zeros_like(w_ih)
    dw_hh = np.zeros_like(w_hh)
    db = np.zeros(4 * hid)
    dh_next = np.zeros((n, hid))
    dc_next = np.zeros((n, hid))
    dz = np.empty((n, 4 * hid))
    zeros = np.zeros((n, hid))
    for t in range(t_steps - 1, -1, -1):
        c_prev = c_seq[:, t - 1] if t > 0 else zeros
        h_prev = h_seq[:, t - 1] if t > 0 else zeros
        for row in range(n):
            for j in range(hid):
                i = i_seq[row, t, j]
                f = f_seq[row, t, j]
                g = g_seq[row, t, j]
                o = o_seq[row, t, j]
                tc = np.tanh(c_seq[row, t, j])
                dh = dh_seq[row, t, j] + dh_next[row, j]
                do = dh * tc
                dc = dc_next[row, j] + dh * o * (1.0 - tc * tc)
                dc_next[row, j] = dc * f
                dz[row, j] = dc * g * i * (1.0 - i)
                dz[row, hid + j] = dc * c_prev[row, j] * f * (1.0 - f)
                dz[row, 2 * hid + j] = dc * i * (1.0 - g * g)
                dz[row, 3 * hid + j] = do * o * (1.0 - o)
        dx[:, t] = np.dot(dz, w_ih)
        dh_next = np.dot(dz, w_hh)
        dw_ih += np.dot(dz.T, np.ascontiguousarray(x[:, t]))
        dw_hh += np.dot(dz.T, np.ascontiguousarray(h_prev))
        for col in range(4 * hid):
            for row in range(n):
                db[col] += dz[row, col]
    return dx, dw_ih, dw_hh, db
