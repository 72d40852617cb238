"""Numba-compiled conv/pool kernels.

Same contracts as ``_numpy_kernels``. Per-sample work runs under ``prange``;
weight gradients are accumulated per sample and summed afterwards in sample
order, so results do not depend on the thread count.
"""

import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old and numba warns on every first parallel call
    numba.config.THREADING_LAYER = "workqueue"


@njit(cache=True)
def _im2col_one(x, cols):
    c, h, w = x.shape
    for ci in range(c):
        for ky in range(3):
            for kx in range(3):
                row = (ci * 3 + ky) * 3 + kx
                for i in range(h):
                    yi = i + ky - 1
                    for j in range(w):
                        xj = j + kx - 1
                        if 0 <= yi < h and 0 <= xj < w:
                            cols[row, i * w + j] = x[ci, yi, xj]
                        else:
                            cols[row, i * w + j] = 0.0


@njit(cache=True)
def _col2im_one(cols, dx):
    c, h, w = dx.shape
    for ci in range(c):
        for ky in range(3):
            for kx in range(3):
                row = (ci * 3 + ky) * 3 + kx
                for i in range(h):
                    yi = i + ky - 1
                    if yi < 0 or yi >= h:
                        continue
                    for j in range(w):
                        xj = j + kx - 1
                        if 0 <= xj < w:
                            dx[ci, yi, xj] += cols[row, i * w + j]


@njit(parallel=True, cache=True)
def _conv_forward(x, wmat, bias, out):
    n, c, h, w = x.shape
    o = wmat.shape[0]
    for s in prange(n):
        cols = np.empty((c * 9, h * w), dtype=x.dtype)
        _im2col_one(x[s], cols)
        y = np.dot(wmat, cols)
        for oc in range(o):
            b = bias[oc]
            for p in range(h * w):
                out[s, oc, p // w, p % w] = y[oc, p] + b


@njit(parallel=True, cache=True)
def _conv_backward(dy, x, wmat, dx, dw_per):
    n, c, h, w = x.shape
    o = wmat.shape[0]
    wt = np.ascontiguousarray(wmat.T)
    for s in prange(n):
        cols = np.empty((c * 9, h * w), dtype=x.dtype)
        _im2col_one(x[s], cols)
        g = np.ascontiguousarray(dy[s].reshape(o, h * w))
        dw_per[s] = np.dot(g, np.ascontiguousarray(cols.T))
        dcols = np.dot(wt, g)
        _col2im_one(dcols, dx[s])


def conv3x3_forward(x, weight, bias):
    x = np.ascontiguousarray(x)
    n, c, h, w = x.shape
    o = weight.shape[0]
    out = np.empty((n, o, h, w), dtype=x.dtype)
    _conv_forward(x, np.ascontiguousarray(weight.reshape(o, c * 9)), bias.astype(x.dtype), out)
    return out


def conv3x3_backward(dy, x, weight):
    x = np.ascontiguousarray(x)
    dy = np.ascontiguousarray(dy)
    n, c, h, w = x.shape
    o = weight.shape[0]
    dx = np.zeros_like(x)
    dw_per = np.empty((n, o, c * 9), dtype=x.dtype)
    _conv_backward(dy, x, np.ascontiguousarray(weight.reshape(o, c * 9)), dx, dw_per)
    dw = np.zeros((o, c * 9), dtype=x.dtype)
    for s in range(n):
        dw += dw_per[s]
    db = dy.sum(axis=(0, 2, 3))
    return dx, dw.reshape(weight.shape), db


@njit(parallel=True, cache=True)
def _pool_forward(x, out, arg):
    n, c, h2, w2 = out.shape
    for s in prange(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    best = x[s, ci, 2 * i, 2 * j]
                    k = 0
                    for q in range(1, 4):
                        v = x[s, ci, 2 * i + q // 2, 2 * j + q % 2]
                        if v > best:
                            best = v
                            k = q
                    out[s, ci, i, j] = best
                    arg[s, ci, i, j] = k


@njit(parallel=True, cache=True)
def _pool_backward(dy, arg, dx):
    n, c, h2, w2 = dy.shape
    for s in prange(n):
        for ci in range(c):
            for i in range(h2):
                for j in range(w2):
                    q = arg[s, ci, i, j]
                    dx[s, ci, 2 * i + q // 2, 2 * j + q % 2] = dy[s, ci, i, j]


def maxpool2_forward(x):
    x = np.ascontiguousarray(x)
    n, c, h, w = x.shape
    out = np.empty((n, c, h // 2, w // 2), dtype=x.dtype)
    arg = np.empty((n, c, h // 2, w // 2), dtype=np.int8)
    _pool_forward(x, out, arg)
    return out, arg


def maxpool2_backward(dy, arg, input_shape):
    dx = np.zeros(input_shape, dtype=dy.dtype)
    _pool_backward(np.ascontiguousarray(dy), arg, dx)
    return dx
