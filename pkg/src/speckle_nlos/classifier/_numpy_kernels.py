"""Pure-numpy conv/pool kernels (reference path, always available).

Layout is NCHW. Convolutions are 3x3, stride 1, zero padding 1.
"""

import numpy as np


def im2col(x):
    """(N, C, H, W) -> (N, C*9, H*W) patch matrix, rows ordered (c, ky, kx)."""
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = np.empty((n, c, 3, 3, h, w), dtype=x.dtype)
    for ky in range(3):
        for kx in range(3):
            cols[:, :, ky, kx] = xp[:, :, ky : ky + h, kx : kx + w]
    return cols.reshape(n, c * 9, h * w)


def col2im(cols, shape):
    n, c, h, w = shape
    cols = cols.reshape(n, c, 3, 3, h, w)
    xp = np.zeros((n, c, h + 2, w + 2), dtype=cols.dtype)
    for ky in range(3):
        for kx in range(3):
            xp[:, :, ky : ky + h, kx : kx + w] += cols[:, :, ky, kx]
    return xp[:, :, 1:-1, 1:-1]


def conv3x3_forward(x, weight, bias):
    n, c, h, w = x.shape
    o = weight.shape[0]
    cols = im2col(x)
    y = np.matmul(weight.reshape(o, c * 9), cols)
    y += bias[None, :, None]
    return y.reshape(n, o, h, w)


def conv3x3_backward(dy, x, weight):
    """Gradients w.r.t. input, weight and bias."""
    n, c, h, w = x.shape
    o = weight.shape[0]
    cols = im2col(x)
    g = dy.reshape(n, o, h * w)
    dw = np.zeros((o, c * 9), dtype=x.dtype)
    for i in range(n):
        dw += g[i] @ cols[i].T
    db = g.sum(axis=(0, 2))
    dcols = np.matmul(weight.reshape(o, c * 9).T, g)
    dx = col2im(dcols, x.shape)
    return dx, dw.reshape(weight.shape), db


def maxpool2_forward(x):
    """2x2/2 max pooling; odd trailing rows/columns are dropped.

    Returns the pooled array and the winning position (0..3, row-major within
    the window, first maximum on ties) for each output cell.
    """
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    win = x[:, :, : 2 * h2, : 2 * w2].reshape(n, c, h2, 2, w2, 2)
    win = win.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    arg = win.argmax(axis=-1).astype(np.int8)
    y = np.take_along_axis(win, arg[..., None].astype(np.intp), axis=-1)[..., 0]
    return y, arg


def maxpool2_backward(dy, arg, input_shape):
    n, c, h, w = input_shape
    h2, w2 = dy.shape[2], dy.shape[3]
    onehot = arg[..., None] == np.arange(4, dtype=np.int8)
    win = np.where(onehot, dy[..., None], 0).astype(dy.dtype)
    win = win.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * h2, 2 * w2)
    dx = np.zeros(input_shape, dtype=dy.dtype)
    dx[:, :, : 2 * h2, : 2 * w2] = win
    return dx
