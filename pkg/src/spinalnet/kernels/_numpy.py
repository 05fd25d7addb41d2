"""Pure-numpy fallback kernels: im2col-style convolution and 2x2 pooling.

Numerically interchangeable with the compiled direct-loop kernels (agreement
to ~1e-12; summation order differs, so not bit-identical across backends).
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w):
    # x: (n, c, h, w), w: (out_ch, c, k, k) -> (n, out_ch, h-k+1, w-k+1)
    k = w.shape[2]
    windows = sliding_window_view(x, (k, k), axis=(2, 3))  # (n, c, oh, ow, k, k)
    return np.ascontiguousarray(np.einsum("nchwij,ocij->nohw", windows, w, optimize=True))


def conv2d_backward_input(g, w, in_h, in_w):
    # Full correlation of the upstream gradient with the flipped kernel.
    k = w.shape[2]
    pad = k - 1
    g_pad = np.pad(g, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(g_pad, (k, k), axis=(2, 3))  # (n, o, h, w, k, k)
    w_flip = w[:, :, ::-1, ::-1]
    return np.ascontiguousarray(np.einsum("nohwij,ocij->nchw", windows, w_flip, optimize=True))


def conv2d_backward_weight(x, g, k):
    windows = sliding_window_view(x, (k, k), axis=(2, 3))  # (n, c, oh, ow, k, k)
    return np.ascontiguousarray(np.einsum("nchwij,nohw->ocij", windows, g, optimize=True))


def maxpool2d_forward(x):
    n, c, h, w = x.shape
    # Window elements ordered row-major within each 2x2 window, so argmax
    # picks the first maximum in row-major scan order on ties.
    tiles = x.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    flat = np.ascontiguousarray(tiles).reshape(n, c, h // 2, w // 2, 4)
    argmax = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, argmax[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), argmax.astype(np.int64)


def maxpool2d_backward(g, argmax, in_h, in_w):
    n, c, oh, ow = g.shape
    scatter = np.zeros((n, c, oh, ow, 4), dtype=np.float64)
    np.put_along_axis(scatter, argmax[..., None], g[..., None], axis=-1)
    tiles = scatter.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    return np.ascontiguousarray(tiles).reshape(n, c, in_h, in_w)
