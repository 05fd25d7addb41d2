# cython: boundscheck=False, wraparound=False, cdivision=True
"""Direct-loop convolution and pooling kernels (compiled hot path)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], wd = x.shape[3]
    cdef Py_ssize_t oc = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t oh = h - k + 1, ow = wd - k + 1
    out_arr = np.zeros((n, oc, oh, ow), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, o, ci, i, j, p, q
    cdef double acc
    for b in range(n):
        for o in range(oc):
            for i in range(oh):
                for j in range(ow):
                    acc = 0.0
                    for ci in range(c):
                        for p in range(k):
                            for q in range(k):
                                acc += x[b, ci, i + p, j + q] * w[o, ci, p, q]
                    out[b, o, i, j] = acc
    return out_arr


def conv2d_backward_input(double[:, :, :, ::1] g, double[:, :, :, ::1] w,
                          Py_ssize_t in_h, Py_ssize_t in_w):
    cdef Py_ssize_t n = g.shape[0], oc = g.shape[1], oh = g.shape[2], ow = g.shape[3]
    cdef Py_ssize_t c = w.shape[1], k = w.shape[2]
    out_arr = np.zeros((n, c, in_h, in_w), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = out_arr
    cdef Py_ssize_t b, o, ci, i, j, p, q
    cdef double gv
    for b in range(n):
        for o in range(oc):
            for i in range(oh):
                for j in range(ow):
                    gv = g[b, o, i, j]
                    for ci in range(c):
                        for p in range(k):
                            for q in range(k):
                                dx[b, ci, i + p, j + q] += gv * w[o, ci, p, q]
    return out_arr


def conv2d_backward_weight(double[:, :, :, ::1] x, double[:, :, :, ::1] g,
                           Py_ssize_t k):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1]
    cdef Py_ssize_t oc = g.shape[1], oh = g.shape[2], ow = g.shape[3]
    out_arr = np.zeros((oc, c, k, k), dtype=np.float64)
    cdef double[:, :, :, ::1] dw = out_arr
    cdef Py_ssize_t b, o, ci, i, j, p, q
    cdef double gv
    for b in range(n):
        for o in range(oc):
            for i in range(oh):
                for j in range(ow):
                    gv = g[b, o, i, j]
                    for ci in range(c):
                        for p in range(k):
                            for q in range(k):
                                dw[o, ci, p, q] += gv * x[b, ci, i + p, j + q]
    return out_arr


def maxpool2d_forward(double[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t oh = h // 2, ow = w // 2
    out_arr = np.empty((n, c, oh, ow), dtype=np.float64)
    arg_arr = np.empty((n, c, oh, ow), dtype=np.int64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef long long[:, :, :, ::1] arg = arg_arr
    cdef Py_ssize_t b, ci, i, j, p, q, best_idx
    cdef double v, best
    for b in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    best = x[b, ci, 2 * i, 2 * j]
                    best_idx = 0
                    # row-major scan of the 2x2 window; strict > keeps first tie
                    for p in range(2):
                        for q in range(2):
                            v = x[b, ci, 2 * i + p, 2 * j + q]
                            if v > best:
                                best = v
                                best_idx = 2 * p + q
                    out[b, ci, i, j] = best
                    arg[b, ci, i, j] = best_idx
    return out_arr, arg_arr


def maxpool2d_backward(double[:, :, :, ::1] g, long long[:, :, :, ::1] argmax,
                       Py_ssize_t in_h, Py_ssize_t in_w):
    cdef Py_ssize_t n = g.shape[0], c = g.shape[1], oh = g.shape[2], ow = g.shape[3]
    out_arr = np.zeros((n, c, in_h, in_w), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = out_arr
    cdef Py_ssize_t b, ci, i, j, idx
    for b in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    idx = argmax[b, ci, i, j]
                    dx[b, ci, 2 * i + idx // 2, 2 * j + idx % 2] += g[b, ci, i, j]
    return out_arr
