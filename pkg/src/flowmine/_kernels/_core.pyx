# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled encoder hot kernels; same contract as pyref.

Fused single-pass loops over C-contiguous float64 buffers: no NumPy
temporaries, one traversal per reduction. Keep in lockstep with pyref.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt, tanh, INFINITY

cnp.import_array()

BACKEND = "cython"

cdef double GELU_C = sqrt(2.0 / np.pi)
cdef double GELU_A = 0.044715


def masked_softmax(double[:, ::1] scores, cnp.uint8_t[:, ::1] mask):
    cdef Py_ssize_t rows = scores.shape[0], cols = scores.shape[1]
    out_arr = np.zeros((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double m, denom, e
    for i in range(rows):
        m = -INFINITY
        for j in range(cols):
            if mask[i, j] and scores[i, j] > m:
                m = scores[i, j]
        if m == -INFINITY:
            continue
        denom = 0.0
        for j in range(cols):
            if mask[i, j]:
                e = exp(scores[i, j] - m)
                out[i, j] = e
                denom += e
        for j in range(cols):
            if mask[i, j]:
                out[i, j] /= denom
    return out_arr


def softmax_backward(double[:, ::1] probs, double[:, ::1] dprobs):
    cdef Py_ssize_t rows = probs.shape[0], cols = probs.shape[1]
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double inner
    for i in range(rows):
        inner = 0.0
        for j in range(cols):
            inner += dprobs[i, j] * probs[i, j]
        for j in range(cols):
            out[i, j] = probs[i, j] * (dprobs[i, j] - inner)
    return out_arr


def layernorm_forward(double[:, ::1] x, double[::1] gain, double[::1] bias, double eps):
    cdef Py_ssize_t rows = x.shape[0], dim = x.shape[1]
    y_arr = np.empty((rows, dim), dtype=np.float64)
    mean_arr = np.empty(rows, dtype=np.float64)
    rstd_arr = np.empty(rows, dtype=np.float64)
    cdef double[:, ::1] y = y_arr
    cdef double[::1] mean = mean_arr, rstd = rstd_arr
    cdef Py_ssize_t i, j
    cdef double mu, var, d, r
    for i in range(rows):
        mu = 0.0
        for j in range(dim):
            mu += x[i, j]
        mu /= dim
        var = 0.0
        for j in range(dim):
            d = x[i, j] - mu
            var += d * d
        var /= dim
        r = 1.0 / sqrt(var + eps)
        mean[i] = mu
        rstd[i] = r
        for j in range(dim):
            y[i, j] = (x[i, j] - mu) * r * gain[j] + bias[j]
    return y_arr, mean_arr, rstd_arr


def layernorm_backward(double[:, ::1] x, double[::1] mean, double[::1] rstd,
                       double[::1] gain, double[:, ::1] dy):
    cdef Py_ssize_t rows = x.shape[0], dim = x.shape[1]
    dx_arr = np.empty((rows, dim), dtype=np.float64)
    dgain_arr = np.zeros(dim, dtype=np.float64)
    dbias_arr = np.zeros(dim, dtype=np.float64)
    cdef double[:, ::1] dx = dx_arr
    cdef double[::1] dgain = dgain_arr, dbias = dbias_arr
    cdef Py_ssize_t i, j
    cdef double xhat, dxhat, m1, m2, r
    for i in range(rows):
        r = rstd[i]
        m1 = 0.0
        m2 = 0.0
        for j in range(dim):
            xhat = (x[i, j] - mean[i]) * r
            dxhat = dy[i, j] * gain[j]
            dgain[j] += dy[i, j] * xhat
            dbias[j] += dy[i, j]
            m1 += dxhat
            m2 += dxhat * xhat
        m1 /= dim
        m2 /= dim
        for j in range(dim):
            xhat = (x[i, j] - mean[i]) * r
            dxhat = dy[i, j] * gain[j]
            dx[i, j] = r * (dxhat - m1 - xhat * m2)
    return dx_arr, dgain_arr, dbias_arr


def gelu_forward(double[:, ::1] x):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double v, inner
    for i in range(rows):
        for j in range(cols):
            v = x[i, j]
            inner = GELU_C * (v + GELU_A * v * v * v)
            out[i, j] = 0.5 * v * (1.0 + tanh(inner))
    return out_arr


def gelu_backward(double[:, ::1] x, double[:, ::1] dy):
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    out_arr = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double v, inner, t, dinner
    for i in range(rows):
        for j in range(cols):
            v = x[i, j]
            inner = GELU_C * (v + GELU_A * v * v * v)
            t = tanh(inner)
            dinner = GELU_C * (1.0 + 3.0 * GELU_A * v * v)
            out[i, j] = dy[i, j] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner)
    return out_arr


def softmax_xent(double[:, ::1] logits, long[::1] labels, long ignore):
    cdef Py_ssize_t rows = logits.shape[0], vocab = logits.shape[1]
    dlogits_arr = np.zeros((rows, vocab), dtype=np.float64)
    cdef double[:, ::1] dlogits = dlogits_arr
    cdef Py_ssize_t i, j
    cdef long label
    cdef long count = 0
    cdef double loss_sum = 0.0, m, denom, p
    for i in range(rows):
        label = labels[i]
        if label == ignore:
            continue
        count += 1
        m = logits[i, 0]
        for j in range(1, vocab):
            if logits[i, j] > m:
                m = logits[i, j]
        denom = 0.0
        for j in range(vocab):
            denom += exp(logits[i, j] - m)
        loss_sum += log(denom) - (logits[i, label] - m)
        for j in range(vocab):
            p = exp(logits[i, j] - m) / denom
            dlogits[i, j] = p
        dlogits[i, label] -= 1.0
    return loss_sum, count, dlogits_arr
