# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Single pass per ray instead of the two or three numpy reductions the
fallback needs. Results are bit-identical to the fallback.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, pow

cnp.import_array()

ctypedef fused real:
    float
    double


def ray_extrema(real[:, :, :] vm):
    cdef Py_ssize_t nu = vm.shape[0], nv = vm.shape[1], n = vm.shape[2]
    cdef Py_ssize_t u, v, k, first, last
    cdef real best, x
    dtype = np.float32 if real is float else np.float64
    mx_arr = np.empty((nu, nv), dtype=dtype)
    first_arr = np.empty((nu, nv), dtype=np.int64)
    last_arr = np.empty((nu, nv), dtype=np.int64)
    cdef real[:, :] mx = mx_arr
    cdef cnp.int64_t[:, :] fst = first_arr
    cdef cnp.int64_t[:, :] lst = last_arr
    with nogil:
        for u in range(nu):
            for v in range(nv):
                best = vm[u, v, 0]
                first = 0
                last = 0
                for k in range(1, n):
                    x = vm[u, v, k]
                    if x > best:
                        best = x
                        first = k
                        last = k
                    elif x == best:
                        last = k
                mx[u, v] = best
                fst[u, v] = first
                lst[u, v] = last
    return mx_arr, first_arr, last_arr


def ray_argmax(real[:, :, :] vm):
    cdef Py_ssize_t nu = vm.shape[0], nv = vm.shape[1], n = vm.shape[2]
    cdef Py_ssize_t u, v, k, first
    cdef real best, x
    dtype = np.float32 if real is float else np.float64
    mx_arr = np.empty((nu, nv), dtype=dtype)
    first_arr = np.empty((nu, nv), dtype=np.int64)
    cdef real[:, :] mx = mx_arr
    cdef cnp.int64_t[:, :] fst = first_arr
    with nogil:
        for u in range(nu):
            for v in range(nv):
                best = vm[u, v, 0]
                first = 0
                for k in range(1, n):
                    x = vm[u, v, k]
                    if x > best:
                        best = x
                        first = k
                mx[u, v] = best
                fst[u, v] = first
    return mx_arr, first_arr


def fill_spans(real[:, :, :] vm, ann_in, zfw_in, zbw_in, mx_in, double tau):
    cdef Py_ssize_t nu = vm.shape[0], nv = vm.shape[1], n = vm.shape[2]
    cdef Py_ssize_t u, v, k, a, b
    cdef double lowest, top
    cdef cnp.uint8_t[:, :] ann = np.ascontiguousarray(ann_in, dtype=np.uint8)
    cdef cnp.int64_t[:, :] zfw = np.ascontiguousarray(zfw_in, dtype=np.int64)
    cdef cnp.int64_t[:, :] zbw = np.ascontiguousarray(zbw_in, dtype=np.int64)
    cdef double[:, :] mx = np.ascontiguousarray(mx_in, dtype=np.float64)
    out_arr = np.zeros((nu, nv, n), dtype=bool)
    cdef cnp.npy_bool[:, :, :] out = out_arr
    with nogil:
        for u in range(nu):
            for v in range(nv):
                if not ann[u, v]:
                    continue
                a = zfw[u, v]
                b = zbw[u, v]
                out[u, v, a] = 1
                out[u, v, b] = 1
                lowest = vm[u, v, a]
                for k in range(a + 1, b + 1):
                    if vm[u, v, k] < lowest:
                        lowest = vm[u, v, k]
                top = mx[u, v]
                if top - lowest <= tau:
                    for k in range(a + 1, b):
                        out[u, v, k] = 1
    return out_arr


def adam_step(double[::1] theta, double[::1] grad, double[::1] m, double[::1] v,
              double lr, double beta1, double beta2, double eps, long t):
    cdef Py_ssize_t i, n = theta.shape[0]
    cdef double bc1 = 1.0 - pow(beta1, t)
    cdef double bc2 = 1.0 - pow(beta2, t)
    cdef double c1 = 1.0 - beta1, c2 = 1.0 - beta2, g
    with nogil:
        for i in range(n):
            g = grad[i]
            m[i] = m[i] * beta1 + c1 * g
            v[i] = v[i] * beta2 + c2 * (g * g)
            theta[i] = theta[i] - lr * (m[i] / bc1) / (sqrt(v[i] / bc2) + eps)


def sigmoid_backward(double[::1] grad, double[::1] y):
    """grad * y * (1 - y): pull a gradient back through the logistic."""
    cdef Py_ssize_t i, n = grad.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = grad[i] * (y[i] * (1.0 - y[i]))
    return out_arr


def sigmoid(double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(n):
            out[i] = 1.0 / (1.0 + exp(-x[i]))
    return out_arr
