# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-instance score/accumulation kernels.

Same contracts as the NumPy backend in ``_numpy.py``; these typed loops avoid
the per-attribute gather/scatter passes and the temporaries they allocate.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def scores(double[:, ::1] xq, cnp.int64_t[:, ::1] xcat,
           cnp.int64_t[::1] offsets, double[:, ::1] params):
    cdef Py_ssize_t n = xq.shape[0]
    cdef Py_ssize_t n_quant = xq.shape[1]
    cdef Py_ssize_t n_qual = xcat.shape[1]
    cdef Py_ssize_t n_blocks = params.shape[0]
    cdef Py_ssize_t base = 1 + n_quant
    out_arr = np.empty((n, n_blocks), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t l, b, i, k
    cdef double s
    for l in range(n):
        for b in range(n_blocks):
            s = params[b, 0]
            for i in range(n_quant):
                s += params[b, 1 + i] * xq[l, i]
            for k in range(n_qual):
                s += params[b, base + offsets[k] + xcat[l, k]]
            out[l, b] = s
    return out_arr


def accumulate(double[:, ::1] xq, cnp.int64_t[:, ::1] xcat,
               cnp.int64_t[::1] offsets, double[:, ::1] coef, Py_ssize_t n_slots):
    cdef Py_ssize_t n = xq.shape[0]
    cdef Py_ssize_t n_quant = xq.shape[1]
    cdef Py_ssize_t n_qual = xcat.shape[1]
    cdef Py_ssize_t n_blocks = coef.shape[1]
    cdef Py_ssize_t base = 1 + n_quant
    out_arr = np.zeros((n_blocks, n_slots), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t l, b, i, k
    cdef double c
    for l in range(n):
        for b in range(n_blocks):
            c = coef[l, b]
            if c == 0.0:
                continue
            out[b, 0] += c
            for i in range(n_quant):
                out[b, 1 + i] += c * xq[l, i]
            for k in range(n_qual):
                out[b, base + offsets[k] + xcat[l, k]] += c
    return out_arr
