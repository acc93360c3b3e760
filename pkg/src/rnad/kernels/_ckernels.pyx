# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: pairwise squared distances and Gaussian kernel sums.

Signature-compatible with rnad.kernels.numpy_backend; callers go through
rnad.kernels, which validates inputs and picks a backend at import.
"""

import numpy as np

from libc.math cimport exp


def pairwise_sq_dists(double[:, ::1] points, double[:, ::1] centers):
    """Squared Euclidean distance from every point to every center."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = centers.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = points[i, k] - centers[j, k]
                    acc += diff * diff
                out[i, j] = acc
    return out_arr


def gaussian_kernel_sums(double[:, ::1] queries, double[:, ::1] support,
                         double bandwidth):
    """sum_j exp(-||q - s_j||^2 / (2 h^2)) for each query row q."""
    cdef Py_ssize_t nq = queries.shape[0]
    cdef Py_ssize_t ns = support.shape[0]
    cdef Py_ssize_t d = queries.shape[1]
    out_arr = np.zeros(nq, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth)
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, total
    with nogil:
        for i in range(nq):
            total = 0.0
            for j in range(ns):
                acc = 0.0
                for k in range(d):
                    diff = queries[i, k] - support[j, k]
                    acc += diff * diff
                total += exp(-acc * inv_two_h2)
            out[i] = total
    return out_arr
