# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RBF kernel aggregates.

Each row of the derivative sums is accumulated independently from direct
coordinate differences, so results do not depend on the thread schedule.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp

cnp.import_array()


def rbf_aggregates(const double[:, ::1] X, double s):
    """Return (K, grad_sum, diag_hess_sum) for the RBF kernel of bandwidth s."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, k, j
    cdef double inv2 = 1.0 / (s * s)
    cdef double inv4 = inv2 * inv2
    cdef double dist2, diff, kik, rs
    K_arr = np.empty((n, n), dtype=np.float64)
    G_arr = np.zeros((n, d), dtype=np.float64)
    H_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] K = K_arr
    cdef double[:, ::1] G = G_arr
    cdef double[:, ::1] H = H_arr
    # the Gram matrix is symmetric: one exp per unordered pair
    for i in prange(n, nogil=True, schedule="dynamic"):
        K[i, i] = 1.0
        for k in range(i + 1, n):
            dist2 = 0.0
            for j in range(d):
                diff = X[i, j] - X[k, j]
                dist2 = dist2 + diff * diff
            kik = exp(-0.5 * dist2 * inv2)
            K[i, k] = kik
            K[k, i] = kik
    # raw first and second moments of the differences, scaled once per entry
    for i in prange(n, nogil=True, schedule="static"):
        rs = 0.0
        for k in range(n):
            kik = K[i, k]
            rs = rs + kik
            for j in range(d):
                diff = X[i, j] - X[k, j]
                G[i, j] += kik * diff
                H[i, j] += kik * diff * diff
        for j in range(d):
            G[i, j] = G[i, j] * inv2
            H[i, j] = H[i, j] * inv4 - rs * inv2
    return K_arr, G_arr, H_arr


def pairwise_sq_dists(const double[:, ::1] X):
    """Condensed (i < k) squared Euclidean distances, row-major pair order."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t i, k, j, base
    cdef double acc, diff
    out_arr = np.empty(n * (n - 1) // 2, dtype=np.float64)
    cdef double[::1] out = out_arr
    for i in prange(n, nogil=True, schedule="dynamic"):
        base = i * n - i * (i + 1) // 2
        for k in range(i + 1, n):
            acc = 0.0
            for j in range(d):
                diff = X[i, j] - X[k, j]
                acc = acc + diff * diff
            out[base + k - i - 1] = acc
    return out_arr
