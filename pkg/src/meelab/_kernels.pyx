# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the matrix-path entropy estimator.

Every reduction runs in a fixed (i, j, k) order so that results are
bitwise reproducible for a given input.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

cdef double LN2 = 0.6931471805599453


def pairwise_sq_dists(const double[:, ::1] e):
    cdef Py_ssize_t n = e.shape[0], d = e.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] D = out
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = e[i, k] - e[j, k]
                acc += diff * diff
            D[i, j] = acc
            D[j, i] = acc
    return out


def gram_matrix(const double[:, ::1] e, double sigma):
    cdef Py_ssize_t n = e.shape[0], d = e.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, kij
    cdef double scale = 1.0 / (2.0 * sigma * sigma)
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    for i in range(n):
        K[i, i] = 1.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = e[i, k] - e[j, k]
                acc += diff * diff
            kij = exp(-acc * scale)
            K[i, j] = kij
            K[j, i] = kij
    return out


def matrix_mee(const double[:, ::1] e, double sigma):
    """Return ``(value, grad)`` for -0.5*log2(sum_ij A_ij^2), A = K / N."""
    cdef Py_ssize_t n = e.shape[0], d = e.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, k2, frob, coef
    cdef double scale = 1.0 / (2.0 * sigma * sigma)
    grad = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] G = grad
    cdef double[:, ::1] K2 = np.empty((n, n), dtype=np.float64)

    frob = <double>n  # diagonal terms, K_ii == 1
    for i in range(n):
        K2[i, i] = 1.0
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = e[i, k] - e[j, k]
                acc += diff * diff
            k2 = exp(-2.0 * acc * scale)
            K2[i, j] = k2
            K2[j, i] = k2
            frob += 2.0 * k2
    frob /= <double>(n * n)

    coef = 2.0 / (<double>(n * n) * sigma * sigma * frob * LN2)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k2 = K2[i, j]
            for k in range(d):
                G[i, k] += k2 * (e[i, k] - e[j, k])
        for k in range(d):
            G[i, k] *= coef

    return -0.5 * log(frob) / LN2, grad
