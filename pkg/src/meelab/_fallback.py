"""Pure numpy versions of the routines in ``_kernels.pyx``.

Used when the compiled extension is missing or ``MEELAB_BACKEND=python``.
"""
import math

import numpy as np


def pairwise_sq_dists(e):
    diff = e[:, None, :] - e[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def gram_matrix(e, sigma):
    K = np.exp(-pairwise_sq_dists(e) * (1.0 / (2.0 * sigma * sigma)))
    np.fill_diagonal(K, 1.0)
    return K


def matrix_mee(e, sigma):
    n = e.shape[0]
    diff = e[:, None, :] - e[None, :, :]
    K2 = np.exp(-2.0 * np.einsum("ijk,ijk->ij", diff, diff) * (1.0 / (2.0 * sigma * sigma)))
    np.fill_diagonal(K2, 1.0)
    frob = K2.sum() / (n * n)
    coef = 2.0 / (n * n * sigma * sigma * frob * math.log(2.0))
    # summing K2_ij (e_i - e_j) directly; rowsum * e - K2 @ e cancels badly
    grad = coef * np.einsum("ij,ijk->ik", K2, diff)
    return -0.5 * math.log2(frob), grad
