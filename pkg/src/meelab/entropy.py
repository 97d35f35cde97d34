"""Error-entropy losses and the MSE/MAE baselines.

Residuals are passed as an ``(N, d)`` array (a 1-D array is read as
``d = 1``). Every loss returns a :class:`LossResult` whose ``grad`` is the
derivative of ``value`` with respect to each residual, with the kernel
bandwidth held fixed.

Two estimators of Renyi's quadratic error entropy are provided:

``kernel_mee``
    ``-ln((1/N^2) sum_ij G(e_i - e_j))`` evaluated by an explicit Python
    double loop. It is intentionally slow and serves as the timing baseline.
``matrix_mee``
    ``-0.5 log2(sum_i lambda_i(A)^2)`` for the trace-normalized Gram matrix
    ``A``. The eigenvalue sum is evaluated as the squared Frobenius norm of
    ``A``, so no eigendecomposition is needed during training.
    ``spectral_mee`` computes the same number from an explicit Jacobi
    eigendecomposition and is kept as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import NumericError, ShapeError

SIGMA_MIN = 1e-6
SPECTRAL_MAX_N = 128


@dataclass(frozen=True)
class LossResult:
    value: float
    grad: np.ndarray


def as_error_batch(errors, min_n: int = 1) -> np.ndarray:
    """Coerce residuals to a finite, C-contiguous ``(N, d)`` float64 array."""
    e = np.asarray(errors, dtype=np.float64)
    if e.ndim == 1:
        e = e[:, None]
    if e.ndim != 2:
        raise ShapeError(f"residuals must be 1-D or 2-D, got shape {e.shape}")
    if e.shape[0] < min_n:
        raise ShapeError(f"need at least {min_n} residuals, got {e.shape[0]}")
    if not np.all(np.isfinite(e)):
        raise NumericError("residuals contain non-finite values")
    return np.ascontiguousarray(e)


def check_bandwidth(sigma) -> float:
    sigma = float(sigma)
    if not math.isfinite(sigma) or sigma < SIGMA_MIN:
        raise ValueError(f"bandwidth must be finite and >= {SIGMA_MIN}, got {sigma}")
    return sigma


def gaussian_window(sq_dist, sigma):
    """Unnormalized Gaussian window ``exp(-sq_dist / (2 sigma^2))``.

    Works elementwise on arrays; returns a float for scalar input.
    """
    sigma = check_bandwidth(sigma)
    sq = np.asarray(sq_dist, dtype=np.float64)
    if np.any(sq < 0):
        raise ValueError("squared distances must be nonnegative")
    out = np.exp(-sq / (2.0 * sigma * sigma))
    return float(out) if out.ndim == 0 else out


def pairwise_sq_dists(errors) -> np.ndarray:
    """``D[i, j] = ||e_i - e_j||^2``; symmetric with a zero diagonal."""
    return _backend.pairwise_sq_dists(as_error_batch(errors))


def median_bandwidth(errors) -> float:
    """Adaptive bandwidth: median of all N^2 squared pairwise differences.

    The median is taken literally over the squared differences (no square
    root) and includes the N zero diagonal pairs. The result is floored at
    ``SIGMA_MIN`` so constant batches stay usable.
    """
    D = pairwise_sq_dists(as_error_batch(errors, min_n=2))
    return max(float(np.median(D)), SIGMA_MIN)


def median_distance_bandwidth(errors) -> float:
    """Square root of :func:`median_bandwidth`, i.e. a width in residual units.

    Unlike the literal rule this scales linearly with the residuals, so the
    kernel does not saturate when residuals are much smaller than 1.
    """
    return max(math.sqrt(median_bandwidth(errors)), SIGMA_MIN)


def gram_matrix(errors, sigma) -> np.ndarray:
    """Gaussian Gram matrix over residuals, unit diagonal by construction."""
    return _backend.gram_matrix(as_error_batch(errors, min_n=2), check_bandwidth(sigma))


def normalize_gram(K) -> np.ndarray:
    """``A_ij = K_ij / (N sqrt(K_ii K_jj))``, so that ``trace(A) == 1``."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"Gram matrix must be square, got shape {K.shape}")
    diag = np.sqrt(np.diag(K))
    return K / np.outer(diag, diag) / K.shape[0]


def kernel_mee(errors, sigma) -> LossResult:
    """Kernel (Parzen) estimate of the quadratic error entropy.

    Uses a plain nested loop over all ordered pairs. The gradient is
    ``(2 / (N^2 V sigma^2)) sum_j G_ij (e_i - e_j)`` where ``V`` is the
    information potential.
    """
    e = as_error_batch(errors, min_n=2)
    sigma = check_bandwidth(sigma)
    n, d = e.shape
    rows = e.tolist()
    inv = 1.0 / (2.0 * sigma * sigma)
    potential = 0.0
    acc = [[0.0] * d for _ in range(n)]
    for i in range(n):
        ei = rows[i]
        gi = acc[i]
        for j in range(n):
            ej = rows[j]
            sq = 0.0
            for k in range(d):
                diff = ei[k] - ej[k]
                sq += diff * diff
            g = math.exp(-sq * inv)
            potential += g
            for k in range(d):
                gi[k] += g * (ei[k] - ej[k])
    potential /= n * n
    coef = 2.0 / (n * n * potential * sigma * sigma)
    grad = coef * np.array(acc)
    return LossResult(-math.log(potential), grad)


def matrix_mee(errors, sigma, literal_sign: bool = False) -> LossResult:
    """Matrix-based error entropy ``-0.5 log2(sum_ij A_ij^2)``.

    With ``literal_sign=True`` the sign is flipped to ``+0.5 log2(...)``,
    which is maximized rather than minimized by concentrated errors. It
    exists for inspection only.
    """
    value, grad = _backend.matrix_mee(as_error_batch(errors, min_n=2), check_bandwidth(sigma))
    if literal_sign:
        return LossResult(-value, -grad)
    return LossResult(value, grad)


def jacobi_eigvalsh(A, tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by parallel-ordered Jacobi rotations.

    Each round applies ``N/2`` disjoint plane rotations from a round-robin
    pairing at once; a sweep visits every index pair exactly once.
    Returned in ascending order.
    """
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ShapeError(f"matrix must be square, got shape {A.shape}")
    if n == 1:
        return A.diagonal().copy()
    m = n + (n % 2)
    if m != n:
        # dummy index carries the bye in each round
        A = np.pad(A, ((0, 1), (0, 1)))
    players = np.arange(m)
    rounds = []
    for _ in range(m - 1):
        p, q = players[: m // 2], players[::-1][: m // 2]
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        players = np.concatenate(([players[0]], np.roll(players[1:], 1)))

    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= tol * scale:
            return np.sort(A.diagonal()[:n])
        for p, q in rounds:
            apq = A[p, q]
            rot = apq != 0.0
            with np.errstate(over="ignore", divide="ignore"):
                # |tau| -> inf for subnormal a_pq, which correctly gives t = 0
                tau = (A[q, q] - A[p, p]) / (2.0 * np.where(rot, apq, 1.0))
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(rot, t, 0.0)
            c = (1.0 / np.hypot(1.0, t))[:, None]
            s = t[:, None] * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :], A[q, :] = c * Ap - s * Aq, s * Ap + c * Aq
            Ap, Aq = A[:, p], A[:, q]
            A[:, p], A[:, q] = Ap * c.T - Aq * s.T, Ap * s.T + Aq * c.T
    raise NumericError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def spectral_mee(errors, sigma, literal_sign: bool = False) -> float:
    """Matrix-based entropy from an explicit eigendecomposition of ``A``.

    Slow, capped at ``SPECTRAL_MAX_N`` samples; use it to check
    :func:`matrix_mee`.
    """
    e = as_error_batch(errors, min_n=2)
    if e.shape[0] > SPECTRAL_MAX_N:
        raise ShapeError(f"spectral oracle is capped at N={SPECTRAL_MAX_N}, got {e.shape[0]}")
    lam = jacobi_eigvalsh(normalize_gram(gram_matrix(e, sigma)))
    value = -0.5 * math.log2(float(np.sum(lam * lam)))
    return -value if literal_sign else value


def mse_loss(errors) -> LossResult:
    e = as_error_batch(errors)
    size = e.size
    # overflow surfaces as an infinite value, which callers check for
    with np.errstate(over="ignore"):
        return LossResult(float(np.sum(e * e)) / size, 2.0 * e / size)


def mae_loss(errors) -> LossResult:
    """Mean absolute residual; the subgradient at exactly zero is 0."""
    e = as_error_batch(errors)
    size = e.size
    return LossResult(float(np.sum(np.abs(e))) / size, np.sign(e) / size)
