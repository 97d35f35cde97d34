"""Minimum error entropy losses with a small numpy trainer for wireless tasks."""
from ._backend import BACKEND
from .entropy import (
    LossResult,
    gaussian_window,
    gram_matrix,
    kernel_mee,
    mae_loss,
    matrix_mee,
    median_bandwidth,
    mse_loss,
    normalize_gram,
    pairwise_sq_dists,
    spectral_mee,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "LossResult",
    "gaussian_window",
    "gram_matrix",
    "kernel_mee",
    "mae_loss",
    "matrix_mee",
    "median_bandwidth",
    "mse_loss",
    "normalize_gram",
    "pairwise_sq_dists",
    "spectral_mee",
]
