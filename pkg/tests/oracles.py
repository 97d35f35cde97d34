"""Independent reference computations used by the tests.

Nothing here imports the code paths it checks.
"""
import itertools
import math

import numpy as np


def central_diff(f, x, h=1e-5):
    """Central finite-difference gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


def rel_error(a, b):
    """Worst entrywise gap relative to the larger gradient's max magnitude."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = max(np.abs(a).max(), np.abs(b).max())
    if scale == 0.0:
        return 0.0
    return float(np.abs(a - b).max() / scale)


def brute_information_potential(e, sigma):
    e = np.atleast_2d(np.asarray(e, dtype=float).T).T
    n = len(e)
    total = 0.0
    for i, j in itertools.product(range(n), repeat=2):
        total += math.exp(-float(np.sum((e[i] - e[j]) ** 2)) / (2 * sigma**2))
    return total / n**2


def gray_qam256_points():
    """Nearest-neighbour reference: 16x16 Gray grid built by enumeration."""
    gray = [k ^ (k >> 1) for k in range(16)]
    pts = np.empty(256, dtype=complex)
    for i in range(16):
        for q in range(16):
            pts[(gray[i] << 4) | gray[q]] = complex(2 * i - 15, 2 * q - 15) / math.sqrt(170)
    return pts


def mc_symbol_error_rate(snr_db, n, seed):
    """Brute-force 256-QAM SER over AWGN with exhaustive nearest-point search."""
    rng = np.random.default_rng(seed)
    pts = gray_qam256_points()
    labels = rng.integers(0, 256, n)
    sigma2 = 10 ** (-snr_db / 10)
    noise = math.sqrt(sigma2 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    rx = pts[labels] + noise
    errors = 0
    for start in range(0, n, 5000):
        block = rx[start : start + 5000]
        guess = np.argmin(np.abs(block[:, None] - pts[None, :]), axis=1)
        errors += int(np.sum(guess != labels[start : start + 5000]))
    return errors / n


def non_degenerate_batch(rng, n_max=16, dims=(1, 2, 4), max_exponent=10.0):
    """Random residuals whose median-rule kernel is far from saturation."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        d = int(rng.choice(dims))
        e = rng.standard_normal((n, d))
        diff = e[:, None, :] - e[None, :, :]
        D = np.sum(diff**2, axis=2)
        sigma = max(float(np.median(D)), 1e-6)
        off = D[~np.eye(n, dtype=bool)]
        if off.min() > 1e-2 and D.max() / sigma**2 <= max_exponent:
            return e, sigma
