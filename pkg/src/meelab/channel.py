"""Over-the-air feature link: 8-bit quantization, Gray 256-QAM, AWGN/Rayleigh.

Each real feature value is quantized to 8 bits and carried by one 256-QAM
symbol. The upper nibble selects the in-phase level and the lower nibble
the quadrature level, both through a 4-bit Gray code. Rayleigh mode
applies an independent unit-power complex gain per symbol, which the
receiver removes by zero-forcing with perfect channel knowledge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericError

MODES = ("ideal", "awgn", "rayleigh")
BITS = 8
LEVELS = 16  # per axis
ENERGY_SCALE = 1.0 / np.sqrt(170.0)  # mean |point|^2 of the raw grid is 2 * 85


@dataclass(frozen=True)
class ChannelConfig:
    mode: str = "ideal"
    snr_db: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"channel mode must be one of {MODES}, got {self.mode!r}")
        if not np.isfinite(self.snr_db):
            raise ConfigError("snr_db must be finite")


@dataclass(frozen=True)
class Constellation:
    points: np.ndarray  # complex, indexed by 8-bit label
    axis_levels: np.ndarray  # scaled PAM amplitude for each level index 0..15
    gray: np.ndarray  # level index -> 4-bit Gray label
    gray_inverse: np.ndarray  # 4-bit Gray label -> level index

    @property
    def order(self) -> int:
        return self.points.shape[0]

    def modulate(self, labels) -> np.ndarray:
        return self.points[np.asarray(labels, dtype=np.int64)]

    def demodulate(self, symbols) -> np.ndarray:
        """Nearest-point decision; the square grid separates per axis."""
        s = np.asarray(symbols) / ENERGY_SCALE
        i_idx = np.clip(np.rint((s.real + 15.0) / 2.0), 0, LEVELS - 1).astype(np.int64)
        q_idx = np.clip(np.rint((s.imag + 15.0) / 2.0), 0, LEVELS - 1).astype(np.int64)
        return (self.gray[i_idx] << 4) | self.gray[q_idx]


@lru_cache(maxsize=1)
def build_constellation() -> Constellation:
    idx = np.arange(LEVELS)
    gray = idx ^ (idx >> 1)
    gray_inverse = np.empty_like(gray)
    gray_inverse[gray] = idx
    levels = (2.0 * idx - 15.0) * ENERGY_SCALE
    labels = np.arange(1 << BITS)
    points = levels[gray_inverse[labels >> 4]] + 1j * levels[gray_inverse[labels & 0xF]]
    for arr in (points, levels, gray, gray_inverse):
        arr.setflags(write=False)
    return Constellation(points, levels, gray, gray_inverse)


def noise_power_from_snr(snr_db: float, signal_power: float = 1.0) -> float:
    if signal_power <= 0:
        raise ValueError("signal power must be positive")
    return signal_power * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class FeatureCodec:
    """Per-feature min-max 8-bit quantizer."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, features) -> "FeatureCodec":
        x = np.asarray(features, dtype=np.float64)
        lo, hi = x.min(axis=0), x.max(axis=0)
        # constant columns still need a nonzero range
        hi = np.where(hi > lo, hi, lo + 1.0)
        return cls(lo, hi)

    @property
    def step(self) -> np.ndarray:
        return (self.hi - self.lo) / ((1 << BITS) - 1)

    def quantize(self, features) -> np.ndarray:
        x = np.clip(np.asarray(features, dtype=np.float64), self.lo, self.hi)
        return np.rint((x - self.lo) / self.step).astype(np.int64)

    def dequantize(self, codes) -> np.ndarray:
        return self.lo + np.asarray(codes, dtype=np.float64) * self.step


def sample_fading(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian gains with ``E|h|^2 = 1``."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_noise(rng: np.random.Generator, shape, power: float) -> np.ndarray:
    """Complex AWGN with total power ``power`` split evenly across I and Q."""
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def transmit_labels(labels, cfg: ChannelConfig, rng: np.random.Generator | None = None) -> np.ndarray:
    """Send 8-bit labels through the configured channel and hard-decide them."""
    const = build_constellation()
    labels = np.asarray(labels, dtype=np.int64)
    if cfg.mode == "ideal":
        return labels.copy()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    x = const.modulate(labels)
    power = noise_power_from_snr(cfg.snr_db, 1.0)
    if cfg.mode == "rayleigh":
        h = sample_fading(rng, x.shape)
        y = h * x + sample_noise(rng, x.shape, power)
        y = y / h
    else:
        y = x + sample_noise(rng, x.shape, power)
    return const.demodulate(y)


def transmit(features, codec: FeatureCodec, cfg: ChannelConfig, rng: np.random.Generator | None = None):
    """Quantize, modulate, pass through the channel, demodulate, dequantize.

    Pass ``rng`` to draw fresh impairments from a running stream; otherwise
    the stream is seeded from ``cfg.seed`` and the call is deterministic.
    """
    x = np.asarray(features, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NumericError("features contain non-finite values")
    return codec.dequantize(transmit_labels(codec.quantize(x), cfg, rng))
