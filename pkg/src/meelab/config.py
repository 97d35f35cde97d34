"""Declarative experiment description, loadable from a JSON document.

Keys in the document mirror the :class:`ExperimentConfig` field names; the
``channel`` key holds a nested object with ``mode``, ``snr_db`` and
``seed``. Unknown keys are rejected.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .channel import ChannelConfig
from .errors import ConfigError

USE_CASES = ("regression", "localization", "synthetic-regression", "synthetic-localization")
LOSSES = ("mee-matrix", "mee-kernel", "mse", "mae")
BANDWIDTH_RULES = ("median-sq", "median-dist")


@dataclass(frozen=True)
class ExperimentConfig:
    use_case: str = "synthetic-regression"
    loss: str = "mee-matrix"
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    # hidden and output widths; the input width comes from the data
    layer_sizes: tuple[int, ...] = (20, 20, 30, 1)
    epochs: int = 300
    batch_size: int = 32
    learning_rate: float = 0.0005
    seed: int = 0
    paper_literal_sign: bool = False
    abs_residual: bool = False
    calibrate_bias: bool = True
    # "median-sq" uses the median squared difference itself as the width
    bandwidth_rule: str = "median-sq"
    run_id: str | None = None
    # data sources
    data_path: str | None = None
    target_columns: tuple[str, ...] = ("y",)
    feature_columns: tuple[str, ...] | None = None
    coord_columns: tuple[str, ...] = ("LONGITUDE", "LATITUDE")
    missing_value: float = 100.0
    drop_threshold: float = 0.98
    train_fraction: float = 0.8
    split_seed: int = 0
    n_samples: int = 2000
    outlier_fraction: float = 0.1
    n_aps: int = 16

    def __post_init__(self):
        if self.use_case not in USE_CASES:
            raise ConfigError(f"use_case must be one of {USE_CASES}, got {self.use_case!r}")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.bandwidth_rule not in BANDWIDTH_RULES:
            raise ConfigError(f"bandwidth_rule must be one of {BANDWIDTH_RULES}, got {self.bandwidth_rule!r}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2 (entropy estimation needs pairs)")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if not self.layer_sizes or any(int(s) < 1 for s in self.layer_sizes):
            raise ConfigError(f"invalid layer_sizes {self.layer_sizes}")
        if self.use_case in ("regression", "localization") and not self.data_path:
            raise ConfigError(f"use_case {self.use_case!r} needs data_path")

    @property
    def is_mee(self) -> bool:
        return self.loss.startswith("mee")

    @property
    def name(self) -> str:
        if self.run_id:
            return self.run_id
        ch = self.channel
        snr = "" if ch.mode == "ideal" else f"-{ch.snr_db:g}dB"
        return f"{self.use_case}-{self.loss}-{ch.mode}{snr}-s{self.seed}"

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        ch = data.get("channel")
        if isinstance(ch, dict):
            extra = sorted(set(ch) - {"mode", "snr_db", "seed"})
            if extra:
                raise ConfigError(f"unknown channel keys: {extra}")
            data["channel"] = ChannelConfig(**ch)
        for key in ("layer_sizes", "target_columns", "feature_columns", "coord_columns"):
            if isinstance(data.get(key), list):
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def with_overrides(self, **kw) -> "ExperimentConfig":
        """``replace`` that also accepts ``channel_mode``/``snr_db``/``channel_seed``."""
        ch = self.channel
        ch_kw = {}
        for src, dst in (("channel_mode", "mode"), ("snr_db", "snr_db"), ("channel_seed", "seed")):
            if kw.get(src) is not None:
                ch_kw[dst] = kw.pop(src)
            else:
                kw.pop(src, None)
        kw = {k: v for k, v in kw.items() if v is not None}
        if ch_kw:
            kw["channel"] = replace(ch, **ch_kw)
        return replace(self, **kw)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(read_json(path))


def read_json(path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def use_case_1(**kw) -> ExperimentConfig:
    """Over-the-air regression: 300 epochs, batch 32, lr 5e-4, (20, 20, 30, 1)."""
    base = ExperimentConfig(
        use_case="synthetic-regression",
        layer_sizes=(20, 20, 30, 1),
        epochs=300,
        batch_size=32,
        learning_rate=0.0005,
        channel=ChannelConfig("awgn", 5.0, 0),
    )
    return replace(base, **kw)


def use_case_2(**kw) -> ExperimentConfig:
    """Indoor localization: 500 epochs, batch 32, lr 5e-5, (256, 128, 64, 2)."""
    base = ExperimentConfig(
        use_case="synthetic-localization",
        layer_sizes=(256, 128, 64, 2),
        epochs=500,
        batch_size=32,
        learning_rate=0.00005,
        channel=ChannelConfig("ideal", 5.0, 0),
        n_samples=1000,
        outlier_fraction=0.0,
    )
    return replace(base, **kw)
