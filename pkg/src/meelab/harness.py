"""Training loop, evaluation, timing benchmark and batch experiment runner."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import entropy
from .channel import FeatureCodec, transmit
from .config import ExperimentConfig
from .datasets import (
    PreprocessSpec,
    SplitSpec,
    load_csv,
    load_ujiindoorloc,
    preprocess_localization,
    split,
    synth_localization,
    synth_regression,
)
from .errors import ConfigError, EvaluationError, TrainingError
from .nn import AdamState, Network, adam_step, backward, forward, init_network

logger = logging.getLogger(__name__)

LOG_COLUMNS = ("epoch", "loss", "sigma", "train_mae", "test_mae", "test_med", "seconds")
SUMMARY_COLUMNS = ("run_id", "loss", "channel", "snr_db", "final_test_mae", "final_med", "total_seconds")


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    sigma: float
    train_mae: float
    test_mae: float
    test_med: float | None
    seconds: float


@dataclass
class TrainingLog:
    records: list[EpochRecord] = field(default_factory=list)
    # per optimizer step, filled only when train(record_steps=True)
    step_losses: list[float] = field(default_factory=list)
    step_sigmas: list[float] = field(default_factory=list)
    steps: int = 0

    @property
    def total_seconds(self) -> float:
        return sum(r.seconds for r in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for r in self.records:
            med = "" if r.test_med is None else repr(r.test_med)
            w.writerow([r.epoch, repr(r.loss), repr(r.sigma), repr(r.train_mae), repr(r.test_mae), med, f"{r.seconds:.6f}"])
        return buf.getvalue()


@dataclass(frozen=True)
class EvalReport:
    med: float
    mse: float
    mae: float
    n: int


@dataclass(frozen=True)
class BenchmarkReport:
    kernel_seconds: float
    matrix_seconds: float
    speedup: float
    batch_size: int
    epochs: int
    steps_per_epoch: int
    max_loss_gap: float


@dataclass
class TrainResult:
    network: Network
    log: TrainingLog
    report: EvalReport
    config: ExperimentConfig


def prepare_data(cfg: ExperimentConfig):
    """Build ``(train, test)`` for the configured use case."""
    uc = cfg.use_case
    if uc == "synthetic-regression":
        ds = synth_regression(cfg.n_samples, cfg.outlier_fraction, seed=cfg.split_seed)
    elif uc == "synthetic-localization":
        ds = synth_localization(cfg.n_samples, cfg.n_aps, seed=cfg.split_seed)
    elif uc == "regression":
        ds = load_csv(cfg.data_path, cfg.target_columns, cfg.feature_columns)
    elif uc == "localization":
        if cfg.feature_columns:
            raw = load_csv(cfg.data_path, cfg.coord_columns, cfg.feature_columns)
        else:
            raw = load_ujiindoorloc(cfg.data_path, cfg.coord_columns)
        ds = preprocess_localization(raw, PreprocessSpec(cfg.drop_threshold, cfg.missing_value))
    else:  # pragma: no cover - guarded by ExperimentConfig
        raise ConfigError(uc)
    return split(ds, SplitSpec(cfg.train_fraction, cfg.split_seed))


def evaluate_med(net: Network, test, features=None) -> EvalReport:
    """Mean Euclidean error distance plus per-component MSE and MAE.

    ``features`` replaces ``test.features`` as network input, e.g. with a
    channel-impaired copy.
    """
    y = np.asarray(test.targets, dtype=np.float64)
    if y.shape[0] == 0:
        raise EvaluationError("empty test set")
    x = test.features if features is None else features
    r = y - net.predict(x)
    return EvalReport(
        med=float(np.mean(np.sqrt(np.sum(r * r, axis=1)))),
        mse=float(np.mean(r * r)),
        mae=float(np.mean(np.abs(r))),
        n=int(y.shape[0]),
    )


def _loss_fn(cfg: ExperimentConfig, bandwidth_scale: float, kernel_in_matrix_units: bool):
    if cfg.loss == "mee-matrix":
        return lambda e, s: entropy.matrix_mee(e, s * bandwidth_scale, literal_sign=cfg.paper_literal_sign)
    if cfg.loss == "mee-kernel":
        unit = 1.0 / (2.0 * math.log(2.0)) if kernel_in_matrix_units else 1.0
        sign = -1.0 if cfg.paper_literal_sign else 1.0

        def fn(e, s):
            res = entropy.kernel_mee(e, s * bandwidth_scale)
            return entropy.LossResult(sign * unit * res.value, sign * unit * res.grad)

        return fn
    if cfg.loss == "mse":
        return lambda e, s: entropy.mse_loss(e)
    return lambda e, s: entropy.mae_loss(e)


def train(
    cfg: ExperimentConfig,
    data,
    *,
    record_steps: bool = False,
    bandwidth_scale: float = 1.0,
    kernel_in_matrix_units: bool = False,
    evaluate: bool = True,
) -> TrainResult:
    """Mini-batch training with adaptive-bandwidth entropy losses.

    Each epoch makes ``ceil(n_train / batch_size)`` Adam steps over a fresh
    shuffle. Every batch passes through the channel with new impairments.
    The loss at a step uses the bandwidth computed from the previous
    step's residuals (the first step uses its own), and the bandwidth is
    refreshed after each update. Test inputs go through the channel once,
    so every epoch and every loss is scored on the same received copy.

    ``bandwidth_scale`` multiplies the adaptive bandwidth before the loss
    sees it. ``kernel_in_matrix_units`` rescales the kernel estimator so
    that, with ``bandwidth_scale=1/sqrt(2)``, it equals the matrix estimator.
    """
    train_ds, test_ds = data
    n_train = len(train_ds)
    if cfg.batch_size > n_train:
        raise ConfigError(f"batch_size {cfg.batch_size} exceeds training size {n_train}")
    x_all = np.asarray(train_ds.features, dtype=np.float64)
    y_all = np.asarray(train_ds.targets, dtype=np.float64)
    if y_all.shape[1] != cfg.layer_sizes[-1]:
        raise ConfigError(f"output width {cfg.layer_sizes[-1]} != target width {y_all.shape[1]}")

    rng = np.random.default_rng(cfg.seed)
    chan_seed = cfg.channel.seed
    train_stream = np.random.default_rng([chan_seed, 1])
    codec = FeatureCodec.fit(x_all)
    x_test = transmit(test_ds.features, codec, cfg.channel, np.random.default_rng([chan_seed, 2]))

    net = init_network([x_all.shape[1], *cfg.layer_sizes], seed=cfg.seed)
    state = AdamState.for_network(net, cfg.learning_rate)
    loss_fn = _loss_fn(cfg, bandwidth_scale, kernel_in_matrix_units)
    steps_per_epoch = math.ceil(n_train / cfg.batch_size)
    log = TrainingLog()
    bandwidth = entropy.median_bandwidth if cfg.bandwidth_rule == "median-sq" else entropy.median_distance_bandwidth
    sigma = None
    report_med = y_all.shape[1] == 2

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        perm = rng.permutation(n_train)
        loss_sum = abs_sum = 0.0
        count = 0
        for step in range(steps_per_epoch):
            idx = perm[step * cfg.batch_size : (step + 1) * cfg.batch_size]
            if idx.size < 2:
                idx = np.concatenate([idx, perm[: 2 - idx.size]])
            x = transmit(x_all[idx], codec, cfg.channel, train_stream)
            y = y_all[idx]
            out, trace = forward(net, x)
            r = y - out
            e = np.abs(r) if cfg.abs_residual else r
            if sigma is None:
                sigma = bandwidth(e)
            res = loss_fn(e, sigma)
            if not math.isfinite(res.value) or not np.all(np.isfinite(res.grad)):
                raise TrainingError(f"non-finite loss at epoch {epoch}, step {step + 1}")
            d_out = -res.grad * np.sign(r) if cfg.abs_residual else -res.grad
            net, state = adam_step(net, backward(net, trace, d_out), state)
            sigma = bandwidth(e)
            if record_steps:
                log.step_losses.append(res.value)
                log.step_sigmas.append(sigma)
            loss_sum += res.value
            abs_sum += float(np.sum(np.abs(r)))
            count += r.size
            log.steps += 1
        if evaluate:
            rep = evaluate_med(net, test_ds, x_test)
            test_mae, test_med = rep.mae, (rep.med if report_med else None)
        else:
            test_mae, test_med = math.nan, None
        log.records.append(
            EpochRecord(
                epoch=epoch,
                loss=loss_sum / steps_per_epoch,
                sigma=float(sigma),
                train_mae=abs_sum / count,
                test_mae=test_mae,
                test_med=test_med,
                seconds=time.perf_counter() - t0,
            )
        )
        logger.debug("epoch %d loss %.6g test_mae %.6g", epoch, log.records[-1].loss, test_mae)

    if cfg.calibrate_bias and cfg.is_mee:
        x_cal = transmit(x_all, codec, cfg.channel, np.random.default_rng([chan_seed, 3]))
        net = calibrate_bias(net, x_cal, y_all)
    report = evaluate_med(net, test_ds, x_test)
    return TrainResult(net, log, report, cfg)


def calibrate_bias(net: Network, features, targets) -> Network:
    """Shift the output bias so the mean residual on ``features`` is zero."""
    shift = np.mean(np.asarray(targets) - net.predict(features), axis=0)
    net = net.copy()
    net.layers[-1].biases = net.layers[-1].biases + shift
    return net


def benchmark_complexity(cfg: ExperimentConfig, data, epochs: int = 10) -> BenchmarkReport:
    """Time identical training runs under the kernel and matrix estimators.

    Both runs share seeds and batches. The kernel run uses a bandwidth
    narrower by ``sqrt(2)`` and is rescaled to the matrix units, which makes
    the two losses the same function; their per-step trajectories are
    compared and the worst gap reported. A one-epoch warm-up precedes each
    timed run.
    """
    base = replace(cfg, epochs=epochs, calibrate_bias=False)
    runs = {
        "kernel": dict(bandwidth_scale=1.0 / math.sqrt(2.0), kernel_in_matrix_units=True),
        "matrix": {},
    }
    seconds, losses = {}, {}
    for name, kw in runs.items():
        run_cfg = replace(base, loss=f"mee-{name}")
        train(replace(run_cfg, epochs=1), data, evaluate=False, **kw)
        t0 = time.perf_counter()
        res = train(run_cfg, data, evaluate=False, record_steps=True, **kw)
        seconds[name] = time.perf_counter() - t0
        losses[name] = np.array(res.log.step_losses)
    gap = float(np.max(np.abs(losses["kernel"] - losses["matrix"])))
    return BenchmarkReport(
        kernel_seconds=seconds["kernel"],
        matrix_seconds=seconds["matrix"],
        speedup=seconds["kernel"] / seconds["matrix"],
        batch_size=cfg.batch_size,
        epochs=epochs,
        steps_per_epoch=math.ceil(len(data[0]) / cfg.batch_size),
        max_loss_gap=gap,
    )


def write_atomic(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def summary_row(result: TrainResult) -> dict:
    cfg = result.config
    two_d = result.network.layers[-1].out_dim == 2
    return {
        "run_id": cfg.name,
        "loss": cfg.loss,
        "channel": cfg.channel.mode,
        "snr_db": cfg.channel.snr_db,
        "final_test_mae": result.report.mae,
        "final_med": result.report.med if two_d else "",
        "total_seconds": round(result.log.total_seconds, 6),
    }


def summary_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()
