import math
from dataclasses import replace

import numpy as np
import pytest

from meelab import entropy
from meelab.channel import ChannelConfig, FeatureCodec, transmit
from meelab.config import ExperimentConfig, use_case_1, use_case_2
from meelab.datasets import TabularDataset, split, synth_regression
from meelab.errors import ConfigError, EvaluationError, TrainingError
from meelab.harness import (
    LOG_COLUMNS,
    SUMMARY_COLUMNS,
    benchmark_complexity,
    evaluate_med,
    prepare_data,
    train,
)
from meelab.nn import DenseLayer, Network, init_network
from meelab.suite import expand, run_suite

IDEAL = ChannelConfig("ideal")


def small_cfg(**kw):
    base = dict(epochs=3, n_samples=120, layer_sizes=(8, 1), channel=IDEAL, learning_rate=0.005)
    base.update(kw)
    return use_case_1(**base)


def metric_columns(log):
    return [line.rsplit(",", 1)[0] for line in log.to_csv().splitlines()]


class TestEvaluateMed:
    def zero_net(self, d_in, d_out):
        return Network([DenseLayer(np.zeros((d_in, d_out)), np.zeros(d_out))])

    def test_perfect(self):
        test = TabularDataset(np.ones((3, 1)), np.zeros((3, 2)), ["x"], ["a", "b"])
        assert evaluate_med(self.zero_net(1, 2), test).med == 0.0

    def test_345(self):
        test = TabularDataset(np.ones((2, 1)), np.array([[0.0, 0.0], [3.0, 4.0]]), ["x"], ["a", "b"])
        assert evaluate_med(self.zero_net(1, 2), test).med == 2.5

    def test_loop_oracle(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal((100, 3)), rng.standard_normal((100, 2))
        net = init_network([3, 2], 1)
        pred = net.predict(x)
        expected = sum(math.sqrt((y[i, 0] - pred[i, 0]) ** 2 + (y[i, 1] - pred[i, 1]) ** 2) for i in range(100)) / 100
        rep = evaluate_med(net, TabularDataset(x, y, ["a", "b", "c"], ["u", "v"]))
        assert abs(rep.med - expected) < 1e-12
        assert rep.n == 100 and rep.mse >= 0 and rep.mae >= 0

    def test_empty(self):
        with pytest.raises(EvaluationError):
            evaluate_med(self.zero_net(1, 2), TabularDataset(np.zeros((0, 1)), np.zeros((0, 2)), ["x"], ["a", "b"]))


class TestTrain:
    def test_step_count_and_log_shape(self):
        cfg = small_cfg(batch_size=32)
        res = train(cfg, prepare_data(cfg))
        n_train = 96
        assert res.log.steps == cfg.epochs * math.ceil(n_train / 32)
        assert [r.epoch for r in res.log.records] == [1, 2, 3]
        assert res.log.to_csv().splitlines()[0] == ",".join(LOG_COLUMNS)

    def test_short_final_batch(self):
        cfg = small_cfg(batch_size=19, epochs=1)
        res = train(cfg, prepare_data(cfg))
        assert res.log.steps == math.ceil(96 / 19)

    def test_sigma_is_batch_median(self):
        # one full batch per epoch: the first step's residuals are computable from the init
        cfg = small_cfg(batch_size=96, epochs=1, calibrate_bias=False)
        data = prepare_data(cfg)
        res = train(cfg, data, record_steps=True)
        train_ds = data[0]
        codec = FeatureCodec.fit(train_ds.features)
        x = transmit(train_ds.features, codec, IDEAL)
        init = init_network([5, *cfg.layer_sizes], cfg.seed)
        e = train_ds.targets - init.predict(x)
        assert res.log.step_sigmas[0] == entropy.median_bandwidth(e)

    @pytest.mark.parametrize("mode", ["ideal", "awgn"])
    def test_calibration_zeroes_mean_residual(self, mode):
        cfg = small_cfg(channel=ChannelConfig(mode, 10.0, 4))
        data = prepare_data(cfg)
        res = train(cfg, data)
        train_ds = data[0]
        codec = FeatureCodec.fit(train_ds.features)
        x_cal = transmit(train_ds.features, codec, cfg.channel, np.random.default_rng([4, 3]))
        assert np.all(np.abs(np.mean(train_ds.targets - res.network.predict(x_cal), axis=0)) < 1e-8)

    def test_calibration_only_for_mee(self):
        cfg = small_cfg(loss="mse")
        data = prepare_data(cfg)
        a = train(cfg, data)
        b = train(replace(cfg, calibrate_bias=False), data)
        np.testing.assert_array_equal(a.network.layers[-1].biases, b.network.layers[-1].biases)

    def test_reproducible(self):
        cfg = small_cfg(channel=ChannelConfig("rayleigh", 5.0, 2))
        data = prepare_data(cfg)
        assert metric_columns(train(cfg, data).log) == metric_columns(train(cfg, data).log)

    @pytest.mark.parametrize("loss", ["mee-matrix", "mee-kernel", "mse", "mae"])
    def test_all_losses_run(self, loss):
        cfg = small_cfg(loss=loss, epochs=2)
        res = train(cfg, prepare_data(cfg))
        assert all(math.isfinite(r.loss) and r.sigma >= entropy.SIGMA_MIN for r in res.log.records)

    def test_mse_reaches_least_squares(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-1, 1, (80, 3))
        y = x @ np.array([[1.0], [-2.0], [0.5]]) + 0.3
        ds = TabularDataset(x, y, ["a", "b", "c"], ["y"])
        data = split(ds)
        cfg = ExperimentConfig(loss="mse", layer_sizes=(1,), epochs=200, batch_size=8, learning_rate=0.02, channel=IDEAL)
        res = train(cfg, data)
        xq = transmit(data[0].features, FeatureCodec.fit(data[0].features), IDEAL)
        design = np.column_stack([xq, np.ones(len(xq))])
        coef, *_ = np.linalg.lstsq(design, data[0].targets, rcond=None)
        ls_mse = float(np.mean((data[0].targets - design @ coef) ** 2))
        mse = float(np.mean((data[0].targets - res.network.predict(xq)) ** 2))
        var = float(np.var(data[0].targets))
        assert mse < 0.01 * var
        assert mse <= ls_mse + 0.01 * var

    def test_small_batch_rejected(self):
        with pytest.raises(ConfigError):
            small_cfg(batch_size=1)

    def test_batch_larger_than_data(self):
        cfg = small_cfg(batch_size=500)
        with pytest.raises(ConfigError):
            train(cfg, prepare_data(cfg))

    def test_nonfinite_loss_aborts(self):
        ds = TabularDataset(np.arange(20.0)[:, None], np.full((20, 1), 1e200), ["x"], ["y"])
        cfg = ExperimentConfig(loss="mse", layer_sizes=(1,), epochs=1, batch_size=4, channel=IDEAL)
        with pytest.raises(TrainingError, match="epoch 1, step 1"):
            train(cfg, split(ds))


class TestPresets:
    def test_use_case_1(self):
        cfg = use_case_1()
        assert (cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.layer_sizes) == (300, 32, 0.0005, (20, 20, 30, 1))

    def test_use_case_2(self):
        cfg = use_case_2()
        assert (cfg.epochs, cfg.batch_size, cfg.learning_rate, cfg.layer_sizes) == (500, 32, 0.00005, (256, 128, 64, 2))

    def test_config_roundtrip(self):
        cfg = use_case_2(seed=3, channel=ChannelConfig("awgn", 7.5, 1))
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"epochz": 3})


def test_benchmark_trajectories_agree():
    cfg = use_case_1(n_samples=200)
    rep = benchmark_complexity(cfg, prepare_data(cfg), epochs=2)
    assert rep.max_loss_gap < 1e-6
    assert rep.kernel_seconds > 0 and rep.matrix_seconds > 0
    assert rep.steps_per_epoch == 5


class TestSuite:
    def test_fig3_artifacts(self, tmp_path):
        configs, preset = expand({"preset": "fig3", "base": {"epochs": 2, "n_samples": 100, "layer_sizes": [4, 1]}})
        assert len(configs) == 9
        assert run_suite(configs, tmp_path, preset) == 0
        assert len([p for p in tmp_path.glob("*.csv") if p.name != "summary.csv"]) == 9
        assert sorted(p.name for p in tmp_path.glob("*.svg")) == [
            "curves_awgn.svg", "curves_ideal.svg", "curves_rayleigh.svg",
        ]
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert summary[0] == ",".join(SUMMARY_COLUMNS)
        assert len(summary) == 10

    def test_localization_med_row(self, tmp_path):
        configs, preset = expand(
            {"preset": "localization", "base": {"epochs": 2, "n_samples": 60, "layer_sizes": [8, 2]}}
        )
        assert run_suite(configs, tmp_path, preset, svg=False) == 0
        lines = (tmp_path / "med_summary.csv").read_text().splitlines()
        assert lines[0] == "med_mee-matrix,med_mse,med_mae"
        assert len(lines) == 2 and all(float(v) > 0 for v in lines[1].split(","))

    def test_bench_preset(self, tmp_path):
        configs, preset = expand({"preset": "bench", "base": {"n_samples": 200}})
        assert run_suite(configs, tmp_path, preset) == 0
        header, row = (tmp_path / "bench.csv").read_text().splitlines()
        assert header.startswith("kernel_seconds,matrix_seconds,speedup")
        assert float(row.split(",")[-1]) < 1e-6
        assert (tmp_path / "bench.svg").exists()

    def test_seeds_expand(self):
        configs, _ = expand({"preset": "localization", "seeds": [0, 1]})
        assert [c.seed for c in configs] == [0, 1] * 3

    def test_empty_set(self, tmp_path):
        out = tmp_path / "never"
        assert run_suite([], out) == 0
        assert not out.exists()

    def test_failed_run_counted(self, tmp_path):
        bad = ExperimentConfig(use_case="regression", data_path=str(tmp_path / "missing.csv"))
        good = small_cfg(epochs=1)
        assert run_suite([bad, good], tmp_path / "o", svg=False) == 1
        assert (tmp_path / "o" / f"{good.name}.csv").exists()

    def test_unwritable_directory(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError):
            run_suite([small_cfg(epochs=1)], blocker / "sub")

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            expand({"preset": "fig9"})
