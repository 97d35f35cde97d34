import numpy as np
import pytest

from meelab.channel import (
    ChannelConfig,
    FeatureCodec,
    build_constellation,
    noise_power_from_snr,
    sample_fading,
    sample_noise,
    transmit,
    transmit_labels,
)
from meelab.errors import ConfigError, NumericError
from tests.oracles import gray_qam256_points, mc_symbol_error_rate


class TestConstellation:
    def test_unit_energy(self):
        pts = build_constellation().points
        assert abs(np.mean(np.abs(pts) ** 2) - 1.0) < 1e-12

    def test_corner_energy(self):
        assert np.max(np.abs(build_constellation().points) ** 2) == pytest.approx(450 / 170, rel=1e-14)

    def test_bijective_roundtrip(self):
        const = build_constellation()
        labels = np.arange(256)
        np.testing.assert_array_equal(const.demodulate(const.modulate(labels)), labels)
        assert len(np.unique(const.points)) == 256

    def test_matches_enumerated_grid(self):
        np.testing.assert_allclose(build_constellation().points, gray_qam256_points(), atol=1e-15)

    def test_axis_neighbours_differ_in_one_bit(self):
        gray = build_constellation().gray
        for a, b in zip(gray, gray[1:]):
            assert bin(int(a) ^ int(b)).count("1") == 1


@pytest.mark.parametrize(
    "snr_db, power, expected",
    [(0.0, 1.0, 1.0), (5.0, 1.0, 0.31622776601683794), (10.0, 2.0, 0.2)],
)
def test_noise_power(snr_db, power, expected):
    assert noise_power_from_snr(snr_db, power) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0])
def test_noise_calibration(snr_db):
    n = sample_noise(np.random.default_rng(1), 100_000, noise_power_from_snr(snr_db))
    assert np.mean(np.abs(n) ** 2) == pytest.approx(10 ** (-snr_db / 10), rel=0.02)
    assert np.var(n.real) == pytest.approx(np.var(n.imag), rel=0.03)


def test_rayleigh_unit_power():
    h = sample_fading(np.random.default_rng(2), 100_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.02)


class TestCodec:
    def test_half_step_error(self):
        x = np.random.default_rng(3).uniform(-4, 9, size=(500, 3))
        codec = FeatureCodec.fit(x)
        err = np.abs(codec.dequantize(codec.quantize(x)) - x)
        assert np.all(err <= codec.step / 2 + 1e-12)

    def test_clips_out_of_range(self):
        codec = FeatureCodec.fit(np.array([[0.0], [1.0]]))
        assert codec.quantize(np.array([[5.0], [-5.0]])).ravel().tolist() == [255, 0]

    def test_constant_column(self):
        codec = FeatureCodec.fit(np.ones((4, 1)))
        np.testing.assert_array_equal(codec.dequantize(codec.quantize(np.ones((4, 1)))), 1.0)


class TestTransmit:
    x = np.random.default_rng(4).standard_normal((2000, 5))

    def test_ideal_is_quantization_only(self):
        codec = FeatureCodec.fit(self.x)
        out = transmit(self.x, codec, ChannelConfig("ideal"))
        np.testing.assert_array_equal(out, codec.dequantize(codec.quantize(self.x)))
        assert np.all(np.abs(out - self.x) <= codec.step / 2 + 1e-12)

    def test_noise_free_awgn_is_exact(self):
        codec = FeatureCodec.fit(self.x)
        out = transmit(self.x, codec, ChannelConfig("awgn", snr_db=1e6))
        np.testing.assert_array_equal(out, codec.dequantize(codec.quantize(self.x)))

    def test_high_snr_no_symbol_errors(self):
        # awgn only: rayleigh keeps ~1e-4 deep fades even at 60 dB
        labels = np.random.default_rng(5).integers(0, 256, 10_000)
        out = transmit_labels(labels, ChannelConfig("awgn", snr_db=60.0, seed=1))
        assert np.mean(out != labels) == 0.0

    def test_ser_matches_monte_carlo(self):
        labels = np.random.default_rng(6).integers(0, 256, 100_000)
        out = transmit_labels(labels, ChannelConfig("awgn", snr_db=5.0, seed=7))
        ser = np.mean(out != labels)
        ref = mc_symbol_error_rate(5.0, 100_000, seed=8)
        assert ser > 0
        assert ser == pytest.approx(ref, rel=0.2)

    def test_rayleigh_worse_than_awgn(self):
        labels = np.random.default_rng(9).integers(0, 256, 20_000)
        awgn = np.mean(transmit_labels(labels, ChannelConfig("awgn", 20.0, 1)) != labels)
        ray = np.mean(transmit_labels(labels, ChannelConfig("rayleigh", 20.0, 1)) != labels)
        assert ray > awgn

    def test_deterministic_per_seed(self):
        codec = FeatureCodec.fit(self.x)
        cfg = ChannelConfig("rayleigh", 5.0, 3)
        np.testing.assert_array_equal(transmit(self.x, codec, cfg), transmit(self.x, codec, cfg))
        other = transmit(self.x, codec, ChannelConfig("rayleigh", 5.0, 4))
        assert np.any(other != transmit(self.x, codec, cfg))

    def test_running_stream_gives_fresh_noise(self):
        codec = FeatureCodec.fit(self.x)
        rng = np.random.default_rng(0)
        cfg = ChannelConfig("awgn", 5.0)
        assert np.any(transmit(self.x, codec, cfg, rng) != transmit(self.x, codec, cfg, rng))

    def test_nonfinite_rejected(self):
        codec = FeatureCodec.fit(self.x)
        bad = self.x.copy()
        bad[0, 0] = np.nan
        with pytest.raises(NumericError):
            transmit(bad, codec, ChannelConfig())


def test_config_validation():
    with pytest.raises(ConfigError):
        ChannelConfig("fading")
    with pytest.raises(ConfigError):
        ChannelConfig("awgn", float("inf"))
