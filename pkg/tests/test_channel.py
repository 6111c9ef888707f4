import json
import math

import numpy as np
import pytest

from cvqkd_recon.channel import (
    ChannelParams,
    SeededRng,
    generate_biawgn,
    generate_gaussian_pair,
    generate_raw_key,
    load_measurement,
    read_sample_file,
    write_descriptor,
    write_sample_file,
)
from cvqkd_recon.errors import ConfigError


def test_params_derive_noise_variance():
    p = ChannelParams(snr=0.25, n_samples=10)
    assert p.noise_variance == 4.0
    assert ChannelParams(snr=2.0, n_samples=1).noise_variance == 0.5


@pytest.mark.parametrize("snr", [0.0, -1.0, float("inf"), float("nan")])
def test_params_reject_bad_snr(snr):
    with pytest.raises(ConfigError):
        ChannelParams(snr=snr, n_samples=10)


def test_params_reject_bad_length():
    with pytest.raises(ConfigError):
        ChannelParams(snr=1.0, n_samples=0)


def test_gaussian_pair_moments():
    n = 200_000
    params = ChannelParams(snr=0.5, n_samples=n)
    x, y = generate_gaussian_pair(params, SeededRng(31).generator(0))
    noise = y - x
    assert np.var(x) == pytest.approx(1.0, abs=0.02)
    assert np.var(noise) == pytest.approx(params.noise_variance, abs=0.04)
    assert np.mean(x) == pytest.approx(0.0, abs=0.02)
    # additive noise is independent of the signal
    corr = np.corrcoef(x, noise)[0, 1]
    assert abs(corr) < 0.01


def test_streams_are_reproducible_and_independent():
    rng = SeededRng(5)
    a1 = rng.generator(3).standard_normal(100)
    a2 = SeededRng(5).generator(3).standard_normal(100)
    b = rng.generator(4).standard_normal(100)
    c = SeededRng(6).generator(3).standard_normal(100)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)


def test_seed_and_stream_wrap_to_64_bits():
    a = SeededRng(2**64 + 5).generator(2**64 + 7).standard_normal(8)
    b = SeededRng(5).generator(7).standard_normal(8)
    assert np.array_equal(a, b)


def test_biawgn_hard_decision_error_rate():
    # at snr = 1 the raw bit error rate is Q(1) ~ 0.1587
    n = 100_000
    params = ChannelParams(snr=1.0, n_samples=n)
    rng = SeededRng(32).generator(0)
    bits = generate_raw_key(n, rng)
    llrs = generate_biawgn(params, bits, rng)
    hard = (llrs < 0).astype(np.uint8)
    q1 = 0.5 * math.erfc(1.0 / math.sqrt(2.0))
    ber = np.mean(hard != bits)
    assert ber == pytest.approx(q1, abs=4 * math.sqrt(q1 * (1 - q1) / n))


def test_biawgn_llr_scaling():
    # llr = 2 r / sigma^2 with r = (-1)^bit + n, so conditioned on the bit the
    # llr is Gaussian with mean +-2/sigma^2 and variance 4/sigma^2
    n = 100_000
    params = ChannelParams(snr=0.5, n_samples=n)
    rng = SeededRng(33).generator(1)
    bits = generate_raw_key(n, rng)
    llrs = generate_biawgn(params, bits, rng)
    sgn = 1.0 - 2.0 * bits
    mu = 2.0 / params.noise_variance
    assert np.mean(llrs * sgn) == pytest.approx(mu, rel=0.05)
    assert np.var(llrs) == pytest.approx(4.0 / params.noise_variance + mu**2, rel=0.05)


def test_biawgn_rejects_length_mismatch():
    params = ChannelParams(snr=1.0, n_samples=8)
    with pytest.raises(ConfigError):
        generate_biawgn(params, np.zeros(7, dtype=np.uint8), SeededRng(0).generator(0))


def test_raw_key_is_binary_and_deterministic():
    bits = generate_raw_key(10_000, SeededRng(34).generator(0))
    again = generate_raw_key(10_000, SeededRng(34).generator(0))
    assert bits.dtype == np.uint8
    assert set(np.unique(bits)) == {0, 1}
    assert np.array_equal(bits, again)
    assert np.mean(bits) == pytest.approx(0.5, abs=0.02)


def test_sample_file_round_trip(tmp_path):
    samples = np.random.default_rng(35).standard_normal(257)
    path = tmp_path / "x.f64"
    write_sample_file(path, samples)
    back = read_sample_file(path)
    assert np.array_equal(back, samples)
    # on-disk layout is plain little-endian float64
    assert path.stat().st_size == 257 * 8


def test_load_measurement_with_descriptor(tmp_path):
    rng = SeededRng(36).generator(0)
    params = ChannelParams(snr=2.0, n_samples=64)
    x, y = generate_gaussian_pair(params, rng)
    write_sample_file(tmp_path / "x", x)
    write_sample_file(tmp_path / "y", y)
    write_descriptor(tmp_path / "d.json", 64, params.noise_variance)
    gx, gy, nv = load_measurement(tmp_path / "x", tmp_path / "y", tmp_path / "d.json")
    assert np.array_equal(gx, x)
    assert np.array_equal(gy, y)
    assert nv == params.noise_variance
    # descriptor is optional
    _, _, nv2 = load_measurement(tmp_path / "x", tmp_path / "y")
    assert nv2 is None


def test_load_measurement_validates(tmp_path):
    write_sample_file(tmp_path / "x", np.zeros(4))
    write_sample_file(tmp_path / "y", np.zeros(5))
    with pytest.raises(ConfigError):
        load_measurement(tmp_path / "x", tmp_path / "y")
    write_sample_file(tmp_path / "y", np.zeros(4))
    write_descriptor(tmp_path / "d.json", 99, 1.0)
    with pytest.raises(ConfigError):
        load_measurement(tmp_path / "x", tmp_path / "y", tmp_path / "d.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        load_measurement(tmp_path / "x", tmp_path / "y", tmp_path / "bad.json")
    (tmp_path / "neg.json").write_text(json.dumps({"n_samples": 4, "noise_variance": -1.0}))
    with pytest.raises(ConfigError):
        load_measurement(tmp_path / "x", tmp_path / "y", tmp_path / "neg.json")
