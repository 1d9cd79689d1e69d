import numpy as np
import pytest
from scipy.special import j0

from fftfb.channel import (ChannelProfile, ChannelRealization, add_awgn, apply_channel, dense_matrix,
                           generate_channel, vehicular_a)
from fftfb.errors import InvalidConfigError, InvalidInputError

FS = 256 * 15e3


def test_doppler_arithmetic():
    p = vehicular_a(300, 2.5e9, FS)
    assert abs(p.doppler - 694.444) < 0.01


def test_profile_validation():
    with pytest.raises(InvalidConfigError):
        ChannelProfile((1e-9,), (0.0,), 0, 2.5e9, FS)
    with pytest.raises(InvalidConfigError):
        ChannelProfile((0.0, 2e-9, 1e-9), (0, 0, 0), 0, 2.5e9, FS)
    with pytest.raises(InvalidConfigError):
        ChannelProfile((0.0,), (0.0,), -1, 2.5e9, FS)


def test_vehicular_a_discretization():
    lags, power = vehicular_a(0, 2.5e9, FS).discrete_profile()
    assert list(lags) == [0, 1, 3, 4, 7, 10]
    assert abs(power.sum() - 1) < 1e-12


def test_merged_taps():
    p = ChannelProfile((0.0, 1e-9), (0.0, 0.0), 0, 2.5e9, FS)
    lags, power = p.discrete_profile()
    assert list(lags) == [0] and np.allclose(power, [1])


def test_static_channel_constant():
    ch = generate_channel(vehicular_a(0, 2.5e9, FS), 500, 3)
    assert np.all(ch.taps == ch.taps[0])


def test_doppler_limit():
    p = ChannelProfile((0.0,), (0.0,), 1000.0, 1e9, 1000.0)
    with pytest.raises(InvalidConfigError):
        generate_channel(p, 10, 0)


def test_reproducible():
    p = vehicular_a(300, 2.5e9, FS)
    a, b = generate_channel(p, 300, 42), generate_channel(p, 300, 42)
    assert np.array_equal(a.taps, b.taps)
    assert not np.array_equal(a.taps, generate_channel(p, 300, 43).taps)


def test_tap_power_and_total():
    p = vehicular_a(300, 2.5e9, FS)
    lags, power = p.discrete_profile()
    taps = np.concatenate([generate_channel(p, 100, s).taps for s in range(300)])
    measured = np.mean(np.abs(taps[:, lags]) ** 2, axis=0)
    assert abs(measured.sum() - 1) < 0.02
    assert np.allclose(measured, power, rtol=0.15)


def test_autocorrelation_matches_bessel():
    fd = 694.4
    p = ChannelProfile((0.0,), (0.0,), 300 / 3.6, 2.5e9, FS)
    max_lag = int(1e-3 * FS)
    lags = np.arange(0, max_lag + 1, 16)
    win = 65536
    acc = np.zeros(lags.size, complex)
    for s in range(100):
        h = generate_channel(p, max_lag + win, s).taps[:, 0]
        acc += np.array([np.vdot(h[:win], h[lag:lag + win]) / win for lag in lags])
    acc /= 100
    ref = j0(2 * np.pi * fd * lags / FS)
    assert np.max(np.abs(acc - ref)) < 0.05


def eye_channel(m, lag=0):
    taps = np.zeros((m, lag + 1), complex)
    taps[:, lag] = 1
    return ChannelRealization(taps)


def test_apply_identity_and_delay():
    s = np.arange(1, 9) + 0j
    assert np.array_equal(apply_channel(s, eye_channel(8)), s)
    assert np.array_equal(apply_channel(s, eye_channel(8, 2)), np.r_[0, 0, s[:-2]])
    with pytest.raises(InvalidInputError):
        apply_channel(s[:5], eye_channel(8))


def test_apply_matches_dense():
    ch = generate_channel(vehicular_a(300, 2.5e9, FS), 512, 1)
    rng = np.random.default_rng(0)
    s = rng.normal(size=512) + 1j * rng.normal(size=512)
    h = dense_matrix(ch, 512)
    assert np.max(np.abs(apply_channel(s, ch) - h @ s)) < 1e-10
    assert np.allclose(apply_channel(np.stack([s, 2 * s]), ch)[1], 2 * h @ s)


def test_dense_structure():
    assert np.array_equal(dense_matrix(eye_channel(5), 5), np.eye(5))
    h = dense_matrix(generate_channel(vehicular_a(0, 2.5e9, FS), 40, 2), 40)
    assert np.allclose(np.triu(h, 1), 0)
    for d in range(40):
        band = np.diag(h, -d)
        assert np.allclose(band, band[0])
    with pytest.raises(InvalidInputError):
        dense_matrix(eye_channel(5), 6)


def test_unit_average_gain():
    p = vehicular_a(300, 2.5e9, FS)
    rng = np.random.default_rng(4)
    ratios = []
    for s in range(1000):
        x = rng.normal(size=400) + 1j * rng.normal(size=400)
        ch = generate_channel(p, 400, s)
        ratios.append(np.sum(np.abs(apply_channel(x, ch)[10:]) ** 2) / np.sum(np.abs(x[10:]) ** 2))
    assert abs(np.mean(ratios) - 1) < 0.05


def test_awgn():
    x = np.ones(100000, complex)
    assert np.array_equal(add_awgn(x, 0.0, 1), x)
    y = add_awgn(x, 0.5, 1)
    assert abs(np.var(y - x) / 0.5 - 1) < 0.03
    n1, n2 = add_awgn(x, 1.0, 1) - x, add_awgn(x, 1.0, 2) - x
    rho = np.abs(np.vdot(n1, n2)) / (np.linalg.norm(n1) * np.linalg.norm(n2))
    assert rho < 0.02
    assert np.array_equal(add_awgn(x, 0.5, 1), y)
    with pytest.raises(InvalidConfigError):
        add_awgn(x, -1.0, 0)
