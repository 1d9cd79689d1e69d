import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fftfb.errors import InvalidDimensionError, InvalidInputError
from fftfb.numerics import constellation, dft_matrix, kron, qam_demap, qam_map, unvec, vec


def test_dft_small_cases():
    assert np.allclose(dft_matrix(1), [[1]])
    assert np.allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2))


@pytest.mark.parametrize("n", [1, 2, 3, 8, 16, 33])
def test_dft_unitary(n):
    w = dft_matrix(n)
    assert np.max(np.abs(w @ w.conj().T - np.eye(n))) < 1e-12


def test_dft_matches_numpy_fft():
    x = np.random.default_rng(0).normal(size=8) + 0j
    assert np.allclose(dft_matrix(8) @ x, np.fft.fft(x, norm="ortho"))


def test_dft_rejects_zero():
    with pytest.raises(InvalidDimensionError):
        dft_matrix(0)


def test_dft_cached_read_only():
    with pytest.raises(ValueError):
        dft_matrix(4)[0, 0] = 0


@given(st.integers(1, 64), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_dft_energy_preservation(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert abs(np.linalg.norm(dft_matrix(n) @ x) - np.linalg.norm(x)) < 1e-10


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))
    b = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(kron([[2]], b), 2 * b)


def test_kron_mixed_product():
    rng = np.random.default_rng(1)
    a, b, c, d = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(4))
    assert np.allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


def test_vec_examples():
    assert np.array_equal(vec(np.array([[1, 3], [2, 4]])), [1, 2, 3, 4])
    assert np.array_equal(vec(np.eye(2)), [1, 0, 0, 1])


def test_vec_identity():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(vec(a @ b), kron(b.T, np.eye(3)) @ vec(a), atol=1e-12)


def test_vec_batch_and_unvec():
    m = np.random.default_rng(3).normal(size=(5, 4, 3))
    v = vec(m)
    assert v.shape == (5, 12)
    assert np.array_equal(v[2], vec(m[2]))
    assert np.array_equal(unvec(v, 4, 3), m)


@pytest.mark.parametrize("order", [4, 16])
def test_constellation_unit_energy_and_gray(order):
    c = constellation(order)
    assert abs(np.mean(np.abs(c.points) ** 2) - 1) < 1e-12
    step = np.min(np.abs(c.points[0] - c.points[1:]))
    # nearest neighbours (one grid step apart) differ in exactly one bit
    for i, j in itertools.combinations(range(order), 2):
        if abs(abs(c.points[i] - c.points[j]) - step) < 1e-9:
            assert np.sum(c.labels[i] != c.labels[j]) == 1


def test_qam4_gray_convention():
    c = constellation(4)
    assert np.isclose(qam_map([0, 0], c)[0], (1 + 1j) / np.sqrt(2))
    assert np.isclose(qam_map([1, 1], c)[0], (-1 - 1j) / np.sqrt(2))


@pytest.mark.parametrize("order", [4, 16])
def test_qam_round_trip_exhaustive(order):
    c = constellation(order)
    bits = c.labels.ravel()
    assert np.array_equal(qam_demap(qam_map(bits, c), c), bits)


def test_qam_map_length_error():
    with pytest.raises(InvalidInputError):
        qam_map([0, 1, 1], constellation(4))
    with pytest.raises(InvalidInputError):
        constellation(8)


def test_qam_demap_nearest_and_ties():
    c = constellation(4)
    assert np.array_equal(qam_demap([(1 + 1j) / np.sqrt(2) + 0.01], c), [0, 0])
    # the origin is equidistant from all four points: smallest label wins
    assert np.array_equal(qam_demap([0j], c), [0, 0])


@given(st.integers(0, 2**32 - 1), st.sampled_from([4, 16]))
@settings(max_examples=20, deadline=None)
def test_qam_demap_brute_force(seed, order):
    c = constellation(order)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    expect = np.concatenate([c.labels[np.argmin([abs(p - q) for q in c.points])] for p in z])
    assert np.array_equal(qam_demap(z, c), expect)
