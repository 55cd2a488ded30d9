import numpy as np
import pytest


def roots_of_unity(m, phase=0.0):
    return np.exp(1j * (phase + 2 * np.pi * np.arange(m)) / m)


def multiset_error(a, b):
    from popuc.matching import match_points

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    perm = match_points(a, b)
    return float(np.max(np.abs(a - b[perm])))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (X + X.conj().T) / 2


def random_pd(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return X @ X.conj().T + 0.1 * np.eye(n)
