import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def entropy_by_bruteforce(rho):
    """-sum lambda ln lambda from numpy's general eigensolver, independent of eigvalsh paths."""
    w = np.linalg.eigvals(rho).real
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
