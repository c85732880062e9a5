import numpy as np
import pytest

from qfit.problems import FitProblem, normalize_problem


def random_complex_matrix(rng, n, m, kappa_max=100.0):
    """Random N x M complex matrix with condition number at most kappa_max.

    Built from a random SVD with log-uniform singular values in
    [1/kappa_max, 1], so the conditioning bound holds by construction.
    """
    sigma = 10.0 ** rng.uniform(-np.log10(kappa_max), 0.0, size=m)
    sigma = np.sort(sigma)[::-1]
    u = _haar(rng, n)[:, :m]
    v = _haar(rng, m)
    return (u * sigma) @ v.conj().T


def _haar(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_complex_vector(rng, n, unit=True):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v) if unit else v


def commensurate_problem(rng, n, m, clock_size=64):
    """Random problem whose embedding spectrum sits exactly on clock bins.

    Singular values are m_i / m_max for random distinct integers m_i, so
    with t0 = 2*pi*m_max every populated eigenvalue satisfies
    E * t0 / (2*pi) integral.  Returns (problem, t0).
    """
    half = clock_size // 2
    lo = max(half // 4, 2)
    bins = np.sort(rng.choice(np.arange(lo, half), size=m, replace=False))[::-1]
    m_max = int(bins[0])
    sigma = bins / m_max
    u = _haar(rng, n)[:, :m]
    v = _haar(rng, m)
    f = (u * sigma) @ v.conj().T
    y = random_complex_vector(rng, n)
    problem = normalize_problem(f, y)
    return problem, 2.0 * np.pi * m_max


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def worked_instance() -> FitProblem:
    """F = (1,1)^T / sqrt(2), y = (0,1): lambda = 1/sqrt(2), E = 1/2."""
    f = np.array([[1.0], [1.0]]) / np.sqrt(2.0)
    return normalize_problem(f, [0.0, 1.0])
