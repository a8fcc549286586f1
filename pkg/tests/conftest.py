import cmath

import numpy as np
import pytest

from chiral_rabi import ModelParams, Truncation


def pauli_rabi(Omega, Delta, lam, n_max):
    """Two-state Rabi Hamiltonian from Pauli matrices, spin index outer."""
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    n = np.arange(n_max + 1)
    a = np.diag(np.sqrt(n[1:]), 1).astype(complex)
    ad = a.conj().T
    eye2, eyef = np.eye(2), np.eye(n_max + 1)
    return (Omega * np.kron(eye2, ad @ a) + Delta * np.kron(sz, eyef)
            + lam * np.kron(sx, ad + a))


def random_params(rng, N, lam_range=(0.05, 1.0)):
    """Valid random couplings: alpha_m and alpha_{N-m} conjugate, middle one real."""
    alphas = [None] * (N - 1)
    for m in range(1, N):
        if alphas[m - 1] is not None:
            continue
        if 2 * m == N:
            alphas[m - 1] = complex(rng.uniform(-1, 1))
        else:
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            alphas[m - 1] = z
            alphas[N - m - 1] = z.conjugate()
    return ModelParams(N=N, Omega=rng.uniform(0.5, 1.5), Delta=rng.uniform(0.1, 1.0),
                       lam=rng.uniform(*lam_range), alphas=alphas)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def chiral():
    return ModelParams.chiral3(1.0, 0.5, 0.3, cmath.pi / 6)


@pytest.fixture
def trunc40():
    return Truncation(40)
