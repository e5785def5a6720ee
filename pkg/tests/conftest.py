import numpy as np
import pytest

import spinphoto as sp


def kron_lift(op2: np.ndarray, i: int, n: int) -> np.ndarray:
    """Independent Kronecker lift used as the oracle for operator builds."""
    return np.kron(np.kron(np.eye(2**i), op2), np.eye(2 ** (n - i - 1)))


SX2 = np.array([[0.0, 0.5], [0.5, 0.0]])
SY2 = np.array([[0.0, -0.5j], [0.5j, 0.0]])
SZ2 = np.array([[0.5, 0.0], [0.0, -0.5]])


def oracle_hamiltonian(sys: sp.SpinSystem) -> np.ndarray:
    """Secular dipolar Hamiltonian assembled purely from Kronecker products."""
    n = sys.n
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            d = sys.couplings[i, j]
            h += d * (
                2.0 * kron_lift(SZ2, i, n) @ kron_lift(SZ2, j, n)
                - kron_lift(SX2, i, n) @ kron_lift(SX2, j, n)
                - kron_lift(SY2, i, n) @ kron_lift(SY2, j, n)
            )
        h += sys.offsets[i] * kron_lift(SZ2, i, n)
    return h


@pytest.fixture(scope="session")
def sys8() -> sp.SpinSystem:
    """The 8-spin reference cluster used across engine and experiment tests."""
    return sp.SpinSystem(8, sp.random_couplings(8, 792.0, seed=1))


@pytest.fixture(scope="session")
def acq_default() -> sp.Acquisition:
    return sp.Acquisition(t_acq=0.5, dwell=1.0 / 8192, lb=12.0, zero_fill=8192)
