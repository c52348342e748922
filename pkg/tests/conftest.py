import numpy as np
import pytest


@pytest.fixture
def bell_state():
    """(|00> + |11>)/sqrt(2) as a density matrix."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.fixture
def classical_correlated():
    """(|00><00| + |11><11|)/2."""
    return np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)


@pytest.fixture
def product_00():
    return np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)


def werner(p: float) -> np.ndarray:
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return p * np.outer(psi, psi.conj()) + (1 - p) * np.eye(4) / 4.0


def random_density_matrix(rng, dim: int) -> np.ndarray:
    """Ginibre-induced random state."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
