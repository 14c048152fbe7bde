import numpy as np
import pytest

from twirlkit.pauli import all_paulis, pauli_matrix
from twirlkit.superop import Superoperator


def random_unitary(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    d = 1 << n_qubits
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def brute_force_unitary_superop(u: np.ndarray) -> Superoperator:
    """Oracle: entry (i, j) = tr(sigma_i U sigma_j U^dag), term by term."""
    n = int(round(np.log2(u.shape[0])))
    d = 1 << n
    sigmas = [pauli_matrix(p) / np.sqrt(d) for p in all_paulis(n)]
    mat = np.empty((d * d, d * d), dtype=complex)
    for j, sj in enumerate(sigmas):
        out = u @ sj @ u.conj().T
        for i, si in enumerate(sigmas):
            mat[i, j] = np.trace(si.conj().T @ out)
    return Superoperator(n, mat)


def brute_force_kraus_superop(kraus, n: int) -> Superoperator:
    d = 1 << n
    sigmas = [pauli_matrix(p) / np.sqrt(d) for p in all_paulis(n)]
    mat = np.empty((d * d, d * d), dtype=complex)
    for j, sj in enumerate(sigmas):
        out = sum(k @ sj @ k.conj().T for k in kraus)
        for i, si in enumerate(sigmas):
            mat[i, j] = np.trace(si.conj().T @ out)
    return Superoperator(n, mat)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
