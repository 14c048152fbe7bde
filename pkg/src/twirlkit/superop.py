"""Pauli-Liouville superoperators, fidelities and the lambda/chi transforms.

A channel Lambda is stored as the 4**N x 4**N matrix with entries
Lambda_ij = tr(sigma_i Lambda(sigma_j)) over the normalized Pauli basis in the
index order fixed by :mod:`twirlkit.pauli`.  Composition of channels is matrix
multiplication with the later channel on the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotTracePreserving, NotUnitary
from .pauli import pauli_vec_basis, walsh_sign_matrix

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class DenseOperator:
    """A dense 2**N x 2**N matrix (state, observable, Kraus or gate)."""

    n_qubits: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        d = 1 << self.n_qubits
        if mat.shape != (d, d):
            raise DimensionMismatch(f"expected {(d, d)}, got {mat.shape}")

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> "DenseOperator":
        mat = np.asarray(mat, dtype=complex)
        n = int(round(np.log2(mat.shape[0])))
        return cls(n, mat)


@dataclass(frozen=True)
class Superoperator:
    """A channel in the Pauli-Liouville representation."""

    n_qubits: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        dd = 4**self.n_qubits
        if mat.shape != (dd, dd):
            raise DimensionMismatch(f"expected {(dd, dd)}, got {mat.shape}")

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        if self.n_qubits != other.n_qubits:
            raise DimensionMismatch("qubit counts differ")
        return Superoperator(self.n_qubits, self.mat @ other.mat)

    def to_json(self) -> dict:
        rows = [
            [[float(v.real), float(v.imag)] for v in row] for row in self.mat
        ]
        return {"n_qubits": self.n_qubits, "rows": rows}

    @classmethod
    def from_json(cls, obj: dict) -> "Superoperator":
        rows = np.array(
            [[complex(re, im) for re, im in row] for row in obj["rows"]]
        )
        return cls(int(obj["n_qubits"]), rows)


@dataclass(frozen=True)
class ChiDiagonal:
    """Diagonal of the chi (process-matrix) representation."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def identity_superop(n_qubits: int) -> Superoperator:
    return Superoperator(n_qubits, np.eye(4**n_qubits, dtype=complex))


def superop_of_kraus(
    kraus: Sequence[DenseOperator | np.ndarray], tol: float = DEFAULT_TOL
) -> Superoperator:
    """Pauli-Liouville matrix of the channel rho -> sum_l K_l rho K_l^dag."""
    mats = [k.mat if isinstance(k, DenseOperator) else np.asarray(k, complex) for k in kraus]
    if not mats:
        raise NotTracePreserving("empty Kraus set")
    d = mats[0].shape[0]
    n = int(round(np.log2(d)))
    acc = sum(k.conj().T @ k for k in mats)
    if np.linalg.norm(acc - np.eye(d)) > tol * d:
        raise NotTracePreserving(
            f"sum K^dag K deviates from identity by {np.linalg.norm(acc - np.eye(d)):.3e}"
        )
    s_vec = sum(np.kron(k, k.conj()) for k in mats)
    c = pauli_vec_basis(n)
    return Superoperator(n, c.conj().T @ s_vec @ c)


def superop_of_unitary(
    u: DenseOperator | np.ndarray, tol: float = DEFAULT_TOL
) -> Superoperator:
    """Pauli-Liouville matrix of a unitary channel rho -> U rho U^dag."""
    mat = u.mat if isinstance(u, DenseOperator) else np.asarray(u, complex)
    d = mat.shape[0]
    if np.linalg.norm(mat.conj().T @ mat - np.eye(d)) > tol * d:
        raise NotUnitary("matrix is not unitary within tolerance")
    n = int(round(np.log2(d)))
    s_vec = np.kron(mat, mat.conj())
    c = pauli_vec_basis(n)
    return Superoperator(n, c.conj().T @ s_vec @ c)


def pauli_fidelities(s: Superoperator) -> np.ndarray:
    """Diagonal entries lambda_i = tr(P_i Lambda(P_i)) / d."""
    return np.real(np.diag(s.mat))


def lambda_to_chi(lam: np.ndarray | Iterable[float]) -> ChiDiagonal:
    """chi_jj = (1/d^2) sum_i (-1)^<i,j> lambda_i."""
    lam = np.asarray(lam, dtype=float)
    n = _n_from_len(lam.shape[0])
    w = walsh_sign_matrix(n)
    return ChiDiagonal(w @ lam / 4**n)


def chi_to_lambda(chi: ChiDiagonal | np.ndarray) -> np.ndarray:
    """lambda_j = sum_i (-1)^<i,j> chi_ii (inverse Walsh-Hadamard transform)."""
    values = chi.values if isinstance(chi, ChiDiagonal) else np.asarray(chi, float)
    n = _n_from_len(values.shape[0])
    return walsh_sign_matrix(n) @ values


def process_fidelity(s: Superoperator) -> float:
    """chi_00 = tr(Lambda) / d^2."""
    return float(np.real(np.trace(s.mat))) / 4**s.n_qubits


def chi_matrix(s: Superoperator) -> np.ndarray:
    """Full process matrix chi with Lambda(rho) = d sum_ij chi_ij s_i rho s_j.

    A channel is a Pauli channel exactly when this matrix is diagonal.
    """
    from .pauli import all_paulis, pauli_matrix, pauli_vec_basis

    n = s.n_qubits
    d = 1 << n
    c = pauli_vec_basis(n)
    s_vec = (c @ s.mat @ c.conj().T).reshape(d, d, d, d)
    sig = np.stack([pauli_matrix(p) / np.sqrt(d) for p in all_paulis(n)])
    return np.einsum("iab,jcd,abcd->ij", sig.conj(), sig, s_vec.transpose(0, 2, 1, 3)) / d


def average_fidelity(f_process: float, d: int) -> float:
    """(d F + 1) / (d + 1)."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return (d * f_process + 1.0) / (d + 1.0)


def _n_from_len(length: int) -> int:
    n = int(round(np.log2(length))) // 2
    if 4**n != length:
        raise DimensionMismatch(f"length {length} is not a power of 4")
    return n
