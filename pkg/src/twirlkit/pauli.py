"""Projective Pauli labels and the fixed basis conventions used everywhere else.

Conventions (fixed once, relied on by serialization and tests):

* Qubit 0 is the most significant bit of a computational-basis index, so the
  basis state |q0 q1 ... q_{N-1}> has index sum(q_i * 2**(N-1-i)).
* A Pauli label is a pair of N-bit masks (x, z).  Its dense matrix is the
  tensor product over qubits of i^(x_q z_q) X^x_q Z^z_q, i.e. the letters
  (0,0)->I, (1,0)->X, (0,1)->Z, (1,1)->Y.  Every Pauli matrix is Hermitian
  and unitary with entries in {0, +-1, +-i}.
* Pauli basis index = x * 2**N + z (lexicographic over (x, z), z fastest).
* Operators are flattened row-major: vec(M)[r * 2**N + c] = M[r, c].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class PauliOp:
    """A projective N-qubit Pauli operator, stored as (x, z) bit masks."""

    n_qubits: int
    x: int
    z: int

    def __post_init__(self):
        d = 1 << self.n_qubits
        if not (0 <= self.x < d and 0 <= self.z < d):
            raise ValueError("x/z masks out of range for qubit count")

    @property
    def index(self) -> int:
        return (self.x << self.n_qubits) | self.z

    @classmethod
    def from_index(cls, n_qubits: int, index: int) -> "PauliOp":
        d = 1 << n_qubits
        return cls(n_qubits, index >> n_qubits, index & (d - 1))

    @classmethod
    def from_label(cls, label: str) -> "PauliOp":
        x = z = 0
        for ch in label:
            x <<= 1
            z <<= 1
            if ch in "XY":
                x |= 1
            if ch in "ZY":
                z |= 1
            if ch not in "IXYZ":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(len(label), x, z)

    def label(self) -> str:
        letters = []
        for q in range(self.n_qubits):
            xb = (self.x >> (self.n_qubits - 1 - q)) & 1
            zb = (self.z >> (self.n_qubits - 1 - q)) & 1
            letters.append("IZXY"[2 * xb + zb])
        return "".join(letters)

    def commutes_with(self, other: "PauliOp") -> bool:
        return commutation_symbol(self, other) == 0

    def __str__(self):
        return self.label()


def commutation_symbol(p: PauliOp, q: PauliOp) -> int:
    """0 if p and q commute, 1 if they anticommute."""
    if p.n_qubits != q.n_qubits:
        raise ValueError("qubit counts differ")
    s = int(p.x & q.z).bit_count() + int(p.z & q.x).bit_count()
    return s & 1


def pauli_matrix(p: PauliOp) -> np.ndarray:
    """Dense, unnormalized matrix of a Pauli label (entries in {0, +-1, +-i})."""
    n = p.n_qubits
    d = 1 << n
    cols = np.arange(d)
    rows = cols ^ p.x
    phase = (1j) ** int(p.x & p.z).bit_count()
    signs = 1.0 - 2.0 * (np.bitwise_count(cols & p.z) & 1)
    mat = np.zeros((d, d), dtype=complex)
    mat[rows, cols] = phase * signs
    return mat


def all_paulis(n_qubits: int):
    """All 4**N Pauli labels in basis order."""
    return [PauliOp.from_index(n_qubits, i) for i in range(4**n_qubits)]


@lru_cache(maxsize=None)
def commutation_matrix(n_qubits: int) -> np.ndarray:
    """Matrix of commutation symbols <i,j> over the 4**N Pauli basis (0/1)."""
    d = 1 << n_qubits
    idx = np.arange(4**n_qubits)
    x = idx >> n_qubits
    z = idx & (d - 1)
    anti = np.bitwise_count(x[:, None] & z[None, :]) + np.bitwise_count(
        z[:, None] & x[None, :]
    )
    return (anti & 1).astype(np.int8)


@lru_cache(maxsize=None)
def walsh_sign_matrix(n_qubits: int) -> np.ndarray:
    """(-1)**<i,j> over the Pauli basis; symmetric, squares to 4**N * I."""
    return 1.0 - 2.0 * commutation_matrix(n_qubits).astype(float)


@lru_cache(maxsize=None)
def pauli_vec_basis(n_qubits: int) -> np.ndarray:
    """Unitary change of basis from Pauli-Liouville to flattened-matrix indices.

    Column p holds vec(sigma_p) with sigma_p = P_p / sqrt(2**N); the matrix is
    unitary because the normalized Paulis are trace-orthonormal.
    """
    n = n_qubits
    d = 1 << n
    dd = d * d
    c = np.zeros((dd, dd), dtype=complex)
    cols = np.arange(d)
    for idx in range(dd):
        x = idx >> n
        z = idx & (d - 1)
        phase = (1j) ** int(x & z).bit_count()
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
        c[(cols ^ x) * d + cols, idx] = phase * signs / np.sqrt(d)
    return c
