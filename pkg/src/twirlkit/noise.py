"""Composite noise model and SPAM construction for the benchmarking runs.

The target-gate noise is depolarizing, then local amplitude damping, then a
coherent unitary made of SWAP couplings and diagonal phase couplings on
basis states of weight >= 2:

    Lambda = Lambda_u . Lambda_a . Lambda_d
    U_noise = U_ZZ U_SWAP,  U_SWAP = exp(i sum alpha_jk SWAP_jk),
    U_ZZ = exp(i sum_{|z|>=2} beta_z |z><z|)

State preparation excites each qubit |0> -> |1> with a fixed probability;
Hadamards for the X-basis setting and all measurements are noiseless.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channels import amplitude_damping, depolarizing
from .errors import ParamOutOfRange
from .superop import DenseOperator, Superoperator, process_fidelity, superop_of_unitary

GAMMA_RANGE = (0.0, 0.02)
ALPHA_RANGE = (0.0, 0.01)
BETA_RANGE = (0.0, 0.1)
DEFAULT_P_DEPOL = 0.98
DEFAULT_SPAM = 0.02


@dataclass(frozen=True)
class NoiseModel:
    n_qubits: int
    p_depol: float
    gammas: tuple[float, ...]
    alphas: tuple[float, ...]  # one per pair (j, k), j < k, in combinations order
    betas: tuple[float, ...]  # one per basis state of weight >= 2, ascending
    spam_excitation: float
    seed: int | None = None

    def __post_init__(self):
        n = self.n_qubits
        if not 0.0 <= self.p_depol <= 1.0:
            raise ParamOutOfRange("depolarizing parameter outside [0, 1]")
        if len(self.gammas) != n:
            raise ParamOutOfRange(f"expected {n} damping strengths")
        if len(self.alphas) != n * (n - 1) // 2:
            raise ParamOutOfRange("wrong number of SWAP couplings")
        if len(self.betas) != (1 << n) - n - 1:
            raise ParamOutOfRange("wrong number of phase couplings")
        if any(not 0.0 <= g <= 1.0 for g in self.gammas):
            raise ParamOutOfRange("damping strengths outside [0, 1]")
        if not 0.0 <= self.spam_excitation <= 1.0:
            raise ParamOutOfRange("SPAM excitation outside [0, 1]")

    @classmethod
    def sample(
        cls,
        n_qubits: int,
        seed: int,
        p_depol: float = DEFAULT_P_DEPOL,
        spam_excitation: float = DEFAULT_SPAM,
    ) -> "NoiseModel":
        """Draw the coupling strengths of one noise instance from their ranges."""
        rng = np.random.default_rng(seed)
        n = n_qubits
        gammas = tuple(rng.uniform(*GAMMA_RANGE, size=n))
        alphas = tuple(rng.uniform(*ALPHA_RANGE, size=n * (n - 1) // 2))
        betas = tuple(rng.uniform(*BETA_RANGE, size=(1 << n) - n - 1))
        return cls(n, p_depol, gammas, alphas, betas, spam_excitation, seed)

    @classmethod
    def noiseless(cls, n_qubits: int) -> "NoiseModel":
        n = n_qubits
        return cls(
            n, 1.0, (0.0,) * n, (0.0,) * (n * (n - 1) // 2),
            (0.0,) * ((1 << n) - n - 1), 0.0,
        )

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "p_depol": self.p_depol,
            "gammas": list(self.gammas),
            "alphas": list(self.alphas),
            "betas": list(self.betas),
            "spam_excitation": self.spam_excitation,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NoiseModel":
        return cls(
            int(obj["n_qubits"]),
            float(obj["p_depol"]),
            tuple(obj["gammas"]),
            tuple(obj["alphas"]),
            tuple(obj["betas"]),
            float(obj["spam_excitation"]),
            obj.get("seed"),
        )


def _swap_matrix(n_qubits: int, j: int, k: int) -> np.ndarray:
    d = 1 << n_qubits
    idx = np.arange(d)
    bj = (idx >> (n_qubits - 1 - j)) & 1
    bk = (idx >> (n_qubits - 1 - k)) & 1
    swapped = idx ^ ((bj ^ bk) << (n_qubits - 1 - j)) ^ ((bj ^ bk) << (n_qubits - 1 - k))
    mat = np.zeros((d, d))
    mat[swapped, idx] = 1.0
    return mat


def coherent_unitary(model: NoiseModel) -> DenseOperator:
    """U_ZZ U_SWAP from the coupling strengths."""
    n = model.n_qubits
    d = 1 << n
    h = np.zeros((d, d))
    for a, (j, k) in zip(model.alphas, combinations(range(n), 2)):
        h += a * _swap_matrix(n, j, k)
    # exp(i H) for Hermitian H via eigendecomposition
    vals, vecs = np.linalg.eigh(h)
    u_swap = (vecs * np.exp(1j * vals)) @ vecs.conj().T
    weights = np.bitwise_count(np.arange(d))
    phases = np.ones(d, dtype=complex)
    phases[weights >= 2] = np.exp(1j * np.array(model.betas))
    return DenseOperator(n, phases[:, None] * u_swap)


def build_noise(model: NoiseModel) -> Superoperator:
    """Pauli-Liouville matrix of the composite target-gate noise."""
    s_d = depolarizing(model.n_qubits, model.p_depol).superop()
    s_a = amplitude_damping(model.n_qubits, model.gammas).superop()
    s_u = superop_of_unitary(coherent_unitary(model))
    return Superoperator(model.n_qubits, s_u.mat @ s_a.mat @ s_d.mat)


def noisy_initial_state(n_qubits: int, basis: str, spam: float) -> DenseOperator:
    """Thermal-excitation-corrupted |0...0> (Z) or |+...+> (X, noiseless H)."""
    if not 0.0 <= spam <= 1.0:
        raise ParamOutOfRange("SPAM excitation outside [0, 1]")
    single = np.diag([1.0 - spam, spam]).astype(complex)
    rho = np.eye(1, dtype=complex)
    for _ in range(n_qubits):
        rho = np.kron(rho, single)
    if basis == "Z":
        return DenseOperator(n_qubits, rho)
    if basis == "X":
        h1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        h = np.eye(1, dtype=complex)
        for _ in range(n_qubits):
            h = np.kron(h, h1)
        return DenseOperator(n_qubits, h @ rho @ h)
    raise ValueError(f"unknown basis {basis!r}")


def true_fidelity(model: NoiseModel) -> float:
    """Process fidelity of the composite noise channel (the dashed reference
    value the estimators are compared against)."""
    return process_fidelity(build_noise(model))
