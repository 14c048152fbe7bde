"""Test-channel constructors (named channels, random CPTP) and the CPTP check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParamOutOfRange
from .superop import DEFAULT_TOL, DenseOperator, Superoperator, superop_of_kraus


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map given by its Kraus operators."""

    n_qubits: int
    kraus: tuple[DenseOperator, ...]

    def __post_init__(self):
        if not self.kraus:
            raise ValueError("at least one Kraus operator required")
        object.__setattr__(self, "kraus", tuple(self.kraus))

    def superop(self, tol: float = DEFAULT_TOL) -> Superoperator:
        return superop_of_kraus(self.kraus, tol=tol)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "kraus": [
                [[[float(v.real), float(v.imag)] for v in row] for row in k.mat]
                for k in self.kraus
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KrausChannel":
        n = int(obj["n_qubits"])
        kraus = [
            DenseOperator(n, np.array([[complex(re, im) for re, im in row] for row in k]))
            for k in obj["kraus"]
        ]
        return cls(n, tuple(kraus))


@dataclass(frozen=True)
class CptpReport:
    """Violation magnitudes from :func:`cptp_check` (never raises)."""

    trace_violation: float
    choi_min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.trace_violation <= self.tol and self.choi_min_eigenvalue >= -self.tol


def depolarizing(n: int, p: float) -> KrausChannel:
    """Lambda(rho) = p rho + (1-p) I / 2**n; superoperator diag(1, p, ..., p).

    Kraus set: sqrt((1 + (d^2-1)p) / d^2) I plus sqrt((1-p)/d^2) P for every
    non-identity Pauli P (the d^2-term Pauli mixture).
    """
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"depolarizing parameter {p} outside [0, 1]")
    from .pauli import all_paulis, pauli_matrix

    d = 1 << n
    ops = []
    w_id = (1.0 + (d * d - 1) * p) / (d * d)
    w_other = (1.0 - p) / (d * d)
    for pauli in all_paulis(n):
        w = w_id if pauli.index == 0 else w_other
        if w > 0:
            ops.append(DenseOperator(n, np.sqrt(w) * pauli_matrix(pauli)))
    return KrausChannel(n, tuple(ops))


def amplitude_damping(n: int, gammas: Sequence[float]) -> KrausChannel:
    """Tensor product of single-qubit amplitude-damping channels.

    Per qubit: K0 = diag(1, sqrt(1-gamma)), K1 = sqrt(gamma) |0><1|, with
    gamma the probability that |1> decays to |0>.
    """
    gammas = list(gammas)
    if len(gammas) != n:
        raise ParamOutOfRange(f"expected {n} damping strengths, got {len(gammas)}")
    if any(not 0.0 <= g <= 1.0 for g in gammas):
        raise ParamOutOfRange("damping strengths must lie in [0, 1]")
    kraus_sets = [
        [
            np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - g)]], dtype=complex),
            np.array([[0.0, np.sqrt(g)], [0.0, 0.0]], dtype=complex),
        ]
        for g in gammas
    ]
    ops = [np.eye(1, dtype=complex)]
    for ks in kraus_sets:
        ops = [np.kron(a, k) for a in ops for k in ks]
    # Drop identically-zero products (gamma = 0 factors).
    ops = [k for k in ops if np.linalg.norm(k) > 0]
    return KrausChannel(n, tuple(DenseOperator(n, k) for k in ops))


def random_cptp(
    n: int, strength: float, seed, env_dim: int = 4
) -> KrausChannel:
    """Full-rank random channel, interpolated toward the identity.

    A Stinespring isometry V: C^d -> C^d x C^env is drawn by QR-orthonormalizing
    a seeded complex Gaussian matrix; its block rows are the Kraus operators of
    a generically full-support channel.  The result mixes that channel with the
    identity: Kraus set {sqrt(1-s) I} + {sqrt(s) K_e}.
    """
    if not 0.0 <= strength <= 1.0:
        raise ParamOutOfRange(f"strength {strength} outside [0, 1]")
    rng = np.random.default_rng(seed)
    d = 1 << n
    g = rng.standard_normal((d * env_dim, d)) + 1j * rng.standard_normal((d * env_dim, d))
    v, _ = np.linalg.qr(g)
    ops = []
    if strength < 1.0:
        ops.append(np.sqrt(1.0 - strength) * np.eye(d, dtype=complex))
    if strength > 0.0:
        for e in range(env_dim):
            ops.append(np.sqrt(strength) * v[e * d : (e + 1) * d, :])
    return KrausChannel(n, tuple(DenseOperator(n, k) for k in ops))


def cptp_check(c: KrausChannel | Superoperator, tol: float = DEFAULT_TOL) -> CptpReport:
    """Report trace-preservation and Choi-positivity violations."""
    if isinstance(c, Superoperator):
        return _superop_cptp_check(c, tol)
    d = 1 << c.n_qubits
    acc = sum(k.mat.conj().T @ k.mat for k in c.kraus)
    trace_violation = float(np.linalg.norm(acc - np.eye(d)))
    # Choi matrix from the Kraus set: sum_l vec(K_l) vec(K_l)^dag is PSD by
    # construction only up to rounding, so measure its smallest eigenvalue.
    choi = np.zeros((d * d, d * d), dtype=complex)
    for k in c.kraus:
        v = k.mat.reshape(-1)
        choi += np.outer(v, v.conj())
    eigs = np.linalg.eigvalsh(choi)
    return CptpReport(trace_violation, float(eigs[0]), tol)


def choi_matrix(s: Superoperator) -> np.ndarray:
    """Unnormalized Choi matrix J = sum_ij |i><j| (x) Lambda(|i><j|)."""
    from .pauli import pauli_vec_basis

    d = 1 << s.n_qubits
    c = pauli_vec_basis(s.n_qubits)
    s_vec = c @ s.mat @ c.conj().T
    # s_vec[(r, c), (i, j)] = <r| Lambda(|i><j|) |c>; regroup to (i, r), (j, c).
    return s_vec.reshape(d, d, d, d).transpose(2, 0, 3, 1).reshape(d * d, d * d)


def _superop_cptp_check(s: Superoperator, tol: float) -> CptpReport:
    e0 = np.zeros(4**s.n_qubits)
    e0[0] = 1.0
    trace_violation = float(np.linalg.norm(s.mat[0, :] - e0))
    eigs = np.linalg.eigvalsh(choi_matrix(s))
    return CptpReport(trace_violation, float(eigs[0]), tol)
