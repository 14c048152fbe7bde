"""Channel twirling (exact and Monte-Carlo) and structural diagnostics.

The exact twirl over a structured group X |x W exploits the CRU form of the
twirling gates.  In the flattened |i><j| operator basis, conjugating by a
diagonal gate with phase exponents w multiplies the matrix element at
((i,j),(k,l)) by omega**(w.a) with a = (e_i - e_j) - (e_k - e_l).  Averaging
over the diagonal subgroup therefore keeps an element iff g.a = 0 (mod m) for
every diagonal generator g, and kills it otherwise.  The permutation parts
contribute an average over index relabelings.  This reduces the exact twirl
to one pass of gathers plus an entrywise mask, independent of |W|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .channels import random_cptp
from .cru import (
    ClosureGroup,
    CnzmGate,
    CruElement,
    XWGroup,
    cru_inverse,
    cru_multiply,
    promote,
    to_matrix,
)
from .cxd import CxdGroup
from .errors import TooLarge
from .pauli import PauliOp, pauli_vec_basis, walsh_sign_matrix
from .superop import Superoperator, superop_of_unitary

BLOCK_TOL = 1e-9


# ---------------------------------------------------------------------------
# basis plumbing


def _vec_of(s: Superoperator) -> np.ndarray:
    c = pauli_vec_basis(s.n_qubits)
    return c @ s.mat @ c.conj().T


def _pauli_of(mat: np.ndarray, n_qubits: int) -> Superoperator:
    c = pauli_vec_basis(n_qubits)
    return Superoperator(n_qubits, c.conj().T @ mat @ c)


def _vec_perm_index(n_qubits: int, perm: np.ndarray) -> np.ndarray:
    """Flattened-index permutation induced by a basis permutation table."""
    d = 1 << n_qubits
    v = np.arange(d * d)
    return perm[v // d] * d + perm[v % d]


_DIFF_CACHE: dict[int, np.ndarray] = {}
_MASK_CACHE: dict[tuple, np.ndarray] = {}


def _index_diff_tensor(n_qubits: int) -> np.ndarray:
    """a[(i,j),(k,l)] = (e_i - e_j) - (e_k - e_l) over basis-state slots."""
    if n_qubits not in _DIFF_CACHE:
        d = 1 << n_qubits
        dd = d * d
        v = np.arange(dd)
        diff = np.zeros((dd, d), dtype=np.int64)
        diff[v, v // d] += 1
        diff[v, v % d] -= 1
        _DIFF_CACHE[n_qubits] = diff[:, None, :] - diff[None, :, :]
    return _DIFF_CACHE[n_qubits]


def _diag_mask(n_qubits: int, diag_gens: np.ndarray, modulus: int) -> np.ndarray:
    """0/1 mask of flattened-basis matrix elements surviving the W-average."""
    dd = 4**n_qubits
    if len(diag_gens) == 0:
        return np.ones((dd, dd))
    key = (n_qubits, modulus, diag_gens.tobytes())
    if key not in _MASK_CACHE:
        a = _index_diff_tensor(n_qubits)
        dots = np.tensordot(a, diag_gens.T, axes=1) % modulus  # (dd, dd, G)
        _MASK_CACHE[key] = np.all(dots == 0, axis=-1).astype(float)
    return _MASK_CACHE[key]


def _perm_average(sv: np.ndarray, n_qubits: int, perm_tables: Iterable[np.ndarray]) -> np.ndarray:
    acc = np.zeros_like(sv)
    count = 0
    for table in perm_tables:
        idx = _vec_perm_index(n_qubits, np.asarray(table))
        acc += sv[np.ix_(idx, idx)]
        count += 1
    return acc / count


def _xor_tables(n_qubits: int, xs: Iterable[int]):
    base = np.arange(1 << n_qubits)
    for x in xs:
        yield base ^ int(x)


# ---------------------------------------------------------------------------
# exact twirl


def twirl_exact(chan: Superoperator, grp) -> Superoperator:
    """(1/|G|) sum_G  G^dag Lambda G over a structured or enumerable group."""
    if isinstance(grp, XWGroup):
        sv = _vec_of(chan)
        avg = _perm_average(sv, grp.n_qubits, _xor_tables(grp.n_qubits, grp.x_elements()))
        mask = _diag_mask(grp.n_qubits, grp.diag_gens_matrix(), grp.modulus)
        return _pauli_of(avg * mask, grp.n_qubits)
    if isinstance(grp, CxdGroup):
        sv = _vec_of(chan)
        avg = _perm_average(sv, grp.n_qubits, grp.perm_tables())
        mask = _diag_mask(grp.n_qubits, grp.diag_gens_matrix(), grp.modulus)
        return _pauli_of(avg * mask, grp.n_qubits)
    if isinstance(grp, ClosureGroup):
        return _twirl_enumerated(chan, grp)
    raise TooLarge(f"no twirl strategy for group {grp!r}")


def _twirl_enumerated(chan: Superoperator, grp: ClosureGroup) -> Superoperator:
    n = grp.n_qubits
    d = 1 << n
    sv = _vec_of(chan)
    omega = np.exp(2j * np.pi / grp.modulus)
    v = np.arange(d * d)
    rows, cols = v // d, v % d
    acc = np.zeros_like(sv)
    for i in range(grp.size):
        x = int(grp.xs[i])
        w = grp.ws[i]
        idx = (rows ^ x) * d + (cols ^ x)
        dphase = omega ** (w[rows] - w[cols])
        acc += dphase.conj()[:, None] * sv[np.ix_(idx, idx)] * dphase[None, :]
    return _pauli_of(acc / grp.size, n)


def _element_conjugation_term(sv: np.ndarray, n_qubits: int, elem) -> np.ndarray:
    """G^dag Lambda G in the flattened basis for one CRU or CXD element."""
    d = 1 << n_qubits
    v = np.arange(d * d)
    rows, cols = v // d, v % d
    if isinstance(elem, CruElement):
        table = np.arange(d) ^ elem.x
        w = np.array(elem.w)
        modulus = elem.modulus
    else:
        table = elem.perm_table()
        w = np.array(elem.w)
        modulus = elem.modulus
    omega = np.exp(2j * np.pi / modulus)
    idx = table[rows] * d + table[cols]
    dphase = omega ** (w[rows] - w[cols])
    return dphase.conj()[:, None] * sv[np.ix_(idx, idx)] * dphase[None, :]


# ---------------------------------------------------------------------------
# Monte-Carlo twirl


@dataclass(frozen=True)
class MonteCarloTwirl:
    superop: Superoperator
    std_error: float
    samples: int


def _tree_sum(arrays: list[np.ndarray]) -> np.ndarray:
    """Pairwise (tree) reduction; deterministic for a fixed list order."""
    work = list(arrays)
    while len(work) > 1:
        work = [
            work[i] + work[i + 1] if i + 1 < len(work) else work[i]
            for i in range(0, len(work), 2)
        ]
    return work[0]


def twirl_monte_carlo(
    chan: Superoperator, grp, samples: int, rng: np.random.Generator, chunk: int = 64
) -> MonteCarloTwirl:
    """Empirical mean of G^dag Lambda G over uniform draws from the group.

    Accumulation uses a fixed-chunk pairwise tree sum so the result is
    bit-stable for a given seed regardless of scheduling.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    sv = _vec_of(chan)
    n = chan.n_qubits
    sums: list[np.ndarray] = []
    sq_sums: list[np.ndarray] = []
    buf: list[np.ndarray] = []
    buf_sq: list[np.ndarray] = []
    for _ in range(samples):
        term = _element_conjugation_term(sv, n, grp.sample(rng))
        buf.append(term)
        buf_sq.append(np.abs(term) ** 2)
        if len(buf) == chunk:
            sums.append(_tree_sum(buf))
            sq_sums.append(_tree_sum(buf_sq))
            buf, buf_sq = [], []
    if buf:
        sums.append(_tree_sum(buf))
        sq_sums.append(_tree_sum(buf_sq))
    mean = _tree_sum(sums) / samples
    second = _tree_sum(sq_sums) / samples
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    std_error = float(np.sqrt(np.max(var) / samples))
    return MonteCarloTwirl(_pauli_of(mean, n), std_error, samples)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class TwirlReport:
    twirled: Superoperator
    block_partition: tuple[tuple[int, ...], ...]
    max_offblock: float
    within_block_deviation: float
    commutator_norm_with_target: float | None
    method: str
    samples: int

    def to_json(self) -> dict:
        return {
            "n_qubits": self.twirled.n_qubits,
            "block_partition": [list(b) for b in self.block_partition],
            "max_offblock": self.max_offblock,
            "within_block_deviation": self.within_block_deviation,
            "commutator_norm_with_target": self.commutator_norm_with_target,
            "method": self.method,
            "samples": self.samples,
            "pauli_fidelities": list(np.real(np.diag(self.twirled.mat))),
        }


def _connected_components(adjacency: np.ndarray) -> list[list[int]]:
    n = adjacency.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in zip(*np.nonzero(adjacency)):
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def block_partition_of(mat: np.ndarray, tol: float = BLOCK_TOL) -> tuple[tuple[int, ...], ...]:
    """Partition of basis indices into the blocks of sum_i p_i Pi_i.

    Two indices belong to one block when they are connected by an
    above-threshold off-diagonal entry or carry equal diagonal values
    (a twirl averages whole sectors to a common value, so equal diagonals
    are the signature of a shared projector).
    """
    adjacency = np.abs(mat) > tol
    diag = np.real(np.diag(mat))
    order = np.argsort(diag)
    for a, b in zip(order[:-1], order[1:]):
        if abs(diag[a] - diag[b]) <= tol:
            adjacency[a, b] = True
    return tuple(tuple(b) for b in _connected_components(adjacency))


def partition_deviation(
    s: Superoperator, partition: Sequence[Sequence[int]]
) -> tuple[float, float]:
    """(max off-block magnitude, max within-block deviation from scalar * I)
    of a channel with respect to a given block partition."""
    mat = s.mat
    block_of = {}
    for b, idxs in enumerate(partition):
        for i in idxs:
            block_of[i] = b
    off = 0.0
    for i in range(mat.shape[0]):
        for j in range(mat.shape[1]):
            if block_of[i] != block_of[j]:
                off = max(off, abs(mat[i, j]))
    within = 0.0
    for idxs in partition:
        idxs = list(idxs)
        sub = mat[np.ix_(idxs, idxs)]
        scale = np.trace(sub) / len(idxs)
        within = max(within, float(np.max(np.abs(sub - scale * np.eye(len(idxs))))))
    return off, within


def diagonality_report(
    twirled: Superoperator,
    tol: float = BLOCK_TOL,
    target_superop: Superoperator | None = None,
    method: str = "exact",
    samples: int = 0,
) -> TwirlReport:
    """Detect the block structure of a twirled channel and its quality.

    ``max_offblock`` is the largest magnitude outside the detected blocks
    (zero up to threshold by construction, reported for the record);
    ``within_block_deviation`` measures how far each diagonal block is from
    a scalar multiple of the identity, which is the operational meaning of
    "diagonal up to a channel-independent unitary".
    """
    partition = block_partition_of(twirled.mat, tol)
    off, within = partition_deviation(twirled, partition)
    comm = None
    if target_superop is not None:
        comm = commutation_with_target(twirled, target_superop)
    return TwirlReport(twirled, partition, off, within, comm, method, samples)


def commutation_with_target(twirled: Superoperator, target_superop: Superoperator) -> float:
    """Frobenius norm of U Lambda_G - Lambda_G U."""
    u, lam = target_superop.mat, twirled.mat
    return float(np.linalg.norm(u @ lam - lam @ u))


@dataclass(frozen=True)
class MultiplicityFreeReport:
    commutant_dimension: float
    max_pairwise_commutator: float
    trials: int
    exact_commutant: bool


def multiplicity_free_evidence(
    grp,
    trials: int,
    rng: np.random.Generator,
    strength: float = 0.9,
    commutant_samples: int = 4096,
) -> MultiplicityFreeReport:
    """Numerical evidence that the group's Liouville representation is
    multiplicity-free: twirls of independent random channels must commute
    pairwise, and the commutant dimension (1/|G|) sum |tr G|^2 counts the
    irrep multiplicities sum n_i^2.
    """
    n = grp.n_qubits
    twirled = []
    for _ in range(trials):
        ch = random_cptp(n, strength, seed=int(rng.integers(2**63)))
        twirled.append(twirl_exact(ch.superop(), grp).mat)
    max_comm = 0.0
    for i in range(trials):
        for j in range(i + 1, trials):
            a, b = twirled[i], twirled[j]
            max_comm = max(max_comm, float(np.linalg.norm(a @ b - b @ a)))

    def channel_trace(elem) -> float:
        if isinstance(elem, CruElement):
            u = to_matrix(elem).mat
        else:
            from .cxd import cxd_to_matrix

            u = cxd_to_matrix(elem).mat
        return float(abs(np.trace(u)) ** 2)

    exact = True
    try:
        traces = [channel_trace(g) for g in grp.elements()]
    except TooLarge:
        exact = False
        traces = [channel_trace(grp.sample(rng)) for _ in range(commutant_samples)]
    dim = float(np.mean([t**2 for t in traces]))
    return MultiplicityFreeReport(dim, max_comm, trials, exact)


# ---------------------------------------------------------------------------
# character projector, sequences, lower bound


def pauli_character_projector(sigma: PauliOp) -> Superoperator:
    """(1/4^N) sum_P chi_sigma(P) P with chi_sigma(P) = (-1)^<P, sigma>.

    Every Pauli superoperator is diagonal over the Pauli basis with entries
    (-1)^<P, j>, so the average is diagonal with entries delta_{sigma, j}:
    the rank-1 Liouville projector onto sigma.
    """
    signs = walsh_sign_matrix(sigma.n_qubits)
    diag = (signs * signs[:, sigma.index][:, None]).mean(axis=0)
    return Superoperator(sigma.n_qubits, np.diag(diag.astype(complex)))


def sequence_channel(
    chan: Superoperator,
    gate: CnzmGate,
    grp,
    depth: int,
    mode: str = "expectation",
    rng: np.random.Generator | None = None,
) -> Superoperator:
    """Superoperator of the depth-m interleaved sequence G_inv (U G_m) ... (U G_1).

    ``expectation`` returns U^{-m} (U Lambda_G)^m with the exact twirl;
    ``sampled`` realizes one random sequence with the inverse computed in
    group arithmetic (all gates are CRU, so the ideal sequence product stays
    in closed form).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    u = gate.superop().mat
    if mode == "expectation":
        lam_g = twirl_exact(chan, grp).mat
        m = np.linalg.matrix_power(u @ lam_g, depth)
        return Superoperator(chan.n_qubits, np.linalg.matrix_power(u.conj().T, depth) @ m)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    mod = lcm(grp.modulus, gate.m)
    u_elem = gate.as_element(mod)
    acc = CruElement.identity(gate.n_qubits, mod)
    s = np.eye(4**chan.n_qubits, dtype=complex)
    for _ in range(depth):
        g = grp.sample(rng)
        if not isinstance(g, CruElement):
            raise TooLarge("sampled sequences need CRU twirling gates")
        g = promote(g, mod)
        acc = cru_multiply(cru_multiply(u_elem, g), acc)
        s = u @ chan.mat @ superop_of_unitary(to_matrix(g)).mat @ s
    g_inv = cru_inverse(acc)
    return Superoperator(chan.n_qubits, superop_of_unitary(to_matrix(g_inv)).mat @ s)


def fidelity_lower_bound_check(
    chan: Superoperator, gate: CnzmGate, grp, depth: int, tol: float = 1e-9
) -> tuple[float, float]:
    """lhs = tr((U^{-m} (U Lambda_G)^m)^{1/m}) via the diagonal values,
    rhs = tr(Lambda); the twirl-group guarantee is lhs <= rhs.

    The m-th root is taken entrywise on the diagonal of the block form; a
    negative or non-real diagonal aborts (no branch-cut guessing).
    """
    u = gate.superop().mat
    lam_g = twirl_exact(chan, grp).mat
    m = np.linalg.matrix_power(u.conj().T, depth) @ np.linalg.matrix_power(u @ lam_g, depth)
    diag = np.diag(m)
    if np.max(np.abs(diag.imag)) > tol:
        raise ValueError("sequence channel has a non-real diagonal; cannot take m-th root")
    vals = diag.real
    if np.min(vals) < -tol:
        raise ValueError("sequence channel has negative diagonal entries; cannot take m-th root")
    lhs = float(np.sum(np.clip(vals, 0.0, None) ** (1.0 / depth)))
    rhs = float(np.real(np.trace(chan.mat)))
    return lhs, rhs
