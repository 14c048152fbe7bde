"""CNOT-dihedral comparison group <CX, X, Z_{2^k'}> as affine/phase elements.

An element is an affine permutation |x> -> |Ax ^ b> over GF(2) composed with
a diagonal gate whose phase exponents (mod 2^k') lie in the subgroup generated
by the parity functions chi_a(x) = a.x mod 2.  The full 2^N phase vector is
stored (canonical, w[0] = 0) because the parity functions satisfy nontrivial
relations mod 2^k'; coefficient tuples would over-count, the vector form is
collision-free.

Composition (a applied after b):

    (a * b).A = A_a A_b,   (a * b).b = A_a b_b ^ b_a,
    (a * b).w[x] = w_a[A_b x ^ b_b] + w_b[x]   (mod 2^k')
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MixedModulus, TooLarge
from .superop import DenseOperator

ENUMERATION_CAP = 1 << 20


def _apply_rows(rows: tuple[int, ...], x: int) -> int:
    """Multiply the GF(2) matrix given by row masks with the bit vector x."""
    n = len(rows)
    y = 0
    for i, row in enumerate(rows):
        y |= (int(row & x).bit_count() & 1) << (n - 1 - i)
    return y


def _invert_rows(rows: tuple[int, ...]) -> tuple[int, ...] | None:
    """Invert an N x N bit matrix by Gaussian elimination; None if singular."""
    n = len(rows)
    aug = [(rows[i] << n) | (1 << (n - 1 - i)) for i in range(n)]
    for col in range(n):
        bit = 1 << (2 * n - 1 - col)
        pivot = next((r for r in range(col, n) if aug[r] & bit), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        for r in range(n):
            if r != col and aug[r] & bit:
                aug[r] ^= aug[col]
    mask = (1 << n) - 1
    return tuple(aug[i] & mask for i in range(n))


def _parity_vector(n_qubits: int, a: int) -> np.ndarray:
    x = np.arange(1 << n_qubits)
    return (np.bitwise_count(x & a) & 1).astype(np.int64)


@dataclass(frozen=True)
class AffinePhaseElement:
    """One CNOT-dihedral group element."""

    n_qubits: int
    kprime: int
    a_rows: tuple[int, ...]
    b: int
    w: tuple[int, ...]

    def __post_init__(self):
        mod = 1 << self.kprime
        w0 = self.w[0]
        object.__setattr__(self, "w", tuple((v - w0) % mod for v in self.w))

    @property
    def modulus(self) -> int:
        return 1 << self.kprime

    @classmethod
    def identity(cls, n_qubits: int, kprime: int) -> "AffinePhaseElement":
        rows = tuple(1 << (n_qubits - 1 - i) for i in range(n_qubits))
        return cls(n_qubits, kprime, rows, 0, (0,) * (1 << n_qubits))

    def perm_table(self) -> np.ndarray:
        """The permutation x -> Ax ^ b as an index table."""
        return np.array(
            [_apply_rows(self.a_rows, x) ^ self.b for x in range(1 << self.n_qubits)],
            dtype=np.int64,
        )


def cxd_multiply(a: AffinePhaseElement, b: AffinePhaseElement) -> AffinePhaseElement:
    if (a.n_qubits, a.kprime) != (b.n_qubits, b.kprime):
        raise MixedModulus("elements live in different CXD groups")
    n = a.n_qubits
    rows = tuple(_apply_rows_transposed(a.a_rows, b.a_rows, i) for i in range(n))
    bvec = _apply_rows(a.a_rows, b.b) ^ a.b
    mod = a.modulus
    w = tuple(
        (a.w[_apply_rows(b.a_rows, x) ^ b.b] + b.w[x]) % mod
        for x in range(1 << n)
    )
    return AffinePhaseElement(n, a.kprime, rows, bvec, w)


def _apply_rows_transposed(a_rows, b_rows, i):
    """Row i of the product A B over GF(2)."""
    n = len(a_rows)
    out = 0
    for j in range(n):
        if (a_rows[i] >> (n - 1 - j)) & 1:
            out ^= b_rows[j]
    return out


def cxd_inverse(a: AffinePhaseElement) -> AffinePhaseElement:
    inv = _invert_rows(a.a_rows)
    assert inv is not None, "group elements are invertible by construction"
    n = a.n_qubits
    binv = _apply_rows(inv, a.b)
    mod = a.modulus
    w = tuple((-a.w[_apply_rows(inv, x ^ a.b)]) % mod for x in range(1 << n))
    return AffinePhaseElement(n, a.kprime, inv, binv, w)


def cxd_to_matrix(g: AffinePhaseElement) -> DenseOperator:
    d = 1 << g.n_qubits
    omega = np.exp(2j * np.pi / g.modulus)
    mat = np.zeros((d, d), dtype=complex)
    mat[g.perm_table(), np.arange(d)] = omega ** np.array(g.w)
    return DenseOperator(g.n_qubits, mat)


@dataclass(frozen=True)
class CxdGroup:
    """The projective CNOT-dihedral group <CX, X, Z_{2^k'}> on N qubits.

    k' defaults follow the comparison targets: n+1 for C^nZ and log2(2m)
    for CZ_m.
    """

    n_qubits: int
    kprime: int

    @classmethod
    def for_cnz(cls, n: int) -> "CxdGroup":
        return cls(n + 1, n + 1)

    @classmethod
    def for_czm(cls, m: int) -> "CxdGroup":
        k = int(np.log2(2 * m))
        if 1 << k != 2 * m:
            raise ValueError("CZ_m comparison group needs a power-of-two m")
        return cls(2, k)

    @property
    def modulus(self) -> int:
        return 1 << self.kprime

    def sample_batch(
        self, count: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """Uniform draws as raw arrays: (permutation tables (count, 2^N),
        canonical phase vectors (count, 2^N)).

        The linear part is drawn uniformly from the pre-enumerated GL(N, 2)
        tables, the translation and parity coefficients independently; this
        matches the element-level sampler's distribution.
        """
        n = self.n_qubits
        d = 1 << n
        gl = _gl_tables(n)
        idx = rng.integers(len(gl), size=count)
        b = rng.integers(d, size=count)
        perms = gl[idx] ^ b[:, None]
        pars = np.array([_parity_vector(n, a) for a in range(1, d)], dtype=np.int64)
        coeff = rng.integers(self.modulus, size=(count, d - 1))
        w = (coeff @ pars) % self.modulus
        w = (w - w[:, :1]) % self.modulus
        return perms, w

    def sample(self, rng: np.random.Generator) -> AffinePhaseElement:
        perms, w = self.sample_batch(1, rng)
        return element_from_table(self.kprime, perms[0], tuple(int(v) for v in w[0]))

    def diag_gens_matrix(self) -> np.ndarray:
        n = self.n_qubits
        return np.array([_parity_vector(n, a) for a in range(1, 1 << n)], dtype=np.int64)

    def perm_tables(self) -> np.ndarray:
        """Index tables of every affine permutation; feasible for N <= 3."""
        if self.n_qubits > 3:
            raise TooLarge("affine permutation enumeration limited to N <= 3")
        tables = []
        for rows, b in _affine_maps(self.n_qubits):
            tables.append([_apply_rows(rows, x) ^ b for x in range(1 << self.n_qubits)])
        return np.array(tables, dtype=np.int64)

    def diag_elements(self) -> list[tuple[int, ...]]:
        """Canonical phase vectors of the diagonal normal subgroup."""
        n = self.n_qubits
        mod = self.modulus
        gens = [tuple(_parity_vector(n, a)) for a in range(1, 1 << n)]
        seen = {(0,) * (1 << n)}
        frontier = [(0,) * (1 << n)]
        while frontier:
            nxt = []
            for w in frontier:
                for g in gens:
                    cand = tuple((wi + gi) % mod for wi, gi in zip(w, g))
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
            frontier = nxt
            if len(seen) > ENUMERATION_CAP:
                raise TooLarge("diagonal subgroup enumeration exceeded cap")
        return sorted(seen)

    @property
    def size(self) -> int:
        return len(_affine_maps(self.n_qubits)) * len(self.diag_elements())

    def elements(self, cap: int = ENUMERATION_CAP):
        diag = self.diag_elements()
        affine = _affine_maps(self.n_qubits)
        if len(diag) * len(affine) > cap:
            raise TooLarge("CXD enumeration exceeds cap")
        for rows, b in affine:
            for w in diag:
                yield AffinePhaseElement(self.n_qubits, self.kprime, rows, b, w)


@lru_cache(maxsize=None)
def _gl_rows(n_qubits: int) -> tuple:
    """Row masks of every invertible N x N bit matrix (N <= 4)."""
    if n_qubits > 4:
        raise TooLarge("GL(N, 2) enumeration limited to N <= 4")
    return tuple(
        combo
        for combo in itertools.product(range(1 << n_qubits), repeat=n_qubits)
        if _invert_rows(tuple(combo)) is not None
    )


@lru_cache(maxsize=None)
def _gl_tables(n_qubits: int) -> np.ndarray:
    """Permutation tables of GL(N, 2) acting on basis indices."""
    d = 1 << n_qubits
    return np.array(
        [[_apply_rows(rows, x) for x in range(d)] for rows in _gl_rows(n_qubits)],
        dtype=np.int64,
    )


@lru_cache(maxsize=None)
def _affine_maps(n_qubits: int) -> tuple:
    """All (rows, b) affine permutations for small N."""
    if n_qubits > 3:
        raise TooLarge("affine permutation enumeration limited to N <= 3")
    return tuple((rows, b) for rows in _gl_rows(n_qubits) for b in range(1 << n_qubits))


def element_from_table(
    kprime: int, table: np.ndarray, w: tuple[int, ...]
) -> AffinePhaseElement:
    """Rebuild the (A, b) form from a permutation table x -> Ax ^ b."""
    d = len(table)
    n = int(np.log2(d))
    b = int(table[0])
    cols = [int(table[1 << (n - 1 - j)]) ^ b for j in range(n)]
    rows = tuple(
        sum((((cols[j] >> (n - 1 - i)) & 1) << (n - 1 - j)) for j in range(n))
        for i in range(n)
    )
    return AffinePhaseElement(n, kprime, rows, b, w)
