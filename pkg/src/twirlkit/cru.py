"""Exact algebra for CRU twirling groups.

A CRU gate on N qubits factors as Pi_x * diag(omega_m ** w) where Pi_x is the
XOR permutation |j> -> |j ^ x> and w is a vector of phase exponents over the
2**N computational states.  Elements are stored projectively: w is canonical
with w[0] = 0 (vectors differing by a multiple of the all-ones vector are the
same gate up to global phase).

Group multiplication in this encoding:

    (a * b).x    = a.x ^ b.x
    (a * b).w[j] = a.w[j ^ b.x] + b.w[j]   (mod m)

which matches dense matrix multiplication up to global phase.

The optimal twirling group for the controlled-phase gate C^nZ_m is the
semidirect product of the all-X permutations with the diagonal lattice group
generated by Pi^dag U Pi U^dag.  Writing m = q * 2**k with q odd and
kappa = min(N, k), that lattice is spanned by v_i = e_i - e_{2^N-1}
(0 <= i <= 2^N-2, additive order m) and u = 2**kappa * e_{2^N-1} (additive
order m / 2**kappa), giving |W_X| = m**(2**N - 1) / 2**kappa.  Membership of a
canonical phase vector reduces to sum(w) = 0 (mod 2**kappa); this derived test
is validated against BFS closure in the test suite before anything else
relies on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceeded, MixedModulus, TooLarge
from .superop import DenseOperator

ENUMERATION_CAP = 1 << 20


@dataclass(frozen=True)
class CruElement:
    """A projective CRU group element (XOR permutation part, phase vector)."""

    n_qubits: int
    modulus: int
    x: int
    w: tuple[int, ...]

    def __post_init__(self):
        d = 1 << self.n_qubits
        if len(self.w) != d:
            raise ValueError(f"phase vector must have length {d}")
        if not 0 <= self.x < d:
            raise ValueError("permutation mask out of range")
        w0 = self.w[0]
        canon = tuple((v - w0) % self.modulus for v in self.w)
        object.__setattr__(self, "w", canon)

    @classmethod
    def identity(cls, n_qubits: int, modulus: int) -> "CruElement":
        return cls(n_qubits, modulus, 0, (0,) * (1 << n_qubits))

    @classmethod
    def from_diag_vector(cls, modulus: int, w: Sequence[int], x: int = 0) -> "CruElement":
        n = int(np.log2(len(w)))
        return cls(n, modulus, x, tuple(int(v) % modulus for v in w))

    def __str__(self):
        bits = format(self.x, f"0{self.n_qubits}b")
        return f"X[{bits}] W[{','.join(str(v) for v in self.w)}]"

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "modulus": self.modulus,
            "x": format(self.x, f"0{self.n_qubits}b"),
            "w": list(self.w),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CruElement":
        return cls(
            int(obj["n_qubits"]),
            int(obj["modulus"]),
            int(obj["x"], 2),
            tuple(int(v) for v in obj["w"]),
        )


def cru_multiply(a: CruElement, b: CruElement) -> CruElement:
    """Group product; a is applied after b."""
    if a.n_qubits != b.n_qubits or a.modulus != b.modulus:
        raise MixedModulus("elements live in different groups")
    m = a.modulus
    w = tuple((a.w[j ^ b.x] + b.w[j]) % m for j in range(len(a.w)))
    return CruElement(a.n_qubits, m, a.x ^ b.x, w)


def cru_inverse(a: CruElement) -> CruElement:
    m = a.modulus
    w = tuple((-a.w[j ^ a.x]) % m for j in range(len(a.w)))
    return CruElement(a.n_qubits, m, a.x, w)


def cru_power(a: CruElement, exponent: int) -> CruElement:
    out = CruElement.identity(a.n_qubits, a.modulus)
    g = a if exponent >= 0 else cru_inverse(a)
    for _ in range(abs(exponent)):
        out = cru_multiply(out, g)
    return out


def promote(a: CruElement, modulus: int) -> CruElement:
    """Re-express the element with a finer phase (old modulus must divide new)."""
    if modulus % a.modulus:
        raise MixedModulus(f"{a.modulus} does not divide {modulus}")
    f = modulus // a.modulus
    return CruElement(a.n_qubits, modulus, a.x, tuple(v * f for v in a.w))


def to_matrix(g: CruElement) -> DenseOperator:
    """Dense unitary Pi_x * diag(omega_m ** w)."""
    d = 1 << g.n_qubits
    omega = np.exp(2j * np.pi / g.modulus)
    mat = np.zeros((d, d), dtype=complex)
    cols = np.arange(d)
    mat[cols ^ g.x, cols] = omega ** np.array(g.w)
    return DenseOperator(g.n_qubits, mat)


@dataclass(frozen=True)
class CnzmGate:
    """The target gate C^nZ_m: phase exp(2 pi i / m) on |1...1> of n+1 qubits."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 2:
            raise ValueError("need n >= 1 control qubits and phase order m >= 2")

    @property
    def n_qubits(self) -> int:
        return self.n + 1

    @property
    def order(self) -> int:
        return self.m

    def as_element(self, modulus: int | None = None) -> CruElement:
        modulus = modulus or self.m
        if modulus % self.m:
            raise MixedModulus(f"{self.m} does not divide requested modulus {modulus}")
        d = 1 << self.n_qubits
        w = [0] * d
        w[d - 1] = modulus // self.m
        return CruElement(self.n_qubits, modulus, 0, tuple(w))

    def matrix(self) -> DenseOperator:
        return to_matrix(self.as_element())

    def superop(self):
        from .superop import superop_of_unitary

        return superop_of_unitary(self.matrix())


def conjugate_by_target(a: CruElement, gate: CnzmGate) -> CruElement:
    """U a U^dag in phase-vector arithmetic, U = C^nZ_m.

    Conjugation leaves the permutation part alone and adds the generator
    vector e_{last ^ a.x} - e_last (scaled into the working modulus).  The
    result is expressed modulo lcm(a.modulus, gate.m).
    """
    if a.n_qubits != gate.n_qubits:
        raise MixedModulus("qubit counts differ")
    mod = lcm(a.modulus, gate.m)
    lifted = promote(a, mod) if mod != a.modulus else a
    step = mod // gate.m
    d = 1 << a.n_qubits
    last = d - 1
    w = list(lifted.w)
    w[last ^ a.x] = (w[last ^ a.x] + step) % mod
    w[last] = (w[last] - step) % mod
    return CruElement(a.n_qubits, mod, a.x, tuple(w))


def _xor_basis(gens: Iterable[int]) -> tuple[int, ...]:
    """Independent GF(2) basis of a set of bit masks."""
    basis: list[int] = []
    for g in gens:
        v = g
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return tuple(basis)


def _xor_span(basis: Sequence[int]) -> np.ndarray:
    span = np.zeros(1, dtype=np.int64)
    for b in basis:
        span = np.concatenate([span, span ^ b])
    return np.sort(span)


def _and_vector(n_qubits: int, qubits: Sequence[int]) -> np.ndarray:
    """Indicator of computational states with all the given qubits set to 1."""
    d = 1 << n_qubits
    mask = 0
    for q in qubits:
        mask |= 1 << (n_qubits - 1 - q)
    j = np.arange(d)
    return ((j & mask) == mask).astype(np.int64)


@dataclass(frozen=True)
class XWGroup:
    """Semidirect product of an X-permutation subgroup with a diagonal group.

    The diagonal subgroup is presented by generator phase vectors with given
    additive orders; ``phase_quotient`` is the (constant) fiber size of the
    parameterization over the projective group, so

        size = 2**len(x_basis) * prod(orders) / phase_quotient.

    Sampling draws independent uniform exponents, which is uniform on the
    group because the parameterization is a surjective homomorphism with
    equal fibers.
    """

    name: str
    n_qubits: int
    modulus: int
    x_basis: tuple[int, ...]
    diag_gens: tuple[tuple[int, ...], ...]
    diag_orders: tuple[int, ...]
    phase_quotient: int = 1

    def __post_init__(self):
        for g, o in zip(self.diag_gens, self.diag_orders):
            if any((o * v) % self.modulus for v in g):
                raise ValueError("generator order inconsistent with modulus")

    @property
    def size(self) -> int:
        total = 1 << len(self.x_basis)
        for o in self.diag_orders:
            total *= o
        return total // self.phase_quotient

    def diag_gens_matrix(self) -> np.ndarray:
        return np.array(self.diag_gens, dtype=np.int64).reshape(
            len(self.diag_gens), 1 << self.n_qubits
        )

    def x_elements(self) -> np.ndarray:
        return _xor_span(self.x_basis)

    def sample_batch(
        self, count: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray]:
        """Uniform draws as raw arrays: (x masks (count,), canonical phase
        vectors (count, 2^N))."""
        xs = np.zeros(count, dtype=np.int64)
        for bmask in self.x_basis:
            xs ^= np.where(rng.integers(2, size=count), bmask, 0)
        w = np.zeros((count, 1 << self.n_qubits), dtype=np.int64)
        gens = self.diag_gens_matrix()
        for t, o in enumerate(self.diag_orders):
            w += rng.integers(o, size=count)[:, None] * gens[t][None, :]
        w %= self.modulus
        w = (w - w[:, :1]) % self.modulus
        return xs, w

    def sample(self, rng: np.random.Generator) -> CruElement:
        xs, w = self.sample_batch(1, rng)
        return CruElement(self.n_qubits, self.modulus, int(xs[0]), tuple(int(v) for v in w[0]))

    def elements(self, cap: int = ENUMERATION_CAP) -> Iterator[CruElement]:
        if self.size > cap:
            raise TooLarge(f"group of size {self.size} exceeds cap {cap}")
        d = 1 << self.n_qubits
        gens = [np.array(g, dtype=np.int64) for g in self.diag_gens]
        seen = set()
        for x in self.x_elements():
            for exps in itertools.product(*(range(o) for o in self.diag_orders)):
                w = np.zeros(d, dtype=np.int64)
                for e, g in zip(exps, gens):
                    w += e * g
                elem = CruElement(
                    self.n_qubits, self.modulus, int(x), tuple(int(v) % self.modulus for v in w)
                )
                if self.phase_quotient > 1:
                    key = (elem.x, elem.w)
                    if key in seen:
                        continue
                    seen.add(key)
                yield elem


@dataclass(frozen=True)
class CnzmGroup(XWGroup):
    """The optimal twirling group X |x W_X for C^nZ_m, lattice encoded."""

    gate: CnzmGate = None  # type: ignore[assignment]

    @classmethod
    def for_gate(cls, n: int, m: int) -> "CnzmGroup":
        gate = CnzmGate(n, m)
        nq = gate.n_qubits
        d = 1 << nq
        k = _two_adic_valuation(m)
        kappa = min(nq, k)
        last = np.zeros(d, dtype=np.int64)
        last[d - 1] = 1
        gens = []
        orders = []
        for i in range(d - 1):
            v = -last.copy()
            v[i] += 1
            gens.append(tuple(v % m))
            orders.append(m)
        gens.append(tuple(((1 << kappa) * last) % m))
        orders.append(m >> kappa)
        return cls(
            name=f"optimal(C^{n}Z_{m})",
            n_qubits=nq,
            modulus=m,
            x_basis=tuple(1 << q for q in range(nq)),
            diag_gens=tuple(gens),
            diag_orders=tuple(orders),
            phase_quotient=m,
            gate=gate,
        )

    @property
    def k(self) -> int:
        return _two_adic_valuation(self.modulus)

    @property
    def kappa(self) -> int:
        return min(self.n_qubits, self.k)

    def is_member(self, g: CruElement) -> bool:
        if g.n_qubits != self.n_qubits or g.modulus != self.modulus:
            raise MixedModulus("element does not match group presentation")
        return sum(g.w) % (1 << self.kappa) == 0

    def elements(self, cap: int = ENUMERATION_CAP) -> Iterator[CruElement]:
        """Duplicate-free enumeration via the canonical free coordinates.

        Canonical vectors have w[0] = 0; coordinates 1..2^N-2 are free over
        Z_m and the last coordinate ranges over the m / 2**kappa values that
        keep sum(w) = 0 (mod 2**kappa).
        """
        if self.size > cap:
            raise TooLarge(f"group of size {self.size} exceeds cap {cap}")
        m = self.modulus
        d = 1 << self.n_qubits
        step = 1 << self.kappa
        n_last = m // step
        for x in range(d):
            for mid in itertools.product(range(m), repeat=d - 2):
                base = (-sum(mid)) % step
                for t in range(n_last):
                    w = (0,) + mid + (base + t * step,)
                    yield CruElement(self.n_qubits, m, x, w)

    def theorem_generators(self) -> list[CruElement]:
        """The generator set {Pi^dag U Pi U^dag | Pi in X} of W_X."""
        d = 1 << self.n_qubits
        out = []
        for x in range(d):
            w = [0] * d
            w[(d - 1) ^ x] += 1
            w[d - 1] -= 1
            out.append(CruElement(self.n_qubits, self.modulus, 0, tuple(v % self.modulus for v in w)))
        return out

    def wx_structure(self) -> list[tuple[str, CruElement]]:
        """Named generating set of W_X per the odd / 2q / q2^k case split."""
        n, m, nq = self.gate.n, self.modulus, self.n_qubits
        k, kappa = self.k, self.kappa
        named: list[tuple[str, CruElement]] = []

        def level_gens(level: int, phase_order: int) -> list[tuple[str, CruElement]]:
            out = []
            for qubits in itertools.combinations(range(nq), level + 1):
                w = (m // phase_order) * _and_vector(nq, qubits)
                label = f"C^{level}Z_{phase_order}@{','.join(map(str, qubits))}"
                out.append((label, CruElement.from_diag_vector(m, w)))
            return out

        if k == 0:
            for level in range(n, -1, -1):
                named.extend(level_gens(level, m))
        elif k == 1:
            named.extend(level_gens(n, m // 2))
            for level in range(n - 1, -1, -1):
                named.extend(level_gens(level, m))
        else:
            for level in range(n - kappa, -1, -1):
                named.extend(level_gens(level, m))
            named.extend(self._recursion_set(kappa))
        return named

    def _recursion_set(self, depth: int) -> list[tuple[str, CruElement]]:
        n, m, nq = self.gate.n, self.modulus, self.n_qubits
        current: list[tuple[str, CruElement]] = [
            (f"C^{n}Z_{m // 2}@{','.join(map(str, range(nq)))}",
             CruElement.from_diag_vector(m, (m // (m // 2)) * _and_vector(nq, range(nq))))
        ]
        for j in range(2, depth + 1):
            level = n - j + 1
            nxt: list[tuple[str, CruElement]] = []
            for qubits in itertools.combinations(range(nq), level + 1):
                w = 2 * _and_vector(nq, qubits)
                nxt.append(
                    (f"C^{level}Z_{m // 2}@{','.join(map(str, qubits))}",
                     CruElement.from_diag_vector(m, w))
                )
            for glabel, g in current:
                for qubits in itertools.combinations(range(nq), level + 1):
                    w = _and_vector(nq, qubits)
                    e = cru_multiply(g, CruElement.from_diag_vector(m, w))
                    nxt.append((f"({glabel})*C^{level}Z_{m}@{','.join(map(str, qubits))}", e))
            current = nxt
        return current


def _two_adic_valuation(m: int) -> int:
    k = 0
    while m % 2 == 0:
        m //= 2
        k += 1
    return k


def cnzm_group(n: int, m: int) -> CnzmGroup:
    return CnzmGroup.for_gate(n, m)


def local_dihedral_group(n_qubits: int, m: int, name: str | None = None) -> XWGroup:
    """D_n^m = <X, Z_m> per qubit; Pauli group for m = 2."""
    gens = tuple(tuple(_and_vector(n_qubits, [q])) for q in range(n_qubits))
    return XWGroup(
        name=name or f"dihedral(m={m})",
        n_qubits=n_qubits,
        modulus=m,
        x_basis=tuple(1 << q for q in range(n_qubits)),
        diag_gens=gens,
        diag_orders=(m,) * n_qubits,
    )


def pauli_group(n_qubits: int) -> XWGroup:
    return local_dihedral_group(n_qubits, 2, name="pauli")


def crippled_x_group(n_qubits: int, m: int = 2) -> XWGroup:
    """Local dihedral group with the X generator on qubit 0 removed.

    Its permutation parts no longer act transitively on the basis states
    (two orbits), which breaks the diagonality guarantee; used as the
    negative control for the orbit criterion.
    """
    gens = tuple(tuple(_and_vector(n_qubits, [q])) for q in range(n_qubits))
    return XWGroup(
        name="crippled",
        n_qubits=n_qubits,
        modulus=m,
        x_basis=tuple(1 << q for q in range(n_qubits - 1)),
        diag_gens=gens,
        diag_orders=(m,) * n_qubits,
    )


def gz_group(gate: CnzmGate) -> XWGroup:
    """The S-augmented simulation group G^Z for C^nZ (and <CZ, X, S> for CS).

    Diagonal generators: S on each qubit (order 4) and C^l Z on every qubit
    subset for l = 1 .. max(n-1, 1); modulus 4.  The generators have
    independent exponent lattices (distinct AND monomials), so the product
    presentation is exact and sampling by independent exponents is uniform.
    """
    if gate.m not in (2, 4):
        raise ValueError("G^Z is defined for C^nZ and CS targets only")
    if gate.m == 4 and gate.n != 1:
        raise ValueError("phase-4 G^Z target must be the two-qubit CS gate")
    nq = gate.n_qubits
    gens: list[tuple[int, ...]] = []
    orders: list[int] = []
    labels_top = max(gate.n - 1, 1)
    for level in range(1, labels_top + 1):
        for qubits in itertools.combinations(range(nq), level + 1):
            gens.append(tuple(2 * _and_vector(nq, qubits)))
            orders.append(2)
    for q in range(nq):
        gens.append(tuple(_and_vector(nq, [q])))
        orders.append(4)
    return XWGroup(
        name=f"gz(C^{gate.n}Z_{gate.m})",
        n_qubits=nq,
        modulus=4,
        x_basis=tuple(1 << q for q in range(nq)),
        diag_gens=tuple(gens),
        diag_orders=tuple(orders),
    )


def _packable(n_qubits: int, modulus: int) -> bool:
    d = 1 << n_qubits
    return d * np.log2(modulus) + n_qubits < 62


def _pack_keys(xs: np.ndarray, ws: np.ndarray, modulus: int) -> np.ndarray:
    d = ws.shape[1]
    powers = modulus ** np.arange(d, dtype=np.int64)
    return xs.astype(np.int64) * modulus**d + ws.astype(np.int64) @ powers


@dataclass(frozen=True)
class ClosureGroup:
    """A finite CRU group materialized by BFS closure of its generators."""

    n_qubits: int
    modulus: int
    generators: tuple[CruElement, ...]
    xs: np.ndarray = field(repr=False)
    ws: np.ndarray = field(repr=False)
    key_set: frozenset = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.xs)

    def elements(self, cap: int = ENUMERATION_CAP) -> Iterator[CruElement]:
        for i in range(self.size):
            yield CruElement(
                self.n_qubits, self.modulus, int(self.xs[i]), tuple(int(v) for v in self.ws[i])
            )

    def sample(self, rng: np.random.Generator) -> CruElement:
        i = int(rng.integers(self.size))
        return CruElement(
            self.n_qubits, self.modulus, int(self.xs[i]), tuple(int(v) for v in self.ws[i])
        )

    def __contains__(self, g: CruElement) -> bool:
        if g.n_qubits != self.n_qubits or g.modulus != self.modulus:
            return False
        if _packable(self.n_qubits, self.modulus):
            key = int(
                _pack_keys(
                    np.array([g.x]), np.array([g.w], dtype=np.int64), self.modulus
                )[0]
            )
        else:
            key = (g.x, g.w)
        return key in self.key_set

    def x_elements(self) -> np.ndarray:
        return np.unique(self.xs)


def closure(
    gens: Sequence[CruElement],
    cap: int = ENUMERATION_CAP,
    target: CnzmGate | None = None,
) -> ClosureGroup:
    """BFS closure of a generator set under multiplication (and conjugation
    by the target gate when one is supplied).

    Conjugation by U is a group automorphism of finite order, so closing the
    generator set under it first and then taking the multiplicative closure
    yields the conjugation-closed group.
    """
    if not gens:
        raise ValueError("need at least one generator")
    nq = gens[0].n_qubits
    mod = lcm(*(g.modulus for g in gens))
    if target is not None:
        mod = lcm(mod, target.m)
    work = [promote(g, mod) for g in gens]
    if target is not None:
        extra = []
        for g in work:
            h = g
            for _ in range(target.m):
                h = conjugate_by_target(h, target)
                if h.modulus != mod:
                    h = promote(h, mod)
                extra.append(h)
        work.extend(extra)

    d = 1 << nq
    gen_xs = np.array([g.x for g in work], dtype=np.int64)
    gen_ws = np.array([g.w for g in work], dtype=np.int64)
    cols = np.arange(d)
    packed = _packable(nq, mod)

    seen: set = set()
    xs_acc: list[np.ndarray] = []
    ws_acc: list[np.ndarray] = []

    def push(xs: np.ndarray, ws: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if packed:
            keys = _pack_keys(xs, ws, mod).tolist()
        else:
            keys = list(zip(xs.tolist(), map(tuple, ws.tolist())))
        fresh = []
        for i, key in enumerate(keys):
            if key not in seen:
                seen.add(key)
                fresh.append(i)
        if not fresh:
            return xs[:0], ws[:0]
        xs, ws = xs[fresh], ws[fresh]
        xs_acc.append(xs)
        ws_acc.append(ws)
        return xs, ws

    ident = CruElement.identity(nq, mod)
    fx, fw = push(np.array([ident.x]), np.array([ident.w], dtype=np.int64))
    while len(fx):
        new_x = []
        new_w = []
        for gi in range(len(gen_xs)):
            gx, gw = int(gen_xs[gi]), gen_ws[gi]
            nx = fx ^ gx
            nw = (fw[:, cols ^ gx] + gw[None, :]) % mod
            nw = (nw - nw[:, :1]) % mod
            new_x.append(nx)
            new_w.append(nw)
        fx, fw = push(np.concatenate(new_x), np.concatenate(new_w, axis=0))
        if len(seen) > cap:
            raise CapExceeded(f"closure exceeded cap {cap}")

    xs = np.concatenate(xs_acc)
    ws = np.concatenate(ws_acc, axis=0)
    order = np.lexsort((*(ws[:, i] for i in range(d - 1, -1, -1)), xs))
    return ClosureGroup(nq, mod, tuple(work), xs[order], ws[order], frozenset(seen))


def quotient_orbits(grp) -> int:
    """Number of orbits of the permutation parts on {0,1}^N (Burnside)."""
    d = 1 << grp.n_qubits
    xs = np.asarray(grp.x_elements())
    # XOR permutations fix everything (x = 0) or nothing, so the average
    # fixed-point count is 2^N / |permutation subgroup|.
    fixed = np.where(xs == 0, d, 0)
    return int(round(fixed.mean()))
