"""Random compiling: dress each target gate with sampled twirling pairs.

For targets U_1 ... U_t one draws G_i from the twirling group and inserts
G_i before and G'_i = U_i G_i^-1 U_i^-1 after each target.  Adjacent
twirling gates merge, so the implemented circuit alternates targets with the
merged gates M_i = G_{i+1} G'_i, which in general live in the twirling gate
set V = G U G U^dag.  In expectation each noisy target turns into
U_i . twirl(Lambda_i); with a (local-dihedral-containing) group the tailored
noise is a Pauli channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Sequence

import numpy as np

from .cru import (
    CnzmGate,
    CruElement,
    XWGroup,
    conjugate_by_target,
    cru_inverse,
    cru_multiply,
    promote,
    to_matrix,
)
from .errors import MixedModulus, TooLarge
from .superop import Superoperator, superop_of_unitary
from .twirl import twirl_exact, _tree_sum


@dataclass(frozen=True)
class CompiledCircuit:
    """A dressed circuit: leading twirl, then alternating targets and merged
    twirling gates, closing with the final conjugated twirl."""

    gate: CnzmGate
    n_targets: int
    leading: CruElement
    merged: tuple[CruElement, ...]  # M_i = G_{i+1} * (U G_i^-1 U^-1), M_last = G'_t
    seed: int | None

    def layers(self):
        """Time-ordered gates: ('twirl'|'target', payload)."""
        yield ("twirl", self.leading)
        for i in range(self.n_targets):
            yield ("target", self.gate)
            yield ("twirl", self.merged[i])

    def ideal_matrix(self) -> np.ndarray:
        d = 1 << self.gate.n_qubits
        acc = np.eye(d, dtype=complex)
        u = self.gate.matrix().mat
        for kind, payload in self.layers():
            mat = u if kind == "target" else to_matrix(payload).mat
            acc = mat @ acc
        return acc

    def to_json(self) -> dict:
        return {
            "gate": {"n": self.gate.n, "m": self.gate.m},
            "n_targets": self.n_targets,
            "seed": self.seed,
            "leading": self.leading.to_json(),
            "merged": [g.to_json() for g in self.merged],
        }


def compile_circuit(
    targets: Sequence[CnzmGate], grp, rng: np.random.Generator, seed: int | None = None
) -> CompiledCircuit:
    """Draw one dressing of the circuit; all targets must be the same gate
    and the twirling gates must be CRU elements."""
    if not targets:
        raise ValueError("need at least one target gate")
    gate = targets[0]
    if any(t != gate for t in targets):
        raise MixedModulus("all targets must share one (n, m) descriptor")
    draws = [grp.sample(rng) for _ in targets]
    if not all(isinstance(g, CruElement) for g in draws):
        raise TooLarge("random compiling requires CRU twirling gates")
    mod = lcm(grp.modulus, gate.m)
    lifted = [promote(g, mod) for g in draws]
    # G'_i = U G_i^-1 U^-1; conjugation already lands in the lifted modulus
    conj = [conjugate_by_target(cru_inverse(g), gate) for g in lifted]
    merged = [
        cru_multiply(lifted[i + 1], conj[i]) for i in range(len(targets) - 1)
    ]
    merged.append(conj[-1])
    return CompiledCircuit(gate, len(targets), lifted[0], tuple(merged), seed)


def twirl_gate_set(grp: XWGroup, gate: CnzmGate, cap: int = 1 << 20) -> set[CruElement]:
    """The merged-gate set V = G U G U^dag, enumerated element by element."""
    elems = list(grp.elements(cap=cap))
    mod = lcm(grp.modulus, gate.m)
    out = set()
    for a in elems:
        ca = conjugate_by_target(promote(a, mod), gate)
        for b in elems:
            out.add(cru_multiply(promote(b, mod), ca))
            if len(out) > cap:
                raise TooLarge("twirling gate set exceeded cap")
    return out


def effective_channel(
    targets: Sequence[CnzmGate],
    grp,
    noise_per_target: Sequence[Superoperator],
    mode: str = "exact",
    samples: int = 0,
    rng: np.random.Generator | None = None,
) -> Superoperator:
    """Channel of the dressed noisy circuit.

    Exact mode returns prod_i U_i twirl(Lambda_i); Monte-Carlo mode averages
    sampled compiled circuits with a deterministic tree reduction.
    """
    if len(targets) != len(noise_per_target):
        raise ValueError("need one noise channel per target")
    gate = targets[0]
    u = gate.superop().mat
    if mode == "exact":
        acc = np.eye(u.shape[0], dtype=complex)
        for lam in noise_per_target:
            acc = u @ twirl_exact(lam, grp).mat @ acc
        return Superoperator(gate.n_qubits, acc)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None or samples < 1:
        raise ValueError("Monte-Carlo mode needs samples and an rng")
    terms = []
    for _ in range(samples):
        circuit = compile_circuit(targets, grp, rng)
        acc = superop_of_unitary(to_matrix(circuit.leading)).mat
        for i, lam in enumerate(noise_per_target):
            acc = (
                superop_of_unitary(to_matrix(circuit.merged[i])).mat
                @ u
                @ lam.mat
                @ acc
            )
        terms.append(acc)
    mean = _tree_sum(terms) / samples
    return Superoperator(gate.n_qubits, mean)
