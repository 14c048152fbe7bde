"""Randomized-benchmarking engine: sequences, simulation, fitting, estimates.

Circuit structure (one sequence of depth m): the unit U^dag G_{2t} U G_{2t-1}
repeated m times, closed by the exact inverse gate computed in group
arithmetic.  A "depth" counts interleaving units; each unit applies the noisy
target twice (U and U^dag carry the same noise channel), so the fitted
per-depth decay is the square of the per-application decay and the estimator
takes a square root before combining, which realizes the fidelity of
sqrt(U^dag Lambda_G U Lambda_G).

Three processing procedures share the circuit structure:

* OURS - group G^Z (S-augmented), all 2^N observables per SPAM setting,
         single-exponential fits, combination
         F = (sum lz + 2^N (sum lx - 1)) / 4^N.
* CXDt - identical processing with CNOT-dihedral twirling gates.
* CXDn - CNOT-dihedral gates, survival-probability processing: fit
         A p^m + B to the return probability of |0..0> / |+..+> and combine
         through the block dimensions
         F = (1 + (2^N - 1) p_Z + (4^N - 2^N) p_X) / 4^N.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import lcm
from typing import Sequence

import numpy as np

from .cru import (
    CnzmGate,
    CruElement,
    cnzm_group,
    cru_inverse,
    cru_multiply,
    gz_group,
    promote,
    to_matrix,
)
from .cxd import (
    AffinePhaseElement,
    CxdGroup,
    cxd_inverse,
    cxd_multiply,
    cxd_to_matrix,
    element_from_table,
)
from .errors import DimensionMismatch, FitDiverged, ParamOutOfRange
from .noise import NoiseModel, build_noise, noisy_initial_state, true_fidelity
from .pauli import pauli_vec_basis
from .superop import Superoperator

PROCEDURES = ("OURS", "CXDn", "CXDt")
GROUPS = ("optimal", "optimal_S", "cxd")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RBConfig:
    target_n: int
    target_m: int
    procedure: str
    depths: tuple[int, ...]
    seqs_per_depth: tuple[int, ...]
    noise: NoiseModel
    seed: int
    group: str | None = None  # default chosen by procedure
    shots: int | None = None  # None = exact expectation values

    def __post_init__(self):
        if self.procedure not in PROCEDURES:
            raise ParamOutOfRange(f"unknown procedure {self.procedure!r}")
        if self.group is not None and self.group not in GROUPS:
            raise ParamOutOfRange(f"unknown group {self.group!r}")
        if len(self.depths) != len(self.seqs_per_depth):
            raise ParamOutOfRange("depths and seqs_per_depth lengths differ")
        if any(b <= a for a, b in zip(self.depths, self.depths[1:])):
            raise ParamOutOfRange("depths must be strictly increasing")
        if any(d < 1 for d in self.depths):
            raise ParamOutOfRange("depths must be positive")
        if self.noise.n_qubits != self.target_n + 1:
            raise DimensionMismatch("noise model qubit count does not match target")

    @property
    def gate(self) -> CnzmGate:
        return CnzmGate(self.target_n, self.target_m)

    @property
    def group_name(self) -> str:
        if self.group is not None:
            return self.group
        return "optimal_S" if self.procedure == "OURS" else "cxd"

    def to_json(self) -> dict:
        return {
            "target": {"n": self.target_n, "m": self.target_m},
            "procedure": self.procedure,
            "group": self.group_name,
            "depths": list(self.depths),
            "seqs_per_depth": list(self.seqs_per_depth),
            "shots": self.shots,
            "seed": self.seed,
            "noise": self.noise.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RBConfig":
        seqs = obj["seqs_per_depth"]
        if isinstance(seqs, int):
            seqs = [seqs] * len(obj["depths"])
        return cls(
            target_n=int(obj["target"]["n"]),
            target_m=int(obj["target"]["m"]),
            procedure=obj["procedure"],
            depths=tuple(int(v) for v in obj["depths"]),
            seqs_per_depth=tuple(int(v) for v in seqs),
            noise=NoiseModel.from_json(obj["noise"]),
            seed=int(obj["seed"]),
            group=obj.get("group"),
            shots=obj.get("shots"),
        )


def make_group(cfg: RBConfig):
    name = cfg.group_name
    if name == "optimal":
        return cnzm_group(cfg.target_n, cfg.target_m)
    if name == "optimal_S":
        return gz_group(cfg.gate)
    if cfg.target_m == 2:
        return CxdGroup.for_cnz(cfg.target_n)
    return CxdGroup.for_czm(cfg.target_m)


def sequence_rng(seed: int, depth: int, index: int) -> np.random.Generator:
    """The per-sequence random stream: a pure function of (seed, depth, index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, depth, index)))


# ---------------------------------------------------------------------------
# gate drawing shared by the reference path and the batched engine


def _draw_gate_arrays(grp, count: int, rng: np.random.Generator):
    """(permutation tables, native-modulus phase vectors) of uniform draws."""
    if isinstance(grp, CxdGroup):
        return grp.sample_batch(count, rng)
    xs, ws = grp.sample_batch(count, rng)
    d = 1 << grp.n_qubits
    return np.arange(d)[None, :] ^ xs[:, None], ws


@dataclass(frozen=True)
class RBSequence:
    depth: int
    gates: tuple
    inverse: object


def _target_elements(gate: CnzmGate, grp):
    """Target and inverse target in the group's element representation."""
    if isinstance(grp, CxdGroup):
        if grp.modulus % gate.m:
            raise ParamOutOfRange("CXD phase order does not accommodate the target")
        d = 1 << gate.n_qubits
        w = [0] * d
        w[d - 1] = grp.modulus // gate.m
        rows = AffinePhaseElement.identity(gate.n_qubits, grp.kprime).a_rows
        u = AffinePhaseElement(gate.n_qubits, grp.kprime, rows, 0, tuple(w))
        return u, cxd_inverse(u)
    mod = lcm(grp.modulus, gate.m)
    u = gate.as_element(mod)
    return u, cru_inverse(u)


def gen_sequence(gate: CnzmGate, grp, depth: int, rng: np.random.Generator) -> RBSequence:
    """Draw 2*depth twirling gates and compute the exact inverse gate."""
    perms, ws = _draw_gate_arrays(grp, 2 * depth, rng)
    u, udag = _target_elements(gate, grp)
    if isinstance(grp, CxdGroup):
        gates = tuple(
            element_from_table(grp.kprime, perms[i], tuple(int(v) for v in ws[i]))
            for i in range(2 * depth)
        )
        mult, inv = cxd_multiply, cxd_inverse
        lifted = gates
    else:
        gates = tuple(
            CruElement(grp.n_qubits, grp.modulus, int(perms[i][0]), tuple(int(v) for v in ws[i]))
            for i in range(2 * depth)
        )
        mult, inv = cru_multiply, cru_inverse
        lifted = tuple(
            promote(g, u.modulus) if g.modulus != u.modulus else g for g in gates
        )
    acc = None
    for t in range(depth):
        unit = mult(udag, mult(lifted[2 * t + 1], mult(u, lifted[2 * t])))
        acc = unit if acc is None else mult(unit, acc)
    return RBSequence(depth, gates, inv(acc))


def _element_dense(elem) -> np.ndarray:
    if isinstance(elem, CruElement):
        return to_matrix(elem).mat
    return cxd_to_matrix(elem).mat


def sequence_ideal_product(seq: RBSequence, gate: CnzmGate) -> np.ndarray:
    """Dense noiseless product of the full sequence (identity up to phase)."""
    u = gate.matrix().mat
    acc = np.eye(u.shape[0], dtype=complex)
    for t in range(seq.depth):
        acc = (
            u.conj().T
            @ _element_dense(seq.gates[2 * t + 1])
            @ u
            @ _element_dense(seq.gates[2 * t])
            @ acc
        )
    return _element_dense(seq.inverse) @ acc


# ---------------------------------------------------------------------------
# reference simulation (single sequence)


def _vec_superop_computational(s: Superoperator) -> np.ndarray:
    c = pauli_vec_basis(s.n_qubits)
    return c @ s.mat @ c.conj().T


def _apply_monomial(rho: np.ndarray, perm: np.ndarray, w: np.ndarray, modulus: int) -> np.ndarray:
    """V rho V^dag for the monomial gate V|j> = omega^w_j |perm_j>."""
    omega = np.exp(2j * np.pi / modulus)
    pinv = np.argsort(perm)
    phases = omega ** w[pinv]
    return (phases[:, None] * phases.conj()[None, :]) * rho[np.ix_(pinv, pinv)]


def _gate_perm_w(elem) -> tuple[np.ndarray, np.ndarray, int]:
    if isinstance(elem, CruElement):
        d = 1 << elem.n_qubits
        return np.arange(d) ^ elem.x, np.array(elem.w), elem.modulus
    return elem.perm_table(), np.array(elem.w), elem.modulus


def z_observable_signs(n_qubits: int) -> np.ndarray:
    """signs[k, z] = (-1)^{k.z}: expectations of Z-strings from populations."""
    idx = np.arange(1 << n_qubits)
    return 1.0 - 2.0 * (np.bitwise_count(idx[:, None] & idx[None, :]) & 1)


def observables_from_state(rho: np.ndarray, setting: str) -> np.ndarray:
    """Expectations of the 2^N Z-strings (Z setting) or X-strings (X)."""
    d = rho.shape[0]
    n = int(round(np.log2(d)))
    if setting == "Z":
        return z_observable_signs(n) @ np.real(np.diag(rho))
    vals = np.empty(d)
    cols = np.arange(d)
    for a in range(d):
        vals[a] = float(np.real(np.sum(rho[cols ^ a, cols])))
    return vals


def simulate_sequence(
    seq: RBSequence,
    gate: CnzmGate,
    noise_superop: Superoperator,
    setting: str,
    spam: float,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Dense density-matrix evolution of one sequence; targets carry the
    noise channel, twirling gates and the inverse are noiseless."""
    n = gate.n_qubits
    d = 1 << n
    rho = noisy_initial_state(n, setting, spam).mat
    sv = _vec_superop_computational(noise_superop)
    u_elem = gate.as_element()
    u_perm, u_w, u_mod = _gate_perm_w(u_elem)

    for t in range(seq.depth):
        rho = _apply_monomial(rho, *_gate_perm_w(seq.gates[2 * t]))
        rho = (sv @ rho.reshape(-1)).reshape(d, d)
        rho = _apply_monomial(rho, u_perm, u_w, u_mod)
        rho = _apply_monomial(rho, *_gate_perm_w(seq.gates[2 * t + 1]))
        rho = (sv @ rho.reshape(-1)).reshape(d, d)
        rho = _apply_monomial(rho, u_perm, (-u_w) % u_mod, u_mod)
    rho = _apply_monomial(rho, *_gate_perm_w(seq.inverse))
    if shots is None:
        return observables_from_state(rho, setting)
    return _shot_observables(rho, setting, shots, rng)


def _shot_observables(rho, setting, shots, rng):
    d = rho.shape[0]
    n = int(round(np.log2(d)))
    if setting == "X":
        h1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        h = h1
        for _ in range(n - 1):
            h = np.kron(h, h1)
        rho = h @ rho @ h
    probs = np.clip(np.real(np.diag(rho)), 0, None)
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    return z_observable_signs(n) @ (counts / shots)


# ---------------------------------------------------------------------------
# batched engine


class _BatchedRun:
    """Vectorized simulation of all sequences of one depth.

    States are a (K, D, D) stack of density matrices; twirling gates act by
    per-sequence index gathers, the noise channel as one BLAS multiply on the
    flattened stack.  Gate draws reuse the per-sequence streams of
    :func:`gen_sequence`, so this path is bit-identical to the reference.
    """

    def __init__(self, cfg: RBConfig, grp, noise_superop: Superoperator):
        self.cfg = cfg
        self.grp = grp
        self.gate = cfg.gate
        self.n = self.gate.n_qubits
        self.d = 1 << self.n
        self.sv = _vec_superop_computational(noise_superop)
        native = grp.modulus
        self.modulus = native if isinstance(grp, CxdGroup) else lcm(native, self.gate.m)
        self.lift = self.modulus // native
        self.omega = np.exp(2j * np.pi / self.modulus)
        w_u = np.zeros(self.d, dtype=np.int64)
        w_u[self.d - 1] = self.modulus // self.gate.m
        self.w_u = w_u
        self.u_phase = self.omega**w_u
        self.signs = z_observable_signs(self.n)

    def build_depth(self, depth: int, n_seqs: int):
        d = self.d
        perms = np.empty((n_seqs, 2 * depth, d), dtype=np.int64)
        ws = np.empty((n_seqs, 2 * depth, d), dtype=np.int64)
        shot_rngs = []
        for j in range(n_seqs):
            rng = sequence_rng(self.cfg.seed, depth, j)
            perms[j], ws[j] = _draw_gate_arrays(self.grp, 2 * depth, rng)
            shot_rngs.append(rng)
        ws *= self.lift

        # fold the ideal sequence product in monomial arithmetic
        acc_p = np.tile(np.arange(d), (n_seqs, 1))
        acc_w = np.zeros((n_seqs, d), dtype=np.int64)

        def fold(new_p, new_w):
            nonlocal acc_p, acc_w
            acc_w = (np.take_along_axis(new_w, acc_p, axis=1) + acc_w) % self.modulus
            acc_p = np.take_along_axis(new_p, acc_p, axis=1)

        ident_p = np.tile(np.arange(d), (n_seqs, 1))
        u_w_b = np.tile(self.w_u, (n_seqs, 1))
        for t in range(depth):
            fold(perms[:, 2 * t], ws[:, 2 * t])
            fold(ident_p, u_w_b)
            fold(perms[:, 2 * t + 1], ws[:, 2 * t + 1])
            fold(ident_p, (-u_w_b) % self.modulus)
        inv_p = np.argsort(acc_p, axis=1)
        inv_w = (-np.take_along_axis(acc_w, inv_p, axis=1)) % self.modulus
        return perms, ws, inv_p, inv_w, shot_rngs

    def _apply_gates(self, states, perms, ws):
        pinv = np.argsort(perms, axis=1)
        k = np.arange(states.shape[0])[:, None, None]
        gathered = states[k, pinv[:, :, None], pinv[:, None, :]]
        wp = np.take_along_axis(ws, pinv, axis=1)
        phases = self.omega**wp
        return (phases[:, :, None] * phases.conj()[:, None, :]) * gathered

    def _apply_noise(self, states):
        k, d = states.shape[0], self.d
        return (states.reshape(k, d * d) @ self.sv.T).reshape(k, d, d)

    def _apply_u(self, states, dagger: bool):
        ph = self.u_phase.conj() if dagger else self.u_phase
        return (ph[None, :, None] * ph.conj()[None, None, :]) * states

    def run_depth(self, depth: int, n_seqs: int, setting: str) -> np.ndarray:
        """Observable values, shape (2^N, n_seqs)."""
        perms, ws, inv_p, inv_w, shot_rngs = self.build_depth(depth, n_seqs)
        d = self.d
        rho0 = noisy_initial_state(self.n, setting, self.cfg.noise.spam_excitation).mat
        states = np.tile(rho0, (n_seqs, 1, 1))
        for t in range(depth):
            states = self._apply_gates(states, perms[:, 2 * t], ws[:, 2 * t])
            states = self._apply_noise(states)
            states = self._apply_u(states, dagger=False)
            states = self._apply_gates(states, perms[:, 2 * t + 1], ws[:, 2 * t + 1])
            states = self._apply_noise(states)
            states = self._apply_u(states, dagger=True)
        states = self._apply_gates(states, inv_p, inv_w)
        if self.cfg.shots is not None:
            vals = np.empty((d, n_seqs))
            for j in range(n_seqs):
                vals[:, j] = _shot_observables(
                    states[j], setting, self.cfg.shots, shot_rngs[j]
                )
            return vals
        if setting == "Z":
            diag = np.real(np.einsum("kii->ki", states))
            return self.signs @ diag.T
        cols = np.arange(d)
        vals = np.empty((d, n_seqs))
        for a in range(d):
            vals[a] = np.real(np.sum(states[:, cols ^ a, cols], axis=1))
        return vals


# ---------------------------------------------------------------------------
# fitting


@dataclass(frozen=True)
class DecayFit:
    amplitude: float
    decay: float
    offset: float
    residual: float
    label: str = ""

    def model(self, x):
        return self.amplitude * self.decay ** np.asarray(x, dtype=float) + self.offset


def fit_exponential(
    points: Sequence[tuple[float, float]],
    with_offset: bool = False,
    label: str = "",
    max_iter: int = 200,
    stall_limit: int = 50,
) -> DecayFit:
    """Fit A * lam^x (+ B) by log-linear initialization and damped
    Gauss-Newton refinement; lam is clamped to (0, 1.05].

    Raises FitDiverged when the refinement never reduces the residual over
    ``stall_limit`` consecutive iterations while the fit is still poor.
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    need = 4 if with_offset else 3
    if len(pts) < need:
        raise FitDiverged(f"need at least {need} points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])

    spread = float(np.max(y) - np.min(y))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        # constant series: no decay observed, the rate is unity by convention
        return DecayFit(float(np.mean(y)), 1.0, 0.0, float(np.std(y)), label)

    def _loglin_init(b0):
        shifted = y - b0
        pos = shifted > 1e-12
        if np.count_nonzero(pos) < 2:
            return None
        coeffs = np.polyfit(x[pos], np.log(shifted[pos]), 1)
        return float(np.exp(coeffs[1])), float(np.exp(coeffs[0])), b0

    init = None
    if with_offset:
        init = _loglin_init(y[-1])  # asymptote estimate from deepest point
    if init is None:
        init = _loglin_init(0.0)
    if init is None:
        init = (max(float(abs(y[0])), 1e-3), 0.9, 0.0)
    a0, lam0, b0 = init
    if not with_offset:
        b0 = 0.0
    theta = np.array([a0, float(np.clip(lam0, 1e-6, 1.05)), b0])

    def residuals(t):
        return t[0] * t[1] ** x + t[2] - y

    best = float(np.sum(residuals(theta) ** 2))
    scale = max(float(np.sum(y**2)), 1e-12)
    mu = 1e-8
    stall = 0
    ever_improved = False
    for _ in range(max_iter):
        r = residuals(theta)
        lam_pow = theta[1] ** x
        cols = [lam_pow, theta[0] * x * theta[1] ** np.maximum(x - 1, 0)]
        if with_offset:
            cols.append(np.ones_like(x))
        j = np.stack(cols, axis=1)
        g = j.T @ r
        h = j.T @ j
        try:
            step = np.linalg.solve(h + mu * np.eye(h.shape[0]), -g)
        except np.linalg.LinAlgError:
            mu *= 10
            stall += 1
            continue
        cand = theta.copy()
        cand[0] += step[0]
        cand[1] = float(np.clip(cand[1] + step[1], 1e-9, 1.05))
        if with_offset:
            cand[2] += step[2]
        cost = float(np.sum(residuals(cand) ** 2))
        if cost < best * (1 - 1e-12):
            theta, best = cand, cost
            mu = max(mu / 4, 1e-12)
            stall = 0
            ever_improved = True
        else:
            mu *= 10
            stall += 1
        if stall >= stall_limit:
            break
    if not ever_improved and stall >= stall_limit and best > 1e-10 * scale:
        raise FitDiverged(f"residual stuck at {best:.3e} for {label or 'series'}")
    if not np.isfinite(best):
        raise FitDiverged(f"non-finite residual for {label or 'series'}")
    rms = float(np.sqrt(best / len(x)))
    return DecayFit(float(theta[0]), float(theta[1]), float(theta[2]), rms, label)


def fidelity_from_decays(lz: Sequence[float], lx: Sequence[float], n_qubits: int) -> float:
    """F = (sum lz + 2^N (sum lx - 1)) / 4^N with identity entries set to 1."""
    d = 1 << n_qubits
    lz = np.asarray(lz, dtype=float)
    lx = np.asarray(lx, dtype=float)
    if lz.shape != (d,) or lx.shape != (d,):
        raise DimensionMismatch(f"expected {d} decays per setting")
    return float((lz.sum() + d * (lx.sum() - 1.0)) / d**2)


# ---------------------------------------------------------------------------
# protocol driver


@dataclass(frozen=True)
class ObservableSeries:
    setting: str
    label: str
    depths: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    fit: DecayFit | None
    failed: bool


@dataclass(frozen=True)
class RBResult:
    config: RBConfig
    series: tuple[ObservableSeries, ...]
    fidelity_estimate: float
    truth: float
    failed_labels: tuple[str, ...] = ()

    def to_summary_json(self) -> dict:
        return {
            "procedure": self.config.procedure,
            "group": self.config.group_name,
            "target": {"n": self.config.target_n, "m": self.config.target_m},
            "F_estimate": self.fidelity_estimate,
            "F_true": self.truth,
            "failed_fits": list(self.failed_labels),
        }


def _pauli_string_label(kind: str, mask: int, n_qubits: int) -> str:
    return "".join(
        kind if (mask >> (n_qubits - 1 - q)) & 1 else "I" for q in range(n_qubits)
    )


def _sqrt_decay(value: float) -> float:
    # per-unit decays multiply two target applications; values below zero
    # only occur in the noise floor and are clipped
    return float(np.sqrt(max(value, 0.0)))


def _series_stats(values: np.ndarray) -> tuple[float, float]:
    k = values.shape[0]
    mean = float(values.mean())
    if k < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(k))


def run_protocol(cfg: RBConfig) -> RBResult:
    grp = make_group(cfg)
    engine = _BatchedRun(cfg, grp, build_noise(cfg.noise))
    n = cfg.gate.n_qubits
    d = 1 << n

    # vals[setting][i] has shape (2^N, K_i): one column per sequence
    vals: dict[str, list[np.ndarray]] = {"Z": [], "X": []}
    for depth, k in zip(cfg.depths, cfg.seqs_per_depth):
        for setting in ("Z", "X"):
            vals[setting].append(engine.run_depth(depth, k, setting))

    series: list[ObservableSeries] = []
    failed: list[str] = []

    if cfg.procedure in ("OURS", "CXDt"):
        decays = {"Z": np.ones(d), "X": np.ones(d)}
        for setting in ("Z", "X"):
            for mask in range(1, d):
                label = _pauli_string_label(setting, mask, n)
                stats = [_series_stats(vals[setting][i][mask]) for i in range(len(cfg.depths))]
                means = tuple(s[0] for s in stats)
                stde = tuple(s[1] for s in stats)
                fit, bad = _try_fit(cfg.depths, means, False, label)
                if bad:
                    failed.append(label)
                    decays[setting][mask] = np.nan
                else:
                    decays[setting][mask] = _sqrt_decay(fit.decay)
                series.append(
                    ObservableSeries(setting, label, cfg.depths, means, stde, fit, bad)
                )
        estimate = (
            float("nan")
            if failed
            else fidelity_from_decays(decays["Z"], decays["X"], n)
        )
    else:  # CXDn: survival probabilities with offset fits
        block = {}
        for setting in ("Z", "X"):
            label = f"survival_{setting}"
            # survival probability = mean over the 2^N observable expectations
            stats = [
                _series_stats(vals[setting][i].mean(axis=0))
                for i in range(len(cfg.depths))
            ]
            means = tuple(s[0] for s in stats)
            stde = tuple(s[1] for s in stats)
            fit, bad = _try_fit(cfg.depths, means, True, label)
            if bad:
                failed.append(label)
                block[setting] = float("nan")
            else:
                block[setting] = _sqrt_decay(fit.decay)
            series.append(
                ObservableSeries(setting, label, cfg.depths, means, stde, fit, bad)
            )
        if failed:
            estimate = float("nan")
        else:
            estimate = (1.0 + (d - 1) * block["Z"] + (d * d - d) * block["X"]) / d**2

    if not np.isnan(estimate):
        estimate = float(np.clip(estimate, 0.0, 1.01))
    return RBResult(cfg, tuple(series), estimate, true_fidelity(cfg.noise), tuple(failed))


def _try_fit(depths, means, with_offset, label):
    try:
        fit = fit_exponential(
            list(zip(depths, means)), with_offset=with_offset, label=label
        )
        return fit, False
    except FitDiverged:
        return None, True


def run_compare(
    base: RBConfig, procedures: Sequence[str] = ("OURS", "CXDn", "CXDt")
) -> list[RBResult]:
    """Run several procedures against one shared noise instance and seed."""
    out = []
    for proc in procedures:
        cfg = replace(base, procedure=proc, group=None)
        out.append(run_protocol(cfg))
    return out
