import numpy as np
import pytest

from twirlkit.cru import CnzmGate, XWGroup, cnzm_group, gz_group
from twirlkit.cxd import CxdGroup
from twirlkit.errors import DimensionMismatch, FitDiverged, ParamOutOfRange
from twirlkit.noise import NoiseModel, build_noise, true_fidelity
from twirlkit.pauli import all_paulis
from twirlkit.rb import (
    RBConfig,
    _BatchedRun,
    fidelity_from_decays,
    fit_exponential,
    gen_sequence,
    make_group,
    run_compare,
    run_protocol,
    sequence_ideal_product,
    sequence_rng,
    simulate_sequence,
)
from twirlkit.superop import identity_superop, process_fidelity
from twirlkit.twirl import twirl_exact

from test_cru import phase_aligned_error


def depolarizing_model(n, p):
    return NoiseModel(
        n, p, (0.0,) * n, (0.0,) * (n * (n - 1) // 2), (0.0,) * ((1 << n) - n - 1), 0.02
    )


class TestGenSequence:
    @pytest.mark.parametrize("group_kind", ["optimal", "gz", "cxd"])
    def test_ideal_product_is_identity(self, group_kind):
        gate = CnzmGate(1, 4)
        grp = {
            "optimal": cnzm_group(1, 4),
            "gz": gz_group(gate),
            "cxd": CxdGroup.for_czm(4),
        }[group_kind]
        eye = np.eye(4)
        for seed in range(100):
            seq = gen_sequence(gate, grp, 3, np.random.default_rng(seed))
            prod = sequence_ideal_product(seq, gate)
            assert phase_aligned_error(prod, eye) <= 1e-10

    def test_inverse_is_group_member(self):
        gate = CnzmGate(1, 4)
        grp = cnzm_group(1, 4)
        for seed in range(50):
            seq = gen_sequence(gate, grp, 4, np.random.default_rng(seed))
            assert grp.is_member(seq.inverse)

    def test_gate_count(self):
        gate = CnzmGate(2, 2)
        seq = gen_sequence(gate, gz_group(gate), 5, np.random.default_rng(0))
        assert len(seq.gates) == 10
        assert seq.depth == 5


class TestSimulateSequence:
    def test_noiseless_returns_initial_values(self):
        gate = CnzmGate(1, 4)
        grp = gz_group(gate)
        seq = gen_sequence(gate, grp, 3, np.random.default_rng(4))
        vals = simulate_sequence(seq, gate, identity_superop(2), "Z", spam=0.02)
        # ideal circuit is the identity: observables keep their initial values
        s = 0.02
        expect = np.array([1.0, 1 - 2 * s, 1 - 2 * s, (1 - 2 * s) ** 2])
        assert np.allclose(vals, expect, atol=1e-10)

    def test_depolarizing_oracle(self):
        # With purely depolarizing noise every Pauli component is scaled by p
        # at each of the 2m noise insertions while the CRU gates permute the
        # components, so each observable decays exactly as
        # (1-2s)^|k| * p^(2m).
        gate = CnzmGate(1, 4)
        grp = gz_group(gate)
        p, s = 0.93, 0.02
        noise = build_noise(depolarizing_model(2, p))
        for depth in (1, 2, 4):
            for seed in (0, 1):
                seq = gen_sequence(gate, grp, depth, np.random.default_rng(seed))
                vals = simulate_sequence(seq, gate, noise, "Z", spam=s)
                weights = np.array([0, 1, 1, 2])
                expect = (1 - 2 * s) ** weights * p ** (2 * depth)
                expect[0] = 1.0
                assert np.allclose(vals, expect, atol=1e-12)

    def test_exact_equals_infinite_shots_limit(self):
        gate = CnzmGate(1, 4)
        grp = gz_group(gate)
        noise = build_noise(NoiseModel.sample(2, seed=3))
        seq = gen_sequence(gate, grp, 2, np.random.default_rng(9))
        exact = simulate_sequence(seq, gate, noise, "Z", spam=0.02)
        sampled = simulate_sequence(
            seq, gate, noise, "Z", spam=0.02, shots=400000,
            rng=np.random.default_rng(1),
        )
        assert np.max(np.abs(exact - sampled)) < 5e-3

    def test_x_setting_observables(self):
        gate = CnzmGate(1, 4)
        grp = gz_group(gate)
        seq = gen_sequence(gate, grp, 2, np.random.default_rng(11))
        vals = simulate_sequence(seq, gate, identity_superop(2), "X", spam=0.0)
        assert np.allclose(vals, [1.0, 1.0, 1.0, 1.0], atol=1e-10)


class TestBatchedEngineMatchesReference:
    @pytest.mark.parametrize(
        "proc,n,m", [("OURS", 1, 4), ("CXDt", 1, 4), ("OURS", 2, 2), ("CXDn", 2, 2)]
    )
    def test_engine_equals_per_sequence_simulation(self, proc, n, m):
        noise = NoiseModel.sample(n + 1, seed=5)
        cfg = RBConfig(
            target_n=n, target_m=m, procedure=proc,
            depths=(2, 3), seqs_per_depth=(4, 4), noise=noise, seed=77,
        )
        grp = make_group(cfg)
        ns = build_noise(noise)
        engine = _BatchedRun(cfg, grp, ns)
        for depth in cfg.depths:
            for setting in ("Z", "X"):
                batched = engine.run_depth(depth, 4, setting)
                for j in range(4):
                    seq = gen_sequence(cfg.gate, grp, depth, sequence_rng(77, depth, j))
                    ref = simulate_sequence(
                        seq, cfg.gate, ns, setting, noise.spam_excitation
                    )
                    assert np.max(np.abs(batched[:, j] - ref)) <= 1e-12


class TestFitExponential:
    def test_exact_recovery(self):
        depths = np.arange(3, 31, 3)
        y = 0.9 * 0.97**depths
        fit = fit_exponential(list(zip(depths, y)))
        assert abs(fit.amplitude - 0.9) <= 1e-9
        assert abs(fit.decay - 0.97) <= 1e-9

    def test_offset_recovery(self):
        depths = np.arange(3, 31, 3)
        y = 0.8 * 0.95**depths + 0.1
        fit = fit_exponential(list(zip(depths, y)), with_offset=True)
        assert abs(fit.decay - 0.95) <= 1e-6
        assert abs(fit.offset - 0.1) <= 1e-6

    def test_noise_calibration(self):
        # Monte-Carlo calibration: 1% Gaussian noise on a dense depth ladder
        # leaves the decay within 1e-3 at least 95% of the time.
        rng = np.random.default_rng(20240817)
        depths = np.arange(3, 31)
        hits = 0
        for _ in range(1000):
            y = 0.9 * 0.97**depths + 0.01 * rng.standard_normal(len(depths))
            fit = fit_exponential(list(zip(depths, y)))
            hits += abs(fit.decay - 0.97) <= 1e-3
        assert hits >= 950

    def test_too_few_points(self):
        with pytest.raises(FitDiverged):
            fit_exponential([(1, 0.9), (2, 0.8)])
        with pytest.raises(FitDiverged):
            fit_exponential([(1, 0.9), (2, 0.8), (3, 0.7)], with_offset=True)

    def test_decay_clamped(self):
        depths = np.arange(1, 8)
        y = 1.2**depths  # growing series: lam pinned at the 1.05 cap
        fit = fit_exponential(list(zip(depths, y)))
        assert 0 < fit.decay <= 1.05


class TestFidelityFromDecays:
    def test_all_ones(self):
        assert fidelity_from_decays([1, 1, 1, 1], [1, 1, 1, 1], 2) == pytest.approx(1.0)

    def test_depolarizing_closed_form(self):
        n, p = 2, 0.9
        d = 1 << n
        lz = np.full(d, p)
        lz[0] = 1.0
        lx = np.full(d, p)
        lx[0] = 1.0
        got = fidelity_from_decays(lz, lx, n)
        assert got == pytest.approx((1 + (d * d - 1) * p) / d**2, abs=1e-12)

    def test_consistency_with_exact_twirl(self):
        # Decays read off the exact twirled channel reproduce its process
        # fidelity through the combination formula.
        noise = build_noise(NoiseModel.sample(2, seed=9))
        grp = gz_group(CnzmGate(1, 4))
        lam_g = twirl_exact(noise, grp)
        diag = np.real(np.diag(lam_g.mat))
        d = 4
        lz = np.array([diag[p.index] for p in all_paulis(2) if p.x == 0])
        lx = np.array([diag[(a << 2)] for a in range(d)])
        assert fidelity_from_decays(lz, lx, 2) == pytest.approx(
            process_fidelity(noise), abs=1e-10
        )

    def test_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            fidelity_from_decays([1, 1], [1, 1, 1, 1], 2)


class TestRunProtocol:
    def test_zero_noise_gives_unit_fidelity(self):
        noise = NoiseModel.noiseless(2)
        for proc in ("OURS", "CXDt", "CXDn"):
            cfg = RBConfig(
                target_n=1, target_m=4, procedure=proc,
                depths=(1, 2, 3, 5), seqs_per_depth=(4,) * 4, noise=noise, seed=3,
            )
            res = run_protocol(cfg)
            assert res.fidelity_estimate == pytest.approx(1.0, abs=1e-9)

    def test_pure_depolarizing_closed_form(self):
        p = 0.95
        noise = depolarizing_model(2, p)
        cfg = RBConfig(
            target_n=1, target_m=4, procedure="OURS",
            depths=(1, 2, 4, 8), seqs_per_depth=(8,) * 4, noise=noise, seed=5,
        )
        res = run_protocol(cfg)
        assert abs(res.fidelity_estimate - (1 + 15 * p) / 16) <= 1e-6

    def test_seed_determinism(self):
        noise = NoiseModel.sample(2, seed=2)
        cfg = RBConfig(
            target_n=1, target_m=4, procedure="CXDt",
            depths=(2, 4, 6), seqs_per_depth=(6,) * 3, noise=noise, seed=17,
        )
        a, b = run_protocol(cfg), run_protocol(cfg)
        assert a.fidelity_estimate == b.fidelity_estimate
        for sa, sb in zip(a.series, b.series):
            assert sa.means == sb.means

    def test_estimates_track_truth(self):
        noise = NoiseModel.sample(2, seed=11)
        cfg = RBConfig(
            target_n=1, target_m=4, procedure="OURS",
            depths=tuple(range(3, 31, 3)), seqs_per_depth=(30,) * 10,
            noise=noise, seed=1,
        )
        res = run_protocol(cfg)
        assert abs(res.fidelity_estimate - res.truth) <= 2e-3

    def test_compare_shares_noise(self):
        noise = NoiseModel.sample(2, seed=4)
        base = RBConfig(
            target_n=1, target_m=4, procedure="OURS",
            depths=(2, 4, 6, 9), seqs_per_depth=(10,) * 4, noise=noise, seed=6,
        )
        results = run_compare(base)
        assert [r.config.procedure for r in results] == ["OURS", "CXDn", "CXDt"]
        assert len({r.truth for r in results}) == 1

    def test_config_validation(self):
        noise = NoiseModel.noiseless(2)
        with pytest.raises(ParamOutOfRange):
            RBConfig(1, 4, "BOGUS", (1, 2), (2, 2), noise, 0)
        with pytest.raises(ParamOutOfRange):
            RBConfig(1, 4, "OURS", (2, 2), (2, 2), noise, 0)
        with pytest.raises(DimensionMismatch):
            RBConfig(2, 2, "OURS", (1, 2), (2, 2), noise, 0)

    def test_config_json_roundtrip(self):
        noise = NoiseModel.sample(2, seed=8)
        cfg = RBConfig(
            target_n=1, target_m=4, procedure="CXDn",
            depths=(3, 6), seqs_per_depth=(5, 5), noise=noise, seed=12, shots=1024,
        )
        back = RBConfig.from_json(cfg.to_json())
        assert back.procedure == cfg.procedure
        assert back.depths == cfg.depths
        assert back.shots == 1024
        assert back.noise == cfg.noise


class TestSpamRobustness:
    def test_decay_independent_of_spam(self):
        # Fit the exact expectation series under two different SPAM maps: the
        # amplitude changes, the decay does not (the defining RB property).
        gate = CnzmGate(1, 4)
        grp = gz_group(gate)
        noise = build_noise(NoiseModel.sample(2, seed=14))
        lam_g = twirl_exact(noise, grp).mat
        u = gate.superop().mat
        unit = u.conj().T @ lam_g @ u @ lam_g  # expected per-depth operator
        from twirlkit.noise import noisy_initial_state
        from twirlkit.pauli import pauli_matrix, PauliOp

        depths = range(1, 9)
        z1 = PauliOp.from_label("ZI")
        obs_vec = np.zeros(16)
        obs_vec[z1.index] = 2.0  # unnormalized Pauli: sqrt(d) * sigma
        lams = []
        for spam in (0.0, 0.05):
            rho = noisy_initial_state(2, "Z", spam).mat
            sigmas = [pauli_matrix(p) / 2.0 for p in all_paulis(2)]
            rho_vec = np.array([np.trace(s.conj().T @ rho) for s in sigmas])
            pts = []
            for m in depths:
                val = obs_vec @ np.linalg.matrix_power(unit, m) @ rho_vec
                pts.append((m, float(np.real(val))))
            lams.append(fit_exponential(pts).decay)
        assert abs(lams[0] - lams[1]) <= 1e-6


class TestParameterReduction:
    @pytest.mark.parametrize("n", [1, 2])
    def test_s_augmentation_reduces_parameters(self, n):
        # The CZ-Pauli group leaves 3*(2^N - 1) distinct decay values; adding
        # S merges the even/odd sectors down to 2*(2^N - 1).
        from itertools import combinations

        from twirlkit.cru import _and_vector

        nq = n + 1
        gate = CnzmGate(n, 2)
        gens, orders = [], []
        for pair in combinations(range(nq), 2):
            gens.append(tuple(_and_vector(nq, pair)))
            orders.append(2)
        for q in range(nq):
            gens.append(tuple(_and_vector(nq, [q])))
            orders.append(2)
        czp = XWGroup(
            name="czp", n_qubits=nq, modulus=2,
            x_basis=tuple(1 << q for q in range(nq)),
            diag_gens=tuple(gens), diag_orders=tuple(orders),
        )
        # generic full-rank channel: the structured simulation noise carries
        # an accidental X <-> Y symmetry that merges extra values
        from twirlkit.channels import random_cptp

        chan = random_cptp(nq, 0.9, seed=500 + n).superop()

        def distinct_count(grp):
            diag = np.real(np.diag(twirl_exact(chan, grp).mat))
            vals = sorted(diag[1:])
            count = 1
            for a, b in zip(vals, vals[1:]):
                if b - a > 1e-9:
                    count += 1
            return count

        assert distinct_count(czp) == 3 * ((1 << nq) - 1)
        assert distinct_count(gz_group(gate)) == 2 * ((1 << nq) - 1)


class TestCxdnCombination:
    def test_formula_validated_on_exact_twirl(self):
        # Open-question check: the survival-probability combination formula
        # reproduces the process fidelity when fed the exact block decays.
        for n, m in ((1, 4), (2, 2)):
            nq = n + 1
            d = 1 << nq
            grp = CxdGroup.for_cnz(n) if m == 2 else CxdGroup.for_czm(m)
            chan = build_noise(NoiseModel.sample(nq, seed=60 + n))
            lam_g = twirl_exact(chan, grp)
            diag = np.real(np.diag(lam_g.mat))
            z_idx = [p.index for p in all_paulis(nq) if p.x == 0 and p.index != 0]
            x_idx = [i for i in range(1, d * d) if i not in z_idx]
            p_z = diag[z_idx].mean()
            p_x = diag[x_idx].mean()
            assert np.max(np.abs(diag[z_idx] - p_z)) <= 1e-12
            assert np.max(np.abs(diag[x_idx] - p_x)) <= 1e-12
            formula = (1 + (d - 1) * p_z + (d * d - d) * p_x) / d**2
            assert formula == pytest.approx(process_fidelity(chan), abs=1e-10)
