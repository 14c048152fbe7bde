import numpy as np
import pytest

from twirlkit.channels import (
    KrausChannel,
    amplitude_damping,
    choi_matrix,
    cptp_check,
    depolarizing,
    random_cptp,
)
from twirlkit.errors import ParamOutOfRange
from twirlkit.superop import DenseOperator, pauli_fidelities, process_fidelity


class TestDepolarizing:
    def test_p_one_is_identity(self):
        s = depolarizing(2, 1.0).superop()
        assert np.allclose(s.mat, np.eye(16), atol=1e-12)

    def test_p_zero_fully_depolarizes(self):
        s = depolarizing(1, 0.0).superop()
        assert np.allclose(s.mat, np.diag([1, 0, 0, 0]), atol=1e-12)

    def test_two_qubit_process_fidelity(self):
        s = depolarizing(2, 0.98).superop()
        assert process_fidelity(s) == pytest.approx((1 + 15 * 0.98) / 16, abs=1e-12)

    def test_diagonal_superop(self):
        s = depolarizing(2, 0.9).superop()
        expect = np.diag([1.0] + [0.9] * 15)
        assert np.allclose(s.mat, expect, atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ParamOutOfRange):
            depolarizing(1, 1.5)


class TestAmplitudeDamping:
    def test_zero_damping_is_identity(self):
        s = amplitude_damping(2, [0.0, 0.0]).superop()
        assert np.allclose(s.mat, np.eye(16), atol=1e-12)

    def test_full_damping_resets(self):
        ch = amplitude_damping(1, [1.0])
        one = np.array([[0, 0], [0, 1]], dtype=complex)
        out = sum(k.mat @ one @ k.mat.conj().T for k in ch.kraus)
        assert np.allclose(out, np.array([[1, 0], [0, 0]]), atol=1e-12)

    def test_single_qubit_fidelities(self):
        g = 0.13
        lam = pauli_fidelities(amplitude_damping(1, [g]).superop())
        root = np.sqrt(1 - g)
        # Basis order is (I, Z, X, Y).
        assert np.allclose(lam, [1.0, 1 - g, root, root], atol=1e-12)

    def test_param_validation(self):
        with pytest.raises(ParamOutOfRange):
            amplitude_damping(2, [0.1])
        with pytest.raises(ParamOutOfRange):
            amplitude_damping(1, [-0.2])


class TestRandomCptp:
    def test_strength_zero_is_identity(self):
        s = random_cptp(2, 0.0, seed=5).superop()
        assert np.allclose(s.mat, np.eye(16), atol=1e-12)

    def test_deterministic_per_seed(self):
        a = random_cptp(2, 0.5, seed=42).superop()
        b = random_cptp(2, 0.5, seed=42).superop()
        assert np.array_equal(a.mat, b.mat)
        c = random_cptp(2, 0.5, seed=43).superop()
        assert not np.allclose(a.mat, c.mat)

    @pytest.mark.parametrize("n", [1, 2])
    def test_many_seeds_are_cptp(self, n):
        # Independent Choi-positivity oracle: rebuild the Choi matrix from the
        # superoperator and check its spectrum, besides the library check.
        for seed in range(100):
            ch = random_cptp(n, 0.8, seed=seed)
            rep = cptp_check(ch)
            assert rep.passed, (seed, rep)
            eigs = np.linalg.eigvalsh(choi_matrix(ch.superop()))
            assert eigs[0] >= -1e-10

    def test_full_liouville_support(self):
        s = random_cptp(2, 1.0, seed=7).superop()
        assert np.min(np.abs(np.diag(s.mat))) > 1e-6 or np.count_nonzero(
            np.abs(s.mat) > 1e-9
        ) > 16


class TestCptpCheck:
    def test_depolarizing_passes(self):
        assert cptp_check(depolarizing(2, 0.9)).passed

    def test_scaled_identity_fails_tp(self):
        bad = KrausChannel(1, (DenseOperator(1, 2 * np.eye(2)),))
        rep = cptp_check(bad)
        assert not rep.passed
        assert rep.trace_violation > 1.0

    def test_superop_variant(self):
        rep = cptp_check(depolarizing(2, 0.7).superop())
        assert rep.passed

    def test_amplitude_damping_passes(self):
        assert cptp_check(amplitude_damping(3, [0.01, 0.02, 0.0])).passed


class TestSerialization:
    def test_kraus_json_roundtrip(self):
        ch = random_cptp(1, 0.6, seed=11)
        back = KrausChannel.from_json(ch.to_json())
        assert np.allclose(back.superop().mat, ch.superop().mat)
