import numpy as np
import pytest

from qtherm.linops import dagger, eigh, stream_rng
from qtherm.quasiprob import (
    OtocSetting,
    QuasiprobTable,
    coarse_quasiprob,
    infer_quasiprob_from_weak,
    interference_inner_product,
    ising_setting,
    pauli_site,
    state_decomposition,
    weak_measurement_simulate,
    weak_value_retrodiction,
)
from qtherm.quasiprob.core import fine_basis
from qtherm.quasiprob.measure import TwoOutcomeDetector, check_calibration


class TestWeakMeasurement:
    def test_recovers_table_entrywise(self):
        setting = ising_setting(3)
        t = 1.2
        g = 1e-2
        stats = weak_measurement_simulate(setting, t, g, g)
        inferred = infer_quasiprob_from_weak(stats)
        exact = coarse_quasiprob(setting, t)
        err = max(
            abs(inferred[k] - exact[k]) for k in QuasiprobTable.coarse_keys()
        )
        assert err <= 5 * g

    def test_error_scales_with_coupling(self):
        setting = ising_setting(3)
        t = 0.9
        exact = coarse_quasiprob(setting, t)
        errs = []
        for g in (3e-2, 1e-2, 3e-3):
            stats = weak_measurement_simulate(setting, t, g, g)
            inferred = infer_quasiprob_from_weak(stats)
            errs.append(
                max(abs(inferred[k] - exact[k]) for k in QuasiprobTable.coarse_keys())
            )
        assert errs[2] < errs[0]

    def test_zero_coupling_zero_signal(self):
        setting = ising_setting(3)
        stats = weak_measurement_simulate(setting, 1.0, 0.0, 0.0)
        # with the couplings off the xy-correlators carry no signal at all
        assert max(abs(v) for v in stats.correlators["real"].values()) < 1e-12
        assert max(abs(v) for v in stats.correlators["imag"].values()) < 1e-12

    def test_phase_rotation_swaps_parts(self):
        # the imaginary-coupling channel carries Im A, the real channel Re A
        setting = ising_setting(3, rho=None)
        t = 1.5
        g = 1e-2
        stats = weak_measurement_simulate(setting, t, g, g)
        exact = coarse_quasiprob(setting, t)
        for key in QuasiprobTable.coarse_keys():
            signal_im = -stats.correlators["imag"][key] / (8 * g * g)
            assert signal_im == pytest.approx(exact[key].imag, abs=5 * g)

    def test_detector_validation(self):
        with pytest.raises(ValueError, match="uncalibrated"):
            check_calibration([(1, 0.7, 0.01), (-1, 0.3, -0.01)])
        with pytest.raises(ValueError, match="0.1"):
            TwoOutcomeDetector(0.5)

    def test_rejects_non_mixed_state(self):
        rng = stream_rng(0)
        psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        psi /= np.linalg.norm(psi)
        setting = ising_setting(3, rho=np.outer(psi, psi.conj()))
        with pytest.raises(ValueError, match="1/d"):
            weak_measurement_simulate(setting, 1.0, 1e-2, 1e-2)

    def test_three_couplings_rejected(self):
        setting = ising_setting(3)
        with pytest.raises(ValueError, match="two weak"):
            weak_measurement_simulate(setting, 1.0, 1e-2, 1e-2, g_c=1e-2)

    def test_sampled_statistics_converge(self):
        setting = ising_setting(3)
        t = 1.2
        g = 5e-2
        rng = stream_rng(99)
        stats = weak_measurement_simulate(
            setting, t, g, g, shots=2_000_000, rng=rng
        )
        inferred = infer_quasiprob_from_weak(stats)
        exact = coarse_quasiprob(setting, t)
        err = max(
            abs(inferred[k] - exact[k]) for k in QuasiprobTable.coarse_keys()
        )
        # sampling noise ~ 1/(8 g^2 sqrt(shots)) per correlator
        assert err < 5 * g + 0.02


class TestInterference:
    def test_identity_same_state(self):
        v = np.zeros(4, dtype=complex)
        v[1] = 1.0
        est = interference_inner_product(np.eye(4), v, v)
        assert est.value == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_states(self):
        a = np.array([1, 0, 0, 0], dtype=complex)
        b = np.array([0, 1, 0, 0], dtype=complex)
        est = interference_inner_product(np.eye(4), a, b)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_noiseless_recovery_exact(self):
        rng = stream_rng(5)
        setting = ising_setting(3)
        u = setting.evolution(1.3)
        for _ in range(5):
            a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            a /= np.linalg.norm(a)
            b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            b /= np.linalg.norm(b)
            est = interference_inner_product(u, a, b)
            assert est.value == pytest.approx(complex(a.conj() @ u @ b), abs=1e-10)
            est_dag = interference_inner_product(dagger(u), a, b)
            assert est_dag.value == pytest.approx(
                complex(a.conj() @ dagger(u) @ b), abs=1e-10
            )

    def test_sampled_within_three_sigma(self):
        rng = stream_rng(6)
        setting = ising_setting(3)
        u = setting.evolution(0.8)
        a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        a /= np.linalg.norm(a)
        b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        b /= np.linalg.norm(b)
        est = interference_inner_product(u, a, b, shots=10**6, rng=rng)
        assert abs(est.value.real - est.exact.real) < 3 * est.stderr_re
        assert abs(est.value.imag - est.exact.imag) < 3 * est.stderr_im

    def test_requires_unit_vectors(self):
        with pytest.raises(ValueError, match="unit"):
            interference_inner_product(
                np.eye(2), np.array([2.0, 0.0]), np.array([1.0, 0.0])
            )


class TestRetrodiction:
    def _random_setup(self, rng, n_qubits=4, n_ops=3):
        dim = 1 << n_qubits
        axes = ["x", "y", "z"]
        ops = [
            pauli_site(axes[rng.integers(3)], int(rng.integers(n_qubits)), n_qubits)
            for _ in range(n_ops)
        ]
        a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        rho = a @ dagger(a)
        rho /= np.trace(rho).real
        f = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        f /= np.linalg.norm(f)
        return ops, rho, f

    def test_identity_observables(self):
        rng = stream_rng(7)
        _, rho, f = self._random_setup(rng)
        eye = np.eye(16, dtype=complex)
        res = weak_value_retrodiction([eye, eye, eye], rho, f)
        assert res.value == pytest.approx(2.0, abs=1e-12)
        assert not res.anomalous

    def test_pure_state_no_postselection_shift(self):
        # rho = |f><f| makes the weak value the plain expectation of Gamma
        rng = stream_rng(8)
        op = pauli_site("z", 0, 2)
        f = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        f /= np.linalg.norm(f)
        rho = np.outer(f, f.conj())
        res = weak_value_retrodiction([op], rho, f)
        expect = float(np.real(f.conj() @ op @ f))
        assert res.value == pytest.approx(2 * expect, abs=1e-12)

    def test_methods_agree(self):
        rng = stream_rng(9)
        for _ in range(50):
            ops, rho, f = self._random_setup(rng)
            conv = weak_value_retrodiction(ops, rho, f, mode="conventional")
            fact = weak_value_retrodiction(ops, rho, f, mode="factored")
            assert fact.value == pytest.approx(conv.value, abs=1e-9)

    def test_antisymmetrized_agrees(self):
        rng = stream_rng(10)
        for _ in range(10):
            ops, rho, f = self._random_setup(rng, n_ops=2)
            conv = weak_value_retrodiction(
                ops, rho, f, mode="conventional", antisymmetrized=True
            )
            fact = weak_value_retrodiction(
                ops, rho, f, mode="factored", antisymmetrized=True
            )
            assert fact.value == pytest.approx(conv.value, abs=1e-9)

    def test_vanishing_condition_probability_rejected(self):
        op = pauli_site("z", 0, 2)
        rho = np.diag([1.0, 0, 0, 0]).astype(complex)
        f = np.array([0, 0, 0, 1.0], dtype=complex)
        with pytest.raises(ValueError, match="vanishes"):
            weak_value_retrodiction([op], rho, f)

    def test_anomalous_flagged(self):
        # strong postselection against the state drives the weak value
        # outside the operator's spectrum
        found = False
        rng = stream_rng(11)
        op = pauli_site("z", 0, 1)
        for _ in range(200):
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            psi /= np.linalg.norm(psi)
            f = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            f /= np.linalg.norm(f)
            rho = np.outer(psi, psi.conj())
            if abs(f.conj() @ rho @ f) < 1e-6:
                continue
            res = weak_value_retrodiction([op], rho, f)
            if res.anomalous:
                found = True
                break
        assert found


class TestStateDecomposition:
    def test_generic_time_reconstructs_rho(self):
        rng = stream_rng(12)
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = a @ dagger(a)
        rho /= np.trace(rho).real
        setting = ising_setting(3, rho=rho)
        wb = fine_basis("z", 0, 3)
        vb = fine_basis("z", 2, 3)
        dec = state_decomposition(setting, 1.0, wb, vb)
        assert dec.removed_terms == 0
        assert np.max(np.abs(dec.rho_prime - rho)) < 1e-9
        assert np.max(np.abs(dec.reconstructed - rho)) < 1e-9

    def test_t_zero_keeps_diagonal_part(self):
        rng = stream_rng(13)
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = a @ dagger(a)
        rho /= np.trace(rho).real
        setting = ising_setting(3, rho=rho)
        basis = fine_basis("z", 0, 3)
        dec = state_decomposition(setting, 0.0, basis, basis)
        diag = basis @ np.diag(np.diag(dagger(basis) @ rho @ basis)) @ dagger(basis)
        assert np.max(np.abs(dec.rho_prime - diag)) < 1e-10
        assert dec.removed_terms == 64 - 8

    def test_trace_one_always(self):
        rng = stream_rng(14)
        for t in (0.0, 0.5, 2.0):
            setting = ising_setting(3)
            wb = fine_basis("z", 0, 3)
            vb = fine_basis("z", 2, 3)
            dec = state_decomposition(setting, t, wb, vb)
            assert dec.trace == pytest.approx(1.0, abs=1e-10)

    def test_coefficients_are_quasiprob_sums(self):
        from qtherm.quasiprob import fine_quasiprob

        rng = stream_rng(15)
        a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = a @ dagger(a)
        rho /= np.trace(rho).real
        setting = ising_setting(3, rho=rho)
        wb = fine_basis("z", 0, 3)
        vb = fine_basis("z", 2, 3)
        t = 0.85
        dec = state_decomposition(setting, t, wb, vb)
        fine = fine_quasiprob(setting, t, wb, vb).fine
        # summing the fine table over (v1, w2) leaves the coefficients
        sums = fine.sum(axis=(0, 1))  # axes (v2, w3)
        assert np.max(np.abs(dec.coefficients - sums.T)) < 1e-9
