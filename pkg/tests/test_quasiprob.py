import numpy as np
import pytest
from scipy.linalg import expm

from qtherm.linops import dagger, eigh, stream_rng, tensor, thermal_state
from qtherm.quasiprob import (
    OtocSetting,
    QuasiprobTable,
    amplitude,
    coarse_quasiprob,
    fine_quasiprob,
    ising_setting,
    jarzynski_moment,
    kfold_moment,
    kfold_otoc,
    kfold_quasiprob,
    otoc,
    pauli_site,
    quasiprob_from_amplitudes,
    reconstruct_otoc,
    regulated_otoc,
    regulated_quasiprob,
    sixteen_term_expansion,
    toc_moment,
    toc_quasiprob,
    work_distribution,
)
from qtherm.quasiprob.core import fine_basis, marginal, toc_correlator


def random_rho(dim, rng):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ dagger(a)
    return rho / np.trace(rho).real


def v_diagonal_rho(setting, rng):
    """Random state diagonal in the V eigenbasis."""
    vals, vecs = eigh(setting.v_op)
    p = rng.uniform(0.2, 1.0, size=setting.dim)
    p /= p.sum()
    return (vecs * p) @ dagger(vecs)


class TestOtoc:
    def test_commuting_case_is_one(self):
        setting = ising_setting(3)
        assert otoc(setting, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_two_qubit_hand_oracle(self):
        # H couples the qubits, so the commutator grows; compare against
        # plain 4x4 matrix arithmetic with a Pade exponential
        h = tensor(np.diag([1.0, -1.0]), np.array([[0, 1], [1, 0]]))
        w = pauli_site("z", 0, 2)
        v = pauli_site("z", 1, 2)
        setting = OtocSetting(h, w, v)
        for t in (0.7, 1.9):
            u = expm(-1j * np.asarray(h) * t)
            wt = u.conj().T @ w @ u
            expected = np.trace(wt @ v @ wt @ v) / 4.0
            assert otoc(setting, t) == pytest.approx(expected, abs=1e-12)

    def test_magnitude_bounded(self):
        setting = ising_setting(4)
        for t in (0.5, 2.0, 8.0):
            assert abs(otoc(setting, t)) <= 1.0 + 1e-12

    def test_onset_time_nonintegrable(self):
        # decay of Re F sets in around t ~ 4-6 for the 10-site chain; at
        # 6 sites the light cone is shorter but decay is still visible
        setting = ising_setting(6)
        assert otoc(setting, 1.0).real > 0.9
        assert otoc(setting, 12.0).real < 0.9


class TestCoarseTable:
    def test_t_zero_closed_form(self):
        setting = ising_setting(3)
        table = coarse_quasiprob(setting, 0.0)
        for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
            expected = (1 + w2 * w3 + v1 * v2 + w2 * w3 * v1 * v2) / 16.0
            assert table[(v1, w2, v2, w3)] == pytest.approx(expected, abs=1e-12)

    def test_normalization(self):
        setting = ising_setting(4, rho=random_rho(16, stream_rng(3)))
        for t in (0.0, 0.8, 3.3):
            assert coarse_quasiprob(setting, t).total() == pytest.approx(
                1.0, abs=1e-10
            )

    def test_reconstructs_otoc(self):
        rng = stream_rng(4)
        for seed_t in (0.3, 1.1, 2.9, 5.5, 11.0):
            setting = ising_setting(6, rho=random_rho(64, rng))
            table = coarse_quasiprob(setting, seed_t)
            assert reconstruct_otoc(table) == pytest.approx(
                otoc(setting, seed_t), abs=1e-10
            )

    def test_real_for_infinite_temperature(self):
        setting = ising_setting(5)
        for t in (0.9, 4.2):
            table = coarse_quasiprob(setting, t)
            assert max(abs(v.imag) for v in table.values.values()) < 1e-12

    def test_interchange_symmetry_infinite_temperature(self):
        setting = ising_setting(4)
        table = coarse_quasiprob(setting, 1.7)
        for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
            assert table[(v1, w2, v2, w3)] == pytest.approx(
                table[(v2, w3, v1, w2)], abs=1e-12
            )

    def test_hermiticity_symmetry_v_diagonal_state(self):
        # swapping w2 <-> w3 conjugates the table when [rho, P^V] = 0
        setting = ising_setting(4)
        setting = OtocSetting(
            setting.hamiltonian,
            setting.w_op,
            setting.v_op,
            rho=v_diagonal_rho(setting, stream_rng(8)),
        )
        table = coarse_quasiprob(setting, 1.3)
        for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
            assert table[(v1, w3, v2, w2)] == pytest.approx(
                np.conj(table[(v1, w2, v2, w3)]), abs=1e-12
            )

    def test_cyclic_symmetry_t_zero(self):
        setting = ising_setting(3)
        table = coarse_quasiprob(setting, 0.0)
        for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
            assert table[(v1, w2, v2, w3)] == pytest.approx(
                table[(w3, v1, w2, v2)], abs=1e-12
            )

    def test_squared_commutator_nonnegative(self):
        setting = ising_setting(4)
        for t in (0.5, 2.0, 6.0):
            c = 2 - 2 * otoc(setting, t).real
            assert c >= -1e-10


class TestSixteenTermExpansion:
    def test_matches_direct_table(self):
        rng = stream_rng(5)
        setting = ising_setting(4, rho=random_rho(16, rng))
        for t in (0.0, 1.0, 2.7):
            direct = coarse_quasiprob(setting, t)
            expanded = sixteen_term_expansion(setting, t)
            for key in QuasiprobTable.coarse_keys():
                assert expanded[key] == pytest.approx(direct[key], abs=1e-10)

    def test_infinite_temperature_reduction(self):
        # at rho = 1/d single-operator and three-operator terms vanish
        setting = ising_setting(4)
        t = 0.9
        table = sixteen_term_expansion(setting, t)
        wt = setting.w_heisenberg(t)
        g = np.trace(wt @ setting.v_op) / setting.dim
        f = otoc(setting, t)
        for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
            expected = (
                (1 + w2 * w3 + v1 * v2)
                + (w2 + w3) * (v1 + v2) * g
                + w2 * w3 * v1 * v2 * f
            ) / 16.0
            assert table[(v1, w2, v2, w3)] == pytest.approx(expected, abs=1e-10)

    def test_rejects_non_involutory(self):
        setting = ising_setting(3)
        bad = OtocSetting(
            setting.hamiltonian, 0.5 * setting.w_op, setting.v_op
        )
        with pytest.raises(ValueError, match="W\\^2"):
            sixteen_term_expansion(bad, 1.0)


class TestFineTable:
    def test_degeneracy_sum_matches_coarse(self):
        rng = stream_rng(6)
        setting = ising_setting(4, rho=random_rho(16, rng))
        wb = fine_basis("z", 0, 4)
        vb = fine_basis("z", 3, 4)
        fine = fine_quasiprob(setting, 0.7, wb, vb)
        coarse = coarse_quasiprob(setting, 0.7)
        for key in QuasiprobTable.coarse_keys():
            assert fine[key] == pytest.approx(coarse[key], abs=1e-10)

    def test_fine_basis_diagonalizes(self):
        for axis in ("x", "y", "z"):
            basis = fine_basis(axis, 1, 3)
            op = pauli_site(axis, 1, 3)
            transformed = dagger(basis) @ op @ basis
            expected = np.diag([1.0] * 4 + [-1.0] * 4)
            assert np.max(np.abs(transformed - expected)) < 1e-12

    def test_marginal_is_probability(self):
        rng = stream_rng(7)
        setting = ising_setting(3, rho=random_rho(8, rng))
        wb = fine_basis("z", 0, 3)
        vb = fine_basis("z", 2, 3)
        table = fine_quasiprob(setting, 1.2, wb, vb)
        for axis in range(4):
            probs = marginal(table, axis)
            assert np.all(np.real(probs) > -1e-12)
            assert np.max(np.abs(np.imag(probs))) < 1e-12
            assert np.sum(np.real(probs)) == pytest.approx(1.0, abs=1e-10)

    def test_t_zero_shared_basis_real_kronecker(self):
        rng = stream_rng(9)
        setting = ising_setting(3, rho=random_rho(8, rng))
        wb = fine_basis("z", 0, 3)
        vb = fine_basis("z", 2, 3)
        table = fine_quasiprob(setting, 0.0, wb, vb)
        fine = table.fine
        assert np.max(np.abs(fine.imag)) < 1e-10
        # both bases are sigma^z product states, so at t = 0 the overlap
        # matrix is a permutation; the chain forces v1 = v2, w2 = w3 with
        # the w outcome the permutation image of the v outcome
        perm = np.argmax(np.abs(dagger(wb) @ vb), axis=0)
        nonzero = np.argwhere(np.abs(fine) > 1e-12)
        for v1, w2, v2, w3 in nonzero:
            assert v1 == v2
            assert w2 == w3
            assert w3 == perm[v2]
        # surviving values are diagonal elements of rho: real
        assert np.max(np.abs(fine.imag)) < 1e-12

    def test_rejects_bad_basis(self):
        setting = ising_setting(3)
        bad = np.eye(8) * 2.0
        with pytest.raises(ValueError, match="orthonormal"):
            fine_quasiprob(setting, 0.5, bad, np.eye(8))


class TestAmplitudes:
    def test_pure_state_single_j(self):
        setting = ising_setting(3)
        psi = np.zeros(8, dtype=complex)
        psi[2] = 1.0
        pure = OtocSetting(
            setting.hamiltonian, setting.w_op, setting.v_op,
            rho=np.outer(psi, psi.conj()),
        )
        amps = amplitude(pure, 0.8, fine_basis("z", 0, 3), fine_basis("z", 2, 3))
        # sqrt(p_j) kills every j-slice but the pure one
        norms = np.linalg.norm(amps.reshape(8, -1), axis=1)
        assert np.sum(norms > 1e-12) == 1

    def test_completeness(self):
        rng = stream_rng(10)
        setting = ising_setting(3, rho=random_rho(8, rng))
        amps = amplitude(setting, 1.1, fine_basis("z", 0, 3), fine_basis("z", 2, 3))
        assert np.sum(np.abs(amps) ** 2) == pytest.approx(1.0, abs=1e-10)

    def test_products_reproduce_fine_table(self):
        rng = stream_rng(11)
        setting = ising_setting(3, rho=random_rho(8, rng))
        wb = fine_basis("z", 0, 3)
        vb = fine_basis("z", 2, 3)
        via_amps = quasiprob_from_amplitudes(setting, 0.9, wb, vb)
        direct = fine_quasiprob(setting, 0.9, wb, vb)
        assert np.max(np.abs(via_amps.fine - direct.fine)) < 1e-10


class TestWorkDistribution:
    def test_normalization_and_moment(self):
        rng = stream_rng(12)
        setting = ising_setting(4, rho=random_rho(16, rng))
        for t in (0.6, 2.2):
            table = coarse_quasiprob(setting, t)
            dist = work_distribution(table)
            assert dist.total() == pytest.approx(1.0, abs=1e-10)
            exact, fd = jarzynski_moment(dist)
            f = otoc(setting, t)
            assert exact == pytest.approx(f, abs=1e-10)
            assert fd == pytest.approx(f, abs=1e-6)
            assert abs(exact - fd) / max(abs(exact), 1e-3) < 1e-6

    def test_t_zero_collapse(self):
        # the t = 0 closed-form table puts all weight on W = W'
        setting = ising_setting(3)
        dist = work_distribution(coarse_quasiprob(setting, 0.0))
        assert dist[(1.0, 1.0)] == pytest.approx(0.5, abs=1e-12)
        assert dist[(-1.0, -1.0)] == pytest.approx(0.5, abs=1e-12)
        assert dist[(1.0, -1.0)] == pytest.approx(0.0, abs=1e-12)
        assert dist[(-1.0, 1.0)] == pytest.approx(0.0, abs=1e-12)
        assert dist.moment() == pytest.approx(1.0, abs=1e-12)

    def test_degeneracy_infinite_temperature(self):
        setting = ising_setting(4)
        for t in (0.9, 3.7):
            dist = work_distribution(coarse_quasiprob(setting, t))
            assert dist[(1.0, -1.0)] == pytest.approx(
                dist[(-1.0, 1.0)], abs=1e-12
            )


class TestToc:
    def test_unitary_moment_is_one(self):
        rng = stream_rng(13)
        setting = ising_setting(4, rho=random_rho(16, rng))
        table = toc_quasiprob(setting, 1.4)
        assert toc_moment(table) == pytest.approx(1.0, abs=1e-10)
        assert toc_correlator(setting, 1.4) == pytest.approx(1.0, abs=1e-10)

    def test_v_diagonal_state_probabilities(self):
        setting = ising_setting(4)
        rho = v_diagonal_rho(setting, stream_rng(14))
        setting = OtocSetting(setting.hamiltonian, setting.w_op, setting.v_op, rho)
        table = toc_quasiprob(setting, 2.1)
        vals = np.array(list(table.values.values()))
        assert np.max(np.abs(vals.imag)) < 1e-12
        assert np.min(vals.real) > -1e-12
        assert np.sum(vals.real) == pytest.approx(1.0, abs=1e-10)

    def test_moment_matches_direct_trace_nonunitary(self):
        # Hermitian non-unitary W still satisfies the moment identity
        setting = ising_setting(3)
        w = pauli_site("z", 0, 3) * 0.5 + pauli_site("x", 0, 3) * 0.25
        nonunit = OtocSetting(setting.hamiltonian, w, setting.v_op)
        # eigenvalues of w are not +-1, so build the table by the general
        # projector sum: reuse toc_quasiprob only for Pauli-like W
        f_toc = toc_correlator(nonunit, 1.0)
        wt = nonunit.w_heisenberg(1.0)
        expected = np.trace(
            nonunit.rho @ nonunit.v_op @ wt @ wt @ nonunit.v_op
        )
        assert f_toc == pytest.approx(complex(expected), abs=1e-12)


class TestKFold:
    def test_k2_reduces_to_otoc(self):
        rng = stream_rng(15)
        setting = ising_setting(4, rho=random_rho(16, rng))
        for t in (0.5, 1.8):
            assert kfold_otoc(setting, t, 2) == pytest.approx(
                otoc(setting, t), abs=1e-10
            )

    def test_commuting_case(self):
        setting = ising_setting(4)
        # even k: (WV)^k = 1; odd k: (WV)^k = WV, whose infinite-temperature
        # average vanishes for distinct-site Paulis
        assert kfold_otoc(setting, 0.0, 2) == pytest.approx(1.0, abs=1e-10)
        expected = np.trace(setting.w_op @ setting.v_op) / setting.dim
        assert kfold_otoc(setting, 0.0, 3) == pytest.approx(
            complex(expected), abs=1e-10
        )

    def test_moment_identity_k3(self):
        setting = ising_setting(6)
        t = 1.0
        table = kfold_quasiprob(setting, t, 3)
        assert kfold_moment(table) == pytest.approx(
            kfold_otoc(setting, t, 3), abs=1e-8
        )
        assert table.total() == pytest.approx(1.0, abs=1e-9)

    def test_moment_identity_k2(self):
        rng = stream_rng(16)
        setting = ising_setting(4, rho=random_rho(16, rng))
        table = kfold_quasiprob(setting, 1.3, 2)
        assert kfold_moment(table) == pytest.approx(otoc(setting, 1.3), abs=1e-10)

    def test_unsupported_k(self):
        setting = ising_setting(3)
        with pytest.raises(ValueError, match="k"):
            kfold_otoc(setting, 1.0, 4)

    def test_k3_dimension_cap(self):
        setting = ising_setting(7)
        with pytest.raises(ValueError, match="64"):
            kfold_otoc(setting, 1.0, 3)


class TestRegulated:
    def _thermal_setting(self, n, temperature):
        setting = ising_setting(n)
        rho = thermal_state(setting.hamiltonian, 1.0 / temperature)
        return OtocSetting(setting.hamiltonian, setting.w_op, setting.v_op, rho)

    def test_infinite_temperature_limit(self):
        # entrywise difference from the T = inf table scales as 1/T with
        # prefactor ~ ||H||/4, so it is ~2.5e-4 at T = 1e3 for this chain
        t = 1.1
        plain = coarse_quasiprob(ising_setting(3), t)
        diffs = []
        for temperature in (1e3, 1e4):
            setting = self._thermal_setting(3, temperature)
            reg = regulated_quasiprob(setting, t, temperature)
            diffs.append(
                max(abs(reg[k] - plain[k]) for k in QuasiprobTable.coarse_keys())
            )
        assert diffs[0] < 5e-4
        assert diffs[1] < 5e-5
        assert diffs[1] < 0.2 * diffs[0]  # 1/T convergence

    def test_interchange_symmetry_all_temperatures(self):
        for temperature in (1.0, 5.0):
            setting = self._thermal_setting(4, temperature)
            reg = regulated_quasiprob(setting, 1.6, temperature)
            for v1, w2, v2, w3 in QuasiprobTable.coarse_keys():
                assert reg[(v1, w2, v2, w3)] == pytest.approx(
                    reg[(v2, w3, v1, w2)], abs=1e-12
                )

    def test_moment_matches_four_insertion_trace(self):
        setting = self._thermal_setting(4, 1.0)
        t = 0.9
        table = regulated_quasiprob(setting, t, 1.0)
        assert reconstruct_otoc(table) == pytest.approx(
            regulated_otoc(setting, t, 1.0), abs=1e-10
        )

    def test_rejects_non_thermal_state(self):
        setting = ising_setting(3, rho=random_rho(8, stream_rng(17)))
        with pytest.raises(ValueError, match="thermal"):
            regulated_quasiprob(setting, 1.0, 2.0)
