import numpy as np
import pytest

from conftest import random_density_matrix, random_unitary, werner
from oracles import deficit_grid_oracle, discord_grid_oracle
from spinergo.dynamics import entropy_from_eigenvalues
from spinergo.exceptions import InvalidStateError
from spinergo.qcorr import (
    MEASURES,
    MeasurementSetting,
    OptimizerConfig,
    binary_entropy,
    concurrence,
    log_negativity,
    mutual_information,
    quantum_discord,
    work_deficit,
)


def werner_entropy(p):
    lam = np.array([(1 + 3 * p) / 4, (1 - p) / 4, (1 - p) / 4, (1 - p) / 4])
    return entropy_from_eigenvalues(lam)


def werner_discord(p):
    # S_B - S_AB + min conditional entropy; the minimum is isotropic: h2((1+p)/2)
    return 1.0 - werner_entropy(p) + float(binary_entropy((1 + p) / 2))


class TestLogNegativity:
    def test_bell(self, bell_state):
        assert abs(log_negativity(bell_state).value - 1.0) < 1e-12

    def test_product(self, product_00):
        assert log_negativity(product_00).value == 0.0

    def test_werner_half(self):
        # partial-transpose spectrum {(1+p)/4 x3, (1-3p)/4}: N = 0.125 at p = 0.5
        v = log_negativity(werner(0.5)).value
        assert abs(v - np.log2(1.25)) < 1e-12

    def test_ppt_iff_separable_boundary_matches_concurrence(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            q = rng.uniform(0.0, 1.0)
            rho = q * random_density_matrix(rng, 4) + (1 - q) * np.eye(4) / 4
            en = log_negativity(rho).value
            c = concurrence(rho).value
            assert (en > 1e-9) == (c > 1e-9)


class TestConcurrence:
    def test_bell(self, bell_state):
        assert abs(concurrence(bell_state).value - 1.0) < 1e-12

    def test_maximally_mixed(self):
        assert concurrence(np.eye(4) / 4).value == 0.0

    def test_werner_family_closed_form(self):
        # direct lambda computation as an in-test oracle
        yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
        for p in (0.2, 0.5, 0.8, 1.0):
            rho = werner(p)
            lam = np.sqrt(np.clip(np.sort(
                np.linalg.eigvals(rho @ (yy @ rho.conj() @ yy)).real)[::-1], 0, None))
            want = max(0.0, lam[0] - lam[1] - lam[2] - lam[3])
            assert abs(concurrence(rho).value - want) < 1e-10
            assert abs(want - max(0.0, (3 * p - 1) / 2)) < 1e-10

    def test_werner_08(self):
        assert abs(concurrence(werner(0.8)).value - 0.7) < 1e-10


class TestMutualInformation:
    def test_product(self, product_00):
        assert abs(mutual_information(product_00)) < 1e-12

    def test_bell(self, bell_state):
        assert abs(mutual_information(bell_state) - 2.0) < 1e-12

    def test_classical(self, classical_correlated):
        assert abs(mutual_information(classical_correlated) - 1.0) < 1e-12


class TestDiscord:
    def test_bell(self, bell_state):
        assert abs(quantum_discord(bell_state).value - 1.0) < 1e-8

    def test_classical_classical(self, classical_correlated):
        assert quantum_discord(classical_correlated, "B").value < 1e-8
        assert quantum_discord(classical_correlated, "A").value < 1e-8

    def test_werner_closed_form(self):
        for p in (0.3, 0.5, 0.8):
            assert abs(quantum_discord(werner(p)).value - werner_discord(p)) < 1e-8

    def test_classical_quantum_states_have_zero_discord_on_classical_side(self):
        rng = np.random.default_rng(33)
        for _ in range(5):
            p = rng.uniform(0.2, 0.8)
            rho = np.zeros((4, 4), dtype=complex)
            rho[:2, :2] = p * random_density_matrix(rng, 2)
            rho[2:, 2:] = (1 - p) * random_density_matrix(rng, 2)
            assert quantum_discord(rho, measured_side="A").value < 1e-7

    def test_optimizer_beats_dense_grid(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            rho = random_density_matrix(rng, 4)
            got = quantum_discord(rho).value
            oracle = discord_grid_oracle(rho)
            assert got <= oracle + 1e-4

    def test_side_symmetry_for_symmetric_states(self):
        # mz_a = mz_b family: thermal-like diagonal T plus xy off-diagonals
        rng = np.random.default_rng(8)
        for _ in range(4):
            rho = random_density_matrix(rng, 4)
            sym = 0.5 * (rho + rho.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4))
            a = quantum_discord(sym, "A").value
            b = quantum_discord(sym, "B").value
            assert abs(a - b) < 1e-7

    def test_report_metadata(self, bell_state):
        mv = quantum_discord(bell_state)
        rep = mv.report
        assert rep.side == "B"
        assert rep.grid_shape == (65, 129)
        assert 0.0 <= rep.setting.theta <= np.pi
        assert 0.0 <= rep.setting.phi < 2 * np.pi


class TestWorkDeficit:
    def test_bell(self, bell_state):
        assert abs(work_deficit(bell_state).value - 1.0) < 1e-8

    def test_product_pure(self):
        psi = np.kron([1, 0], [np.cos(0.3), np.sin(0.3)]).astype(complex)
        rho = np.outer(psi, psi.conj())
        assert work_deficit(rho).value < 1e-8

    def test_classical_classical(self, classical_correlated):
        assert work_deficit(classical_correlated).value < 1e-8

    def test_werner_closed_form(self):
        # for Werner states the one-way deficit equals the discord
        for p in (0.3, 0.6, 0.9):
            assert abs(work_deficit(werner(p)).value - werner_discord(p)) < 1e-8

    def test_optimizer_beats_dense_grid(self):
        rng = np.random.default_rng(18)
        for _ in range(10):
            rho = random_density_matrix(rng, 4)
            got = work_deficit(rho).value
            oracle = deficit_grid_oracle(rho)
            assert got <= oracle + 1e-4


class TestProperties:
    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(29)
        for _ in range(3):
            rho = random_density_matrix(rng, 4)
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            rotated = u @ rho @ u.conj().T
            for name, fn in MEASURES.items():
                v0 = fn(rho, None).value
                v1 = fn(rotated, None).value
                assert abs(v0 - v1) < 1e-8, name

    def test_werner_monotone_in_p(self):
        ps = np.linspace(0.0, 1.0, 11)
        for name, fn in MEASURES.items():
            vals = [fn(werner(p), None).value for p in ps]
            assert np.all(np.diff(vals) >= -1e-9), name

    def test_bounds_on_random_states(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            rho = random_density_matrix(rng, 4)
            for name, fn in MEASURES.items():
                v = fn(rho, None).value
                assert 0.0 <= v <= 1.0, name
            assert 0.0 <= mutual_information(rho) <= 2.0

    def test_measures_depend_only_on_bloch_data(self):
        from spinergo.dynamics import two_site_decomposition
        rng = np.random.default_rng(41)
        rho = random_density_matrix(rng, 4)
        rebuilt = two_site_decomposition(rho).reconstruct()
        for name, fn in MEASURES.items():
            assert abs(fn(rho, None).value - fn(rebuilt, None).value) < 1e-10, name


class TestValidation:
    def test_rejects_wrong_trace(self):
        with pytest.raises(InvalidStateError):
            log_negativity(np.eye(4))

    def test_rejects_non_positive(self):
        bad = np.diag([0.8, 0.5, -0.2, -0.1]).astype(complex)
        with pytest.raises(InvalidStateError):
            quantum_discord(bad)

    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidStateError):
            concurrence(np.eye(2) / 2)

    def test_measurement_setting_projectors(self):
        s = MeasurementSetting(0.7, 2.1)
        p, q = s.projectors()
        assert np.allclose(p + q, np.eye(2), atol=1e-14)
        assert np.allclose(p @ p, p, atol=1e-14)
        assert np.allclose(q @ q, q, atol=1e-14)

    def test_optimizer_config_from_kwargs(self, bell_state):
        opt = OptimizerConfig(grid_theta=33, grid_phi=65)
        mv = quantum_discord(bell_state, opt=opt)
        assert mv.report.grid_shape == (33, 65)
        assert abs(mv.value - 1.0) < 1e-8
