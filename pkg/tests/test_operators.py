import numpy as np
import pytest

from spinergo.exceptions import (
    CapacityError,
    EigensolverError,
    InvalidParameterError,
)
from spinergo.lattice import BondGraph, build_ring
from spinergo.operators import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ModelParams,
    build_hamiltonian,
    field_hamiltonian,
    interaction_hamiltonian,
    parity_operator,
    spectral_decompose,
)

PAIR = BondGraph(2, ((0, 1),), "ring", (2,))


def kron_chain_oracle(graph, params):
    """Independent assembly via explicit Kronecker chains."""
    n = graph.n_sites
    dim = 2 ** n

    def embed(op_by_site):
        out = np.array([[1.0 + 0j]])
        for s in range(n):
            out = np.kron(out, op_by_site.get(s, SIGMA_I))
        return out

    H = np.zeros((dim, dim), dtype=complex)
    J = params.j
    for (i, j) in graph.bonds:
        H += (J / 4) * (1 + params.gamma) * embed({i: SIGMA_X, j: SIGMA_X})
        H += (J / 4) * (1 - params.gamma) * embed({i: SIGMA_Y, j: SIGMA_Y})
        H += (J / 4) * params.delta * embed({i: SIGMA_Z, j: SIGMA_Z})
    for i in range(n):
        H -= (J / 2) * params.field * embed({i: SIGMA_Z})
    return H


class TestBuildHamiltonian:
    def test_matches_kron_chain_oracle(self):
        g = build_ring(3)
        params = ModelParams(0.8, 0.2, 0.6)
        H = build_hamiltonian(g, params)
        oracle = kron_chain_oracle(g, params)
        assert np.abs(oracle.imag).max() < 1e-14
        assert np.allclose(H, oracle.real, atol=1e-12)

    def test_matches_oracle_on_ladder_like_graph(self):
        g = BondGraph(4, ((0, 1), (2, 3), (0, 2), (1, 3)), "torus", (2, 2))
        params = ModelParams(0.4, 1.1, 0.3)
        assert np.allclose(build_hamiltonian(g, params),
                           kron_chain_oracle(g, params).real, atol=1e-12)

    def test_isotropic_bond_spectrum(self):
        # (J/4) sigma.sigma: singlet at -3/4, triplet at +1/4
        H = build_hamiltonian(PAIR, ModelParams(0.0, 1.0, 0.0))
        evals = np.linalg.eigvalsh(H)
        assert np.allclose(evals, [-0.75, 0.25, 0.25, 0.25], atol=1e-12)

    def test_isotropic_bond_ground_state_is_singlet(self):
        H = build_hamiltonian(PAIR, ModelParams(0.0, 1.0, 0.0))
        spec = spectral_decompose(H)
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        overlap = abs(np.dot(singlet, spec.eigenvectors[:, 0]))
        assert overlap > 1 - 1e-12

    def test_traceless(self):
        H = build_hamiltonian(build_ring(3), ModelParams(0.8, 0.2, 0.6))
        assert abs(np.trace(H)) < 1e-10

    def test_hermitian(self):
        H = build_hamiltonian(build_ring(5), ModelParams(0.7, 0.9, 1.3))
        assert np.abs(H - H.T).max() < 1e-12

    def test_energy_scale_linear_in_j(self):
        g = build_ring(4)
        e1 = np.linalg.eigvalsh(build_hamiltonian(g, ModelParams(0.5, 0.3, 0.2, j=1.0)))
        e2 = np.linalg.eigvalsh(build_hamiltonian(g, ModelParams(0.5, 0.3, 0.2, j=2.5)))
        assert np.allclose(e2, 2.5 * e1, atol=1e-10)

    def test_capacity_limit(self):
        g = BondGraph(15, ((0, 1),), "ring", (15,))
        with pytest.raises(CapacityError):
            build_hamiltonian(g, ModelParams(0.5, 0.5, 0.0))

    def test_invalid_params(self):
        with pytest.raises(InvalidParameterError):
            ModelParams(float("nan"), 0.5, 0.0)
        with pytest.raises(InvalidParameterError):
            ModelParams(0.5, float("inf"), 0.0)
        with pytest.raises(InvalidParameterError):
            ModelParams(-0.2, 0.5, 0.0)


class TestSymmetries:
    def test_interaction_and_field_do_not_commute_for_nonzero_gamma(self):
        g = build_ring(4)
        h_int = interaction_hamiltonian(g, ModelParams(0.8, 0.2, 0.0))
        h_mag = field_hamiltonian(4)
        comm = h_int @ h_mag - h_mag @ h_int
        assert np.linalg.norm(comm) > 0.1

    def test_commutator_vanishes_at_gamma_zero(self):
        g = build_ring(4)
        h_int = interaction_hamiltonian(g, ModelParams(0.0, 0.7, 0.0))
        h_mag = field_hamiltonian(4)
        comm = h_int @ h_mag - h_mag @ h_int
        assert np.linalg.norm(comm) < 1e-10

    def test_parity_commutes_for_all_fields(self):
        g = build_ring(4)
        parity = parity_operator(4)
        for field in (0.0, 0.6, 1.3):
            H = build_hamiltonian(g, ModelParams(0.8, 0.2, field))
            assert np.linalg.norm(H @ parity - parity @ H) < 1e-10

    def test_total_hamiltonian_composition(self):
        g = build_ring(4)
        params = ModelParams(0.8, 0.2, 0.6)
        expected = interaction_hamiltonian(g, params) - 0.6 * field_hamiltonian(4)
        assert np.allclose(build_hamiltonian(g, params), expected, atol=1e-14)


class TestSpectralDecompose:
    def test_sigma_z(self):
        spec = spectral_decompose(np.array([[1.0, 0.0], [0.0, -1.0]]))
        assert np.allclose(spec.eigenvalues, [-1.0, 1.0])

    def test_random_hermitian_reconstruction(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        A = (A + A.conj().T) / 2
        spec = spectral_decompose(A, validate=True)
        V, E = spec.eigenvectors, spec.eigenvalues
        rec = (V * E) @ V.conj().T
        assert np.linalg.norm(rec - A) / np.linalg.norm(A) < 1e-9
        assert np.allclose(V.conj().T @ V, np.eye(16), atol=1e-10)

    def test_eigenvalues_ascending(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((12, 12))
        A = (A + A.T) / 2
        spec = spectral_decompose(A)
        assert np.all(np.diff(spec.eigenvalues) >= -1e-14)

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidParameterError):
            spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(InvalidParameterError):
            spectral_decompose(np.zeros((2, 3)))

    def test_n_sites_property(self):
        spec = spectral_decompose(np.zeros((8, 8)))
        assert spec.n_sites == 3
