"""Equilibrium states, exact quench evolution, and reduced density matrices.

Evolution is performed in the eigenbasis of the post-quench Hamiltonian
(phase multiplication), which is exact at arbitrary time. For large
systems the two-site reduced states are accumulated from the Boltzmann-
weighted evolved eigenvectors of the initial Hamiltonian instead of the
full density matrix; `evolved_two_site_series` below is that fast route
and is cross-checked against `evolve` + `partial_trace` in the tests.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError, InvalidStateError
from .operators import PAULIS, SpectralHamiltonian

_HERMITICITY_ATOL = 1e-12
_TRACE_ATOL = 1e-10


@dataclass
class DensityMatrix:
    """Trace-one positive-semidefinite Hermitian matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidStateError(f"expected a square matrix, got shape {m.shape}")
        if not np.allclose(m, m.conj().T, atol=_HERMITICITY_ATOL, rtol=0):
            raise InvalidStateError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m).real
        if abs(tr - 1.0) > _TRACE_ATOL:
            raise InvalidStateError(f"trace must be 1 within 1e-10, got {tr!r}")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        n = int(round(math.log2(self.dim)))
        if 2 ** n != self.dim:
            raise InvalidStateError(f"dimension {self.dim} is not a power of 2")
        return n

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def check_positive(self, tol: float = 1e-10):
        lo = float(self.eigenvalues().min())
        if lo < -tol:
            raise InvalidStateError(f"minimum eigenvalue {lo:.3e} below -{tol:.0e}")

    def entropy(self) -> float:
        return entropy_from_eigenvalues(self.eigenvalues())


def entropy_from_eigenvalues(evals: np.ndarray) -> float:
    """von Neumann entropy in bits with the 0*log0 = 0 convention."""
    p = np.asarray(evals, dtype=float)
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())


def von_neumann_entropy(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return entropy_from_eigenvalues(np.linalg.eigvalsh(m))


@dataclass
class TwoSiteState:
    """Two-qubit reduced state with its Bloch-vector decomposition.

    ``corr[i, j]`` is tr[(s_i x s_j) rho12] for i, j in (x, y, z); ``m_a``
    and ``m_b`` are the single-site magnetization vectors.
    """

    rho12: np.ndarray
    m_a: np.ndarray
    m_b: np.ndarray
    corr: np.ndarray

    @property
    def mz_a(self) -> float:
        return float(self.m_a[2])

    @property
    def mz_b(self) -> float:
        return float(self.m_b[2])

    def reconstruct(self) -> np.ndarray:
        """Rebuild the 4x4 matrix from (m_a, m_b, corr)."""
        out = np.kron(PAULIS[0], PAULIS[0]).astype(complex)
        for k in range(3):
            out += self.m_a[k] * np.kron(PAULIS[k + 1], PAULIS[0])
            out += self.m_b[k] * np.kron(PAULIS[0], PAULIS[k + 1])
        for i in range(3):
            for j in range(3):
                out += self.corr[i, j] * np.kron(PAULIS[i + 1], PAULIS[j + 1])
        return out / 4.0


def gibbs_state(spec: SpectralHamiltonian, beta: float) -> DensityMatrix:
    """Canonical equilibrium state exp(-beta H)/Z at inverse temperature beta.

    Boltzmann weights are shifted by the ground energy before
    exponentiation, so no overflow can occur for beta >= 0.
    """
    if not (math.isfinite(beta) and beta >= 0):
        raise InvalidParameterError(f"beta must be finite and >= 0, got {beta!r}")
    w = gibbs_weights(spec.eigenvalues, beta)
    V = spec.eigenvectors
    rho = (V * w) @ V.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def gibbs_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    """Normalized Boltzmann populations over the given spectrum."""
    w = np.exp(-beta * (eigenvalues - eigenvalues[0]))
    return w / w.sum()


def evolve(spec_final: SpectralHamiltonian, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """Unitary evolution rho(t) = U rho0 U+ with U = exp(-i H t).

    Implemented in the eigenbasis: transform, multiply element (m, n) by
    exp(-i (E_m - E_n) t), transform back. ``spec_final`` is meant to be
    the post-quench (field = 0) Hamiltonian.
    """
    if rho0.dim != spec_final.dim:
        raise InvalidParameterError(
            f"dimension mismatch: state {rho0.dim}, Hamiltonian {spec_final.dim}"
        )
    if not (math.isfinite(t) and t >= 0):
        raise InvalidParameterError(f"t must be finite and >= 0, got {t!r}")
    V = spec_final.eigenvectors
    phases = np.exp(-1j * spec_final.eigenvalues * t)
    rho_eig = V.conj().T @ rho0.matrix @ V
    rho_eig *= np.outer(phases, phases.conj())
    rho = V @ rho_eig @ V.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the kept sites, in the order given.

    ``keep`` holds one or two distinct site indices; site 0 is the most
    significant qubit of the computational basis.
    """
    keep = list(keep)
    n = rho.n_sites
    if len(keep) not in (1, 2) or len(set(keep)) != len(keep):
        raise InvalidParameterError(f"keep must hold 1 or 2 distinct sites, got {keep}")
    if any(not (0 <= k < n) for k in keep):
        raise InvalidParameterError(f"keep {keep} out of range for {n} sites")
    return DensityMatrix(_partial_trace_array(rho.matrix, n, keep))


def _partial_trace_array(rho: np.ndarray, n: int, keep) -> np.ndarray:
    traced = [q for q in range(n) if q not in keep]
    tensor = rho.reshape((2,) * (2 * n))
    # pair ket axis q with bra axis n + q for every traced site
    for q in sorted(traced, reverse=True):
        ofs = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=q, axis2=ofs + q)
        # removing ket axis q shifts kept ket axes above q down by one
        keep = [k - 1 if k > q else k for k in keep]
        traced = [k - 1 if k > q else k for k in traced]
    k = len(keep)
    if k == 2 and keep[0] > keep[1]:
        tensor = tensor.transpose(1, 0, 3, 2)
    return tensor.reshape(2 ** k, 2 ** k)


def two_site_state(rho: DensityMatrix, i: int, j: int) -> TwoSiteState:
    """Two-site reduced state of sites (i, j) with magnetizations and correlators."""
    if i == j:
        raise InvalidParameterError("two_site_state needs two distinct sites")
    rho12 = partial_trace(rho, [i, j]).matrix
    return two_site_decomposition(rho12)


def two_site_decomposition(rho12: np.ndarray) -> TwoSiteState:
    """Bloch decomposition of a 4x4 density matrix."""
    m_a = np.empty(3)
    m_b = np.empty(3)
    corr = np.empty((3, 3))
    for k in range(3):
        m_a[k] = np.trace(rho12 @ np.kron(PAULIS[k + 1], PAULIS[0])).real
        m_b[k] = np.trace(rho12 @ np.kron(PAULIS[0], PAULIS[k + 1])).real
        for l in range(3):
            corr[k, l] = np.trace(rho12 @ np.kron(PAULIS[k + 1], PAULIS[l + 1])).real
    return TwoSiteState(rho12, m_a, m_b, corr)


# ---------------------------------------------------------------------------
# Fast reduced-state routes used by the ergodicity pipeline. They avoid
# building any dim x dim density matrix and are exact up to the stated
# Boltzmann tail truncation.
# ---------------------------------------------------------------------------


def _pair_front_view(vectors: np.ndarray, n: int, pair) -> np.ndarray:
    """Reshape columns so the two kept sites index the leading axis of size 4.

    ``vectors`` is (dim, K); the result is (4, dim // 4, K).
    """
    i, j = pair
    dim, K = vectors.shape
    rest = [q for q in range(n) if q not in (i, j)]
    perm = [i, j] + rest + [n]
    return np.ascontiguousarray(
        vectors.reshape((2,) * n + (K,)).transpose(perm)
    ).reshape(4, dim // 4, K)


def gibbs_two_site(spec: SpectralHamiltonian, beta: float, pair) -> np.ndarray:
    """Two-site reduced state of the Gibbs state, without forming the full state."""
    if not (math.isfinite(beta) and beta >= 0):
        raise InvalidParameterError(f"beta must be finite and >= 0, got {beta!r}")
    vt = _pair_front_view(spec.eigenvectors, spec.n_sites, pair)
    w = gibbs_weights(spec.eigenvalues, beta)
    return np.einsum("k,prk,qrk->pq", w, vt, vt.conj(), optimize=True)


def truncated_gibbs_vectors(spec: SpectralHamiltonian, beta: float, tail_mass: float = 1e-12):
    """Low-energy eigenvectors carrying all but ``tail_mass`` of the Gibbs weight.

    Returns (vectors, weights) with the weights renormalized to sum to 1.
    Eigenvalues ascending means the weights are already sorted descending.
    """
    w = gibbs_weights(spec.eigenvalues, beta)
    csum = np.cumsum(w)
    K = int(np.searchsorted(csum, 1.0 - tail_mass)) + 1
    K = min(K, len(w))
    wk = w[:K] / w[:K].sum()
    return spec.eigenvectors[:, :K], wk


def evolved_two_site_series(
    spec_final: SpectralHamiltonian,
    spec_init: SpectralHamiltonian,
    alpha: float,
    pair,
    times: np.ndarray,
    tail_mass: float = 1e-12,
    chunk_budget: int = 2048,
) -> np.ndarray:
    """Two-site reduced states of the evolved quench state at each time.

    The initial state is the Gibbs state of ``spec_init`` at inverse
    temperature ``alpha``; evolution is generated by ``spec_final``. The
    initial state is expanded over its leading eigenvectors (Boltzmann
    tail below ``tail_mass`` dropped) and each is evolved exactly via the
    final eigenbasis. Returns an array of shape (len(times), 4, 4).

    ``chunk_budget`` caps the number of evolved columns held at once;
    peak scratch memory is about 2 * 16 * dim * chunk_budget bytes.
    """
    if spec_final.dim != spec_init.dim:
        raise InvalidParameterError("initial and final Hamiltonians differ in dimension")
    n = spec_final.n_sites
    dim = spec_final.dim
    W, wk = truncated_gibbs_vectors(spec_init, alpha, tail_mass)
    K = W.shape[1]
    V = spec_final.eigenvectors
    real_basis = not np.iscomplexobj(V)
    coeff = V.conj().T @ W                      # initial eigvecs in the final eigenbasis
    E = spec_final.eigenvalues
    times = np.asarray(times, dtype=float)
    i, j = pair
    rest = [q for q in range(n) if q not in (i, j)]
    perm = [i, j] + rest
    out = np.empty((len(times), 4, 4), dtype=complex)
    step = max(1, chunk_budget // K)
    for s0 in range(0, len(times), step):
        ts = times[s0:s0 + step]
        arg = np.outer(E, ts)                               # (dim, T)
        if real_basis:
            # contiguous real mode matrices feed two real gemms, which is
            # about twice as fast as one complex gemm here
            re = (np.cos(arg)[:, :, None] * coeff[:, None, :]).reshape(dim, -1)
            im = (-np.sin(arg)[:, :, None] * coeff[:, None, :]).reshape(dim, -1)
            psi = V @ re + 1j * (V @ im)
        else:
            modes = (np.exp(-1j * arg)[:, :, None] * coeff[:, None, :]).reshape(dim, -1)
            psi = V @ modes
        block = psi.reshape((2,) * n + (len(ts), K)).transpose(perm + [n, n + 1])
        block = np.ascontiguousarray(block).reshape(4, dim // 4, len(ts), K)
        out[s0:s0 + len(ts)] = np.einsum(
            "k,prtk,qrtk->tpq", wk, block, block.conj(), optimize=True
        )
    return out
