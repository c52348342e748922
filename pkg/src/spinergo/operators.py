"""XYZ Hamiltonian assembly and dense spectral decomposition.

The model on a bond graph is, with J setting the energy unit,

    H = (J/4) sum_bonds [(1+gamma) sx.sx + (1-gamma) sy.sy + delta sz.sz]
        - (J/2) h sum_sites sz

in the computational (sz product) basis with site 0 as the most
significant qubit. The matrix is real symmetric in this basis.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import CapacityError, EigensolverError, InvalidParameterError
from .lattice import BondGraph

MAX_SITES = 14

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless couplings: xy-anisotropy, zz strength, z-field.

    ``field`` is the instantaneous field value h; the quench takes h = a
    for t <= 0 and h = 0 afterwards. ``j`` is the energy unit (kept at 1
    everywhere except scale tests).
    """

    gamma: float
    delta: float
    field: float
    j: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "delta", "field", "j"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v!r}")
        if self.gamma < 0:
            raise InvalidParameterError(
                f"gamma must be >= 0 (gamma and -gamma are related by a local "
                f"rotation), got {self.gamma}"
            )


@dataclass
class SpectralHamiltonian:
    """Dense Hermitian operator with its cached eigendecomposition.

    Eigenvalues are ascending; eigenvectors are the columns of a unitary.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        n = int(round(math.log2(self.dim)))
        if 2 ** n != self.dim:
            raise InvalidParameterError(f"dimension {self.dim} is not a power of 2")
        return n


def _site_z(n: int, site: int, states: np.ndarray) -> np.ndarray:
    """sz eigenvalue (+1/-1) of ``site`` for each basis index, site 0 most significant."""
    return 1 - 2 * ((states >> (n - 1 - site)) & 1)


def interaction_hamiltonian(graph: BondGraph, params: ModelParams) -> np.ndarray:
    """Bond part of the Hamiltonian (no field term), real symmetric."""
    n = graph.n_sites
    if n > MAX_SITES:
        raise CapacityError(f"{n} sites exceeds the dense limit of {MAX_SITES}")
    dim = 1 << n
    s = np.arange(dim)
    H = np.zeros((dim, dim))
    diag = np.zeros(dim)
    J = params.j
    for (i, jj) in graph.bonds:
        zi = _site_z(n, i, s)
        zj = _site_z(n, jj, s)
        diag += (J * params.delta / 4.0) * zi * zj
        flip = s ^ ((1 << (n - 1 - i)) | (1 << (n - 1 - jj)))
        # both-bit flips: sx.sx contributes (1+gamma)/4, sy.sy contributes
        # -(1-gamma)/4 * zi*zj, on the same matrix element
        H[flip, s] += (J * (1 + params.gamma) / 4.0) - (J * (1 - params.gamma) / 4.0) * zi * zj
    H[s, s] += diag
    return H


def field_hamiltonian(n_sites: int, j: float = 1.0) -> np.ndarray:
    """Magnetic part (J/2) sum_i sz_i as a dense diagonal matrix."""
    if n_sites > MAX_SITES:
        raise CapacityError(f"{n_sites} sites exceeds the dense limit of {MAX_SITES}")
    dim = 1 << n_sites
    s = np.arange(dim)
    diag = np.zeros(dim)
    for i in range(n_sites):
        diag += _site_z(n_sites, i, s)
    return np.diag(j / 2.0 * diag)


def build_hamiltonian(graph: BondGraph, params: ModelParams) -> np.ndarray:
    """Full Hamiltonian H = H_int - h * H_mag for the given field value."""
    H = interaction_hamiltonian(graph, params)
    if params.field != 0.0:
        n = graph.n_sites
        dim = 1 << n
        s = np.arange(dim)
        diag = np.zeros(dim)
        for i in range(n):
            diag += _site_z(n, i, s)
        H[s, s] -= (params.j / 2.0) * params.field * diag
    return H


def parity_operator(n_sites: int) -> np.ndarray:
    """Global spin-flip parity prod_i sz_i (diagonal, +-1 entries)."""
    dim = 1 << n_sites
    s = np.arange(dim)
    signs = np.ones(dim)
    for i in range(n_sites):
        signs *= _site_z(n_sites, i, s)
    return np.diag(signs)


def spectral_decompose(matrix: np.ndarray, validate: bool = False) -> SpectralHamiltonian:
    """Dense eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    matrix : ndarray
        Hermitian (real symmetric inputs are kept real for speed).
    validate : bool
        Additionally check reconstruction and orthonormality; meant for
        tests, costs two dense matmuls.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.conj().T, atol=1e-12, rtol=0):
        raise InvalidParameterError("matrix is not Hermitian within 1e-12")
    try:
        evals, evecs = sla.eigh(matrix, driver="evd")
    except (sla.LinAlgError, ValueError) as exc:
        scale = float(np.abs(matrix).max())
        raise EigensolverError(
            f"dense eigensolver failed (dim={matrix.shape[0]}, max|H|={scale:.3e}): {exc}"
        ) from exc
    spec = SpectralHamiltonian(matrix, evals, evecs)
    if validate:
        rec = (evecs * evals) @ evecs.conj().T
        err = np.linalg.norm(rec - matrix) / max(np.linalg.norm(matrix), 1e-300)
        if err > 1e-9:
            raise EigensolverError(f"eigendecomposition reconstruction error {err:.2e}")
        gram = evecs.conj().T @ evecs
        if not np.allclose(gram, np.eye(matrix.shape[0]), atol=1e-10):
            raise EigensolverError("eigenvector matrix is not unitary within 1e-10")
    return spec
