"""Exact-diagonalization study of ergodicity of quantum correlations in
step-quenched anisotropic Heisenberg (XYZ) spin lattices."""

__version__ = "0.1.0"

from .dynamics import (
    DensityMatrix,
    TwoSiteState,
    evolve,
    evolved_two_site_series,
    gibbs_state,
    gibbs_two_site,
    partial_trace,
    two_site_state,
    von_neumann_entropy,
)
from .ergodicity import (
    ErgodicityReport,
    Protocol,
    TimeSeries,
    TransitionResult,
    canonical_max,
    default_beta_grid,
    ergodicity_score,
    find_transition,
    time_average,
)
from .lattice import BondGraph, build_ladder, build_ring, build_torus
from .operators import (
    ModelParams,
    SpectralHamiltonian,
    build_hamiltonian,
    field_hamiltonian,
    interaction_hamiltonian,
    parity_operator,
    spectral_decompose,
)
from .qcorr import (
    MEASURES,
    MeasurementSetting,
    MeasureValue,
    OptimizerConfig,
    concurrence,
    log_negativity,
    mutual_information,
    quantum_discord,
    work_deficit,
)

__all__ = [
    "BondGraph", "build_ring", "build_ladder", "build_torus",
    "ModelParams", "SpectralHamiltonian", "build_hamiltonian",
    "interaction_hamiltonian", "field_hamiltonian", "parity_operator",
    "spectral_decompose",
    "DensityMatrix", "TwoSiteState", "gibbs_state", "evolve", "partial_trace",
    "two_site_state", "von_neumann_entropy", "gibbs_two_site",
    "evolved_two_site_series",
    "MeasureValue", "MeasurementSetting", "OptimizerConfig", "MEASURES",
    "log_negativity", "concurrence", "mutual_information", "quantum_discord",
    "work_deficit",
    "Protocol", "TimeSeries", "ErgodicityReport", "TransitionResult",
    "time_average", "canonical_max", "default_beta_grid", "ergodicity_score",
    "find_transition",
]
