"""Ergodicity scores and the nonergodic-to-ergodic transition point.

A quantity is scored by eta = max(0, Q_time_avg - Q_can), where the time
average runs over a late window of the quench evolution and Q_can is the
canonical equilibrium value of the post-quench Hamiltonian. By default
the canonical comparison is made at a fixed anchor inverse temperature
(Jbeta equal to Jalpha for chains and tori, three times that for
ladders); a log-spaced temperature-grid maximum is available through
``Protocol(canonical_mode="grid")``.
"""

import functools
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import evolved_two_site_series, gibbs_two_site
from .exceptions import InvalidParameterError, InvalidWindowError
from .lattice import BondGraph
from .operators import ModelParams, build_hamiltonian, spectral_decompose
from .qcorr import MEASURES, OptimizerConfig

ANCHOR_MULTIPLIER = {"ring": 1.0, "torus": 1.0, "ladder": 3.0}


@dataclass(frozen=True)
class Protocol:
    """Run protocol: time grid, canonical comparison, and thresholds.

    The window mean of the measure converges only once the window is a
    few revival times long; the defaults sample Jt/hbar on [0, 300] with
    step 0.1 and average over [100, 300].
    """

    t_max: float = 300.0
    t_step: float = 0.1
    t_large: float = 100.0
    canonical_mode: str = "anchor"      # "anchor" or "grid"
    canonical_beta: float = 0.0         # > 0 overrides the per-geometry anchor
    beta_points: int = 40
    beta_anchors: tuple = (20.0, 60.0)
    zero_threshold: float = 1e-4
    tail_mass: float = 1e-12
    pair: str = "auto"
    opt: OptimizerConfig = OptimizerConfig()

    def window_times(self) -> np.ndarray:
        steps = int(round((self.t_max - self.t_large) / self.t_step))
        return self.t_large + self.t_step * np.arange(steps + 1)

    def full_times(self) -> np.ndarray:
        steps = int(round(self.t_max / self.t_step))
        return self.t_step * np.arange(steps + 1)


@dataclass
class TimeSeries:
    """Measure values on an ascending time grid, with the averaging onset."""

    times: np.ndarray
    values: np.ndarray
    t_large: float
    classification: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if len(self.times) != len(self.values):
            raise InvalidParameterError("times and values lengths differ")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidParameterError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise InvalidParameterError("series values must be finite")
        if np.min(np.abs(self.times - self.t_large)) > 1e-9:
            raise InvalidParameterError("t_large must lie on the time grid")
        if not self.classification:
            window = self.values[self.times >= self.t_large - 1e-9]
            self.classification = classify_fluctuations(window)


def classify_fluctuations(window_values: np.ndarray, precision: float = 1e-4) -> str:
    """Large-time fluctuation case: none (i), below precision (ii), present (iii)."""
    amp = float(np.max(window_values) - np.min(window_values))
    if amp <= 1e-9:
        return "i"
    if amp <= precision:
        return "ii"
    return "iii"


def time_average(series: TimeSeries, window: tuple = None) -> float:
    """Mean of the series over uniform samples in [start, start + length]."""
    if window is None:
        start = series.t_large
        length = float(series.times[-1]) - start
    else:
        start, length = window
    if length <= 0 or series.times[-1] < start + length - 1e-9:
        raise InvalidWindowError(
            f"series ends at {series.times[-1]}, window needs {start + length}"
        )
    mask = (series.times >= start - 1e-9) & (series.times <= start + length + 1e-9)
    if not np.any(mask):
        raise InvalidWindowError("averaging window contains no samples")
    return float(series.values[mask].mean())


def default_beta_grid(jalpha: float, points: int = 40, anchors=(20.0, 60.0)) -> np.ndarray:
    """Log-spaced Jbeta grid over [jalpha/10, 10 jalpha] plus fixed anchors."""
    if jalpha <= 0:
        raise InvalidParameterError(f"jalpha must be positive, got {jalpha}")
    grid = np.geomspace(jalpha / 10.0, jalpha * 10.0, points)
    return np.unique(np.concatenate([grid, np.asarray(anchors, dtype=float)]))


def canonical_anchor(graph: BondGraph, jalpha: float, protocol: Protocol) -> float:
    if protocol.canonical_beta > 0:
        return protocol.canonical_beta
    return ANCHOR_MULTIPLIER.get(graph.geometry_tag, 1.0) * jalpha


def canonical_beta_grid(graph: BondGraph, jalpha: float, protocol: Protocol) -> np.ndarray:
    if protocol.canonical_mode == "anchor":
        return np.array([canonical_anchor(graph, jalpha, protocol)])
    if protocol.canonical_mode == "grid":
        return default_beta_grid(jalpha, protocol.beta_points, protocol.beta_anchors)
    raise InvalidParameterError(f"unknown canonical_mode {protocol.canonical_mode!r}")


def canonical_max(measure_fn, spec_final, beta_grid, pair):
    """Maximum of a two-site measure over Gibbs states on a Jbeta grid.

    ``measure_fn`` maps a 4x4 density matrix to a float. Ties keep the
    first grid point. Returns (value, argmax_beta).
    """
    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.size == 0 or np.any(beta_grid <= 0):
        raise InvalidParameterError("beta_grid must be nonempty and positive")
    best_val, best_beta = -np.inf, None
    for beta in beta_grid:
        val = measure_fn(gibbs_two_site(spec_final, beta, pair))
        if val > best_val:
            best_val, best_beta = val, float(beta)
    return best_val, best_beta


@dataclass(frozen=True)
class ErgodicityReport:
    """Score and provenance for one parameter point and one measure."""

    measure: str
    gamma: float
    delta: float
    a: float
    jalpha: float
    geometry_tag: str
    dims: tuple
    pair: tuple
    q_time_avg: float
    q_can_max: float
    argmax_beta: float
    score: float
    classification: str
    opt_converged: bool
    beta_grid_used: tuple
    protocol: Protocol
    notes: tuple = ()


@dataclass(frozen=True)
class PipelineStates:
    times: tuple
    evolved: np.ndarray          # (T, 4, 4)
    beta_grid: tuple
    canonical: np.ndarray        # (B, 4, 4)
    pair: tuple


@functools.lru_cache(maxsize=48)
def _pipeline_states(
    graph: BondGraph, gamma: float, delta: float, a: float, jalpha: float, protocol: Protocol
) -> PipelineStates:
    """Two-site states of the evolved window series and the canonical grid.

    Cached so that several measures (or repeated transition scans) share
    one diagonalization and one evolution per parameter point.
    """
    pair = graph.default_pair(protocol.pair)
    spec_init = spectral_decompose(
        build_hamiltonian(graph, ModelParams(gamma, delta, field=a))
    )
    spec_final = spectral_decompose(
        build_hamiltonian(graph, ModelParams(gamma, delta, field=0.0))
    )
    times = protocol.window_times()
    evolved = evolved_two_site_series(
        spec_final, spec_init, jalpha, pair, times, tail_mass=protocol.tail_mass
    )
    beta_grid = canonical_beta_grid(graph, jalpha, protocol)
    canonical = np.stack([gibbs_two_site(spec_final, b, pair) for b in beta_grid])
    return PipelineStates(tuple(times), evolved, tuple(beta_grid), canonical, pair)


def clear_pipeline_cache():
    _pipeline_states.cache_clear()


def ergodicity_score(
    params: ModelParams,
    graph: BondGraph,
    measure: str,
    jalpha: float,
    protocol: Protocol = Protocol(),
) -> ErgodicityReport:
    """Full pipeline for one parameter point: build, equilibrate, quench,
    average the measure over the late-time window, compare with the
    canonical value, and report eta = max(0, average - canonical).

    ``params.field`` is the pre-quench field a; the evolution Hamiltonian
    has the field switched off.
    """
    if jalpha <= 0 or not np.isfinite(jalpha):
        raise InvalidParameterError(f"jalpha must be positive and finite, got {jalpha}")
    if measure not in MEASURES:
        raise InvalidParameterError(f"unknown measure {measure!r}")
    states = _pipeline_states(graph, params.gamma, params.delta, params.field, jalpha, protocol)
    fn = MEASURES[measure]

    converged = True
    values = np.empty(len(states.times))
    for k, rho in enumerate(states.evolved):
        mv = fn(rho, protocol.opt)
        values[k] = mv.value
        if mv.report is not None and not mv.report.converged:
            converged = False
    series = TimeSeries(np.asarray(states.times), values, protocol.t_large)
    avg = time_average(series)

    best_val, best_beta = -np.inf, None
    for beta, rho in zip(states.beta_grid, states.canonical):
        mv = fn(rho, protocol.opt)
        if mv.report is not None and not mv.report.converged:
            converged = False
        if mv.value > best_val:
            best_val, best_beta = mv.value, float(beta)

    notes = ()
    if graph.geometry_tag == "torus":
        notes = (f"torus aspect ratio {graph.dims[0]}x{graph.dims[1]} taken from input",)
    return ErgodicityReport(
        measure=measure,
        gamma=params.gamma,
        delta=params.delta,
        a=params.field,
        jalpha=jalpha,
        geometry_tag=graph.geometry_tag,
        dims=graph.dims,
        pair=states.pair,
        q_time_avg=avg,
        q_can_max=best_val,
        argmax_beta=best_beta,
        score=max(0.0, avg - best_val),
        classification=series.classification,
        opt_converged=converged,
        beta_grid_used=states.beta_grid,
        protocol=protocol,
        notes=notes,
    )


@dataclass(frozen=True)
class TransitionResult:
    """Outcome of a delta_c scan; ``found`` is False when no crossing exists."""

    measure: str
    gamma: float
    a: float
    delta_c: float
    found: bool
    bracket: tuple
    scan: tuple
    resolution: float


def _locate_crossing(eval_eta, lo, hi, scan_points, resolution, threshold):
    """Coarse scan for the last downward threshold crossing, then bisection.

    Returns (delta_c, found, bracket, scan) where scan is the list of
    (delta, eta) pairs evaluated on the coarse grid.
    """
    deltas = np.linspace(lo, hi, scan_points)
    etas = [eval_eta(float(d)) for d in deltas]
    scan = tuple((float(d), float(e)) for d, e in zip(deltas, etas))

    below = [e <= threshold for e in etas]
    m = None
    for k in range(len(deltas)):
        if below[k] and all(below[k:]):
            m = k
            break
    if m is None or m == 0:
        return None, False, None, scan

    blo, bhi = float(deltas[m - 1]), float(deltas[m])
    while bhi - blo > resolution:
        mid = 0.5 * (blo + bhi)
        if eval_eta(mid) > threshold:
            blo = mid
        else:
            bhi = mid
    return bhi, True, (blo, bhi), scan


def find_transition(
    gamma: float,
    a: float,
    graph: BondGraph,
    measure: str,
    delta_range: tuple,
    resolution: float,
    jalpha: float = 20.0,
    protocol: Protocol = Protocol(),
    scan_points: int = 5,
) -> TransitionResult:
    """Smallest zz-strength above which the score stays below threshold.

    The range must span both regimes; when every scanned point is on one
    side of the threshold the result is reported as not found rather
    than raised.
    """
    lo, hi = float(delta_range[0]), float(delta_range[1])
    if not (hi > lo and resolution > 0):
        raise InvalidParameterError("need delta_range[1] > delta_range[0] and resolution > 0")

    def eval_eta(delta: float) -> float:
        report = ergodicity_score(
            ModelParams(gamma, delta, field=a), graph, measure, jalpha, protocol
        )
        return report.score

    delta_c, found, bracket, scan = _locate_crossing(
        eval_eta, lo, hi, scan_points, resolution, protocol.zero_threshold
    )
    return TransitionResult(
        measure=measure,
        gamma=gamma,
        a=a,
        delta_c=delta_c if found else float("nan"),
        found=found,
        bracket=bracket,
        scan=scan,
        resolution=resolution,
    )
