"""Config parsing, sweep orchestration, and CSV/manifest emission.

Three subcommands map onto the three kinds of outputs: ``equilibrium``
(measure over Jbeta x delta grids), ``evolve`` (measure time series),
and ``ergodicity`` (score sweeps and delta_c searches).

Config files are flat ``key = value`` text. Values are numbers, bare
words, booleans (``true``/``false``), lists ``[a, b, c]``, or inclusive
ranges ``range(start, stop, step)``. ``#`` starts a comment.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import __version__
from .dynamics import evolved_two_site_series, gibbs_two_site
from .ergodicity import (
    Protocol,
    canonical_beta_grid,
    default_beta_grid,
    ergodicity_score,
    find_transition,
)
from .exceptions import (
    ConfigError,
    ConfigSemanticError,
    ConfigSyntaxError,
    SpinErgoError,
)
from .lattice import GEOMETRIES, build_ladder, build_ring, build_torus
from .operators import ModelParams, build_hamiltonian, spectral_decompose
from .qcorr import MEASURES, OptimizerConfig

CSV_FORMAT_VERSION = 1

_MODES = ("equilibrium", "evolve", "ergodicity")

_KNOWN_KEYS = {
    "geometry", "dims", "pair", "gamma", "delta", "a", "jalpha", "measures",
    "beta", "field", "transition", "delta_range", "resolution", "scan_points",
    "t_max", "t_step", "t_large", "canonical_mode", "canonical_beta",
    "beta_points", "beta_anchors", "zero_threshold", "tail_mass",
    "opt_grid_theta", "opt_grid_phi", "opt_refine_tol", "opt_max_steps",
    "threads",
}


@dataclass
class RunConfig:
    """Validated run parameters with defaults applied."""

    geometry: str = ""
    dims: tuple = ()
    pair: str = "auto"
    gamma: tuple = ()
    delta: tuple = ()
    a: tuple = ()
    jalpha: float = 20.0
    measures: tuple = ()
    beta: tuple = ()
    field: float = 0.0
    transition: bool = False
    delta_range: tuple = ()
    resolution: float = 0.05
    scan_points: int = 5
    t_max: float = 300.0
    t_step: float = 0.1
    t_large: float = 100.0
    canonical_mode: str = "anchor"
    canonical_beta: float = 0.0
    beta_points: int = 40
    beta_anchors: tuple = (20.0, 60.0)
    zero_threshold: float = 1e-4
    tail_mass: float = 1e-12
    opt_grid_theta: int = 65
    opt_grid_phi: int = 129
    opt_refine_tol: float = 1e-9
    opt_max_steps: int = 200
    threads: int = 1

    def protocol(self) -> Protocol:
        return Protocol(
            t_max=self.t_max,
            t_step=self.t_step,
            t_large=self.t_large,
            canonical_mode=self.canonical_mode,
            canonical_beta=self.canonical_beta,
            beta_points=self.beta_points,
            beta_anchors=self.beta_anchors,
            zero_threshold=self.zero_threshold,
            tail_mass=self.tail_mass,
            pair=self.pair,
            opt=OptimizerConfig(
                grid_theta=self.opt_grid_theta,
                grid_phi=self.opt_grid_phi,
                refine_fatol=self.opt_refine_tol,
                max_refine_steps=self.opt_max_steps,
            ),
        )

    def graph(self):
        if self.geometry == "ring":
            return build_ring(self.dims[0])
        if self.geometry == "ladder":
            return build_ladder(self.dims[1])
        return build_torus(self.dims[0], self.dims[1])


@dataclass(frozen=True)
class ResultRow:
    """One CSV record of an ergodicity-score sweep."""

    geometry: str
    dims: tuple
    gamma: float
    delta: float
    a: float
    jalpha: float
    measure: str
    q_time_avg: float
    q_can_max: float
    argmax_jbeta: float
    score: float
    flags: str


# ---------------------------------------------------------------------------
# Config text parsing
# ---------------------------------------------------------------------------


def _parse_scalar(token: str):
    word = token.strip()
    if word in ("true", "false"):
        return word == "true"
    try:
        return int(word)
    except ValueError:
        pass
    try:
        return float(word)
    except ValueError:
        pass
    return word


def _parse_value(raw: str, line_no: int):
    raw = raw.strip()
    if not raw:
        raise ConfigSyntaxError(line_no, "missing value")
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigSyntaxError(line_no, "unterminated list")
        body = raw[1:-1].strip()
        if not body:
            return ()
        return tuple(_parse_scalar(t) for t in body.split(","))
    if raw.startswith("range("):
        if not raw.endswith(")"):
            raise ConfigSyntaxError(line_no, "unterminated range")
        parts = [t.strip() for t in raw[len("range("):-1].split(",")]
        if len(parts) != 3:
            raise ConfigSyntaxError(line_no, "range needs (start, stop, step)")
        vals = []
        for p in parts:
            v = _parse_scalar(p)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigSyntaxError(line_no, f"range argument {p!r} is not a number")
            vals.append(float(v))
        return ("range", vals[0], vals[1], vals[2])
    return _parse_scalar(raw)


def _expand_axis(key: str, value) -> tuple:
    """Normalize a scalar, list, or range spec into a tuple of floats."""
    if isinstance(value, tuple) and value and value[0] == "range":
        start, stop, step = value[1:]
        if step <= 0:
            raise ConfigSemanticError(key, f"range step must be positive, got {step}")
        if stop < start:
            raise ConfigSemanticError(key, "range stop is below start")
        n = int(np.floor((stop - start) / step + 0.5)) + 1
        return tuple(float(start + step * k) for k in range(n))
    if isinstance(value, tuple):
        out = []
        for v in value:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ConfigSemanticError(key, f"non-numeric entry {v!r}")
            out.append(float(v))
        if not out:
            raise ConfigSemanticError(key, "empty sweep range")
        return tuple(out)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    raise ConfigSemanticError(key, f"expected a number, list, or range, got {value!r}")


def _require_number(key: str, value, cast=float):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigSemanticError(key, f"expected a number, got {value!r}")
    return cast(value)


def parse_config(text: str) -> RunConfig:
    """Parse and validate flat key-value config text."""
    entries = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigSyntaxError(line_no, f"expected 'key = value', got {body!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigSyntaxError(line_no, "empty key")
        if key not in _KNOWN_KEYS:
            raise ConfigSemanticError(key, "unknown key")
        if key in entries:
            raise ConfigSemanticError(key, "duplicate key")
        entries[key] = _parse_value(raw, line_no)

    cfg = RunConfig()

    axis_keys = ("gamma", "delta", "a", "beta")
    for key, value in entries.items():
        if key in axis_keys:
            setattr(cfg, key, _expand_axis(key, value))
        elif key in ("geometry", "pair", "canonical_mode"):
            if not isinstance(value, str):
                raise ConfigSemanticError(key, f"expected a word, got {value!r}")
            setattr(cfg, key, value)
        elif key == "measures":
            if not isinstance(value, tuple) or not value:
                raise ConfigSemanticError(key, "expected a nonempty list")
            for m in value:
                if m not in MEASURES:
                    raise ConfigSemanticError(
                        key, f"unknown measure {m!r}; known: {sorted(MEASURES)}"
                    )
            cfg.measures = tuple(value)
        elif key == "dims":
            if not isinstance(value, tuple) or not value:
                raise ConfigSemanticError(key, "expected a nonempty list of integers")
            if any(not isinstance(v, int) for v in value):
                raise ConfigSemanticError(key, "dims entries must be integers")
            cfg.dims = tuple(int(v) for v in value)
        elif key in ("delta_range", "beta_anchors"):
            if not isinstance(value, tuple) or len(value) != 2:
                raise ConfigSemanticError(key, "expected a list of two numbers")
            setattr(cfg, key, tuple(float(v) for v in value))
        elif key == "transition":
            if not isinstance(value, bool):
                raise ConfigSemanticError(key, f"expected true/false, got {value!r}")
            cfg.transition = value
        elif key in ("scan_points", "beta_points", "opt_grid_theta", "opt_grid_phi",
                     "opt_max_steps", "threads"):
            setattr(cfg, key, _require_number(key, value, int))
        else:
            setattr(cfg, key, _require_number(key, value, float))

    _validate_config(cfg, entries)
    return cfg


def _validate_config(cfg: RunConfig, entries: dict):
    for key in ("geometry", "dims", "measures"):
        if not getattr(cfg, key):
            raise ConfigSemanticError(key, "required key is missing")
    if cfg.geometry not in GEOMETRIES:
        raise ConfigSemanticError("geometry", f"must be one of {GEOMETRIES}")
    shapes = {"ring": 1, "ladder": 2, "torus": 2}
    if len(cfg.dims) != shapes[cfg.geometry]:
        raise ConfigSemanticError(
            "dims", f"{cfg.geometry} needs {shapes[cfg.geometry]} dimension(s)"
        )
    if cfg.geometry == "ladder" and cfg.dims[0] != 2:
        raise ConfigSemanticError("dims", "ladder dims are [2, L]")
    if cfg.pair not in ("auto", "rail", "rung"):
        raise ConfigSemanticError("pair", "must be auto, rail, or rung")
    if cfg.jalpha <= 0:
        raise ConfigSemanticError("jalpha", "must be positive")
    if cfg.threads < 1:
        raise ConfigSemanticError("threads", "must be >= 1")
    if cfg.t_step <= 0 or cfg.t_max <= cfg.t_large or cfg.t_large < 0:
        raise ConfigSemanticError("t_max", "need 0 <= t_large < t_max and t_step > 0")


def _check_mode_keys(cfg: RunConfig, mode: str):
    def need(key):
        if not getattr(cfg, key):
            raise ConfigSemanticError(key, f"required for mode '{mode}'")

    def forbid(key, why):
        if getattr(cfg, key):
            raise ConfigSemanticError(key, why)

    need("gamma")
    if mode == "equilibrium":
        need("delta")
        need("beta")
        forbid("a", "not used in equilibrium mode")
        forbid("transition", "transition search belongs to the ergodicity mode")
    elif mode == "evolve":
        need("delta")
        need("a")
        forbid("beta", "beta grids belong to the equilibrium mode")
        forbid("transition", "transition search belongs to the ergodicity mode")
        if cfg.field:
            raise ConfigSemanticError("field", "only used in equilibrium mode")
    else:
        need("a")
        forbid("beta", "beta grids belong to the equilibrium mode")
        if cfg.field:
            raise ConfigSemanticError("field", "only used in equilibrium mode")
        if cfg.transition:
            if not cfg.delta_range:
                raise ConfigSemanticError("delta_range", "required when transition = true")
            if cfg.delta:
                raise ConfigSemanticError(
                    "delta", "use delta_range instead of delta when transition = true"
                )
        else:
            need("delta")


# ---------------------------------------------------------------------------
# Sweep drivers
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _dims_str(dims) -> str:
    return "x".join(str(d) for d in dims)


def _run_points(points, worker, threads):
    """Evaluate sweep points, collecting per-point failures without aborting."""
    rows, failures = [], []

    def run_one(pt):
        try:
            return worker(pt), None
        except Exception as exc:                      # noqa: BLE001 - recorded per point
            return None, (pt, f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, points))
    else:
        outcomes = [run_one(pt) for pt in points]
    for out, fail in outcomes:
        if fail is not None:
            failures.append({"point": repr(fail[0]), "error": fail[1]})
            print(f"warning: point {fail[0]} failed: {fail[1]}", file=sys.stderr)
        else:
            rows.extend(out)
    return rows, failures


def _equilibrium_rows(cfg: RunConfig, threads: int):
    graph = cfg.graph()
    pair = graph.default_pair(cfg.pair)
    protocol = cfg.protocol()
    points = [(g, d) for g in cfg.gamma for d in cfg.delta]

    def worker(point):
        g, d = point
        spec = spectral_decompose(
            build_hamiltonian(graph, ModelParams(g, d, field=cfg.field))
        )
        out = []
        for beta in cfg.beta:
            rho = gibbs_two_site(spec, beta, pair)
            for measure in cfg.measures:
                mv = MEASURES[measure](rho, protocol.opt)
                flags = ""
                if mv.report is not None and not mv.report.converged:
                    flags = "opt_nonconverged"
                out.append((graph.geometry_tag, _dims_str(graph.dims), g, d,
                            cfg.field, beta, measure, mv.value, flags))
        return out

    rows, failures = _run_points(points, worker, threads)
    rows.sort(key=lambda r: (r[2], r[3], r[5], r[6]))
    header = "geometry,dims,gamma,delta,field,jbeta,measure,value,flags"
    return rows, failures, header


def _evolve_rows(cfg: RunConfig, threads: int):
    graph = cfg.graph()
    pair = graph.default_pair(cfg.pair)
    protocol = cfg.protocol()
    times = protocol.full_times()
    points = [(g, d, a) for g in cfg.gamma for d in cfg.delta for a in cfg.a]

    def worker(point):
        g, d, a = point
        spec_init = spectral_decompose(build_hamiltonian(graph, ModelParams(g, d, field=a)))
        spec_final = spectral_decompose(build_hamiltonian(graph, ModelParams(g, d, field=0.0)))
        states = evolved_two_site_series(
            spec_final, spec_init, cfg.jalpha, pair, times, tail_mass=protocol.tail_mass
        )
        out = []
        for measure in cfg.measures:
            fn = MEASURES[measure]
            for t, rho in zip(times, states):
                mv = fn(rho, protocol.opt)
                flags = ""
                if mv.report is not None and not mv.report.converged:
                    flags = "opt_nonconverged"
                out.append((graph.geometry_tag, _dims_str(graph.dims), g, d, a,
                            cfg.jalpha, measure, float(t), mv.value, flags))
        return out

    rows, failures = _run_points(points, worker, threads)
    rows.sort(key=lambda r: (r[2], r[3], r[4], r[6], r[7]))
    header = "geometry,dims,gamma,delta,a,jalpha,measure,t,value,flags"
    return rows, failures, header


def _score_rows(cfg: RunConfig, threads: int):
    graph = cfg.graph()
    protocol = cfg.protocol()
    points = [(g, d, a) for g in cfg.gamma for d in cfg.delta for a in cfg.a]

    def worker(point):
        g, d, a = point
        out = []
        for measure in cfg.measures:
            rep = ergodicity_score(
                ModelParams(g, d, field=a), graph, measure, cfg.jalpha, protocol
            )
            flags = f"class={rep.classification}"
            if not rep.opt_converged:
                flags += ";opt_nonconverged"
            out.append(ResultRow(
                rep.geometry_tag, rep.dims, g, d, a, cfg.jalpha, measure,
                rep.q_time_avg, rep.q_can_max, rep.argmax_beta, rep.score, flags,
            ))
        return out

    rows, failures = _run_points(points, worker, threads)
    rows.sort(key=lambda r: (r.gamma, r.delta, r.a, r.measure))
    header = ("geometry,dims,gamma,delta,a,jalpha,measure,"
              "q_time_avg,q_can_max,argmax_jbeta,score,flags")
    tuples = [
        (r.geometry, _dims_str(r.dims), r.gamma, r.delta, r.a, r.jalpha, r.measure,
         r.q_time_avg, r.q_can_max, r.argmax_jbeta, r.score, r.flags)
        for r in rows
    ]
    return rows, tuples, failures, header


def _transition_rows(cfg: RunConfig, threads: int):
    graph = cfg.graph()
    protocol = cfg.protocol()
    points = [(g, a) for g in cfg.gamma for a in cfg.a]

    def worker(point):
        g, a = point
        out = []
        for measure in cfg.measures:
            res = find_transition(
                g, a, graph, measure, cfg.delta_range, cfg.resolution,
                cfg.jalpha, protocol, cfg.scan_points,
            )
            lo, hi = res.bracket if res.bracket else (float("nan"), float("nan"))
            out.append((graph.geometry_tag, _dims_str(graph.dims), g, a, cfg.jalpha,
                        measure, res.delta_c, res.found, lo, hi, cfg.resolution))
        return out

    rows, failures = _run_points(points, worker, threads)
    rows.sort(key=lambda r: (r[2], r[3], r[5]))
    header = ("geometry,dims,gamma,a,jalpha,measure,"
              "delta_c,found,bracket_lo,bracket_hi,resolution")
    return rows, failures, header


def _write_csv(path, mode: str, header: str, row_tuples):
    lines = [f"# spinergo csv v{CSV_FORMAT_VERSION} mode={mode}", header]
    for row in row_tuples:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path, cfg: RunConfig, mode: str, header: str, failures, config_text: str):
    graph = cfg.graph()
    protocol = cfg.protocol()
    manifest = {
        "format_version": CSV_FORMAT_VERSION,
        "package_version": __version__,
        "mode": mode,
        "config_text": config_text,
        "resolved_config": asdict(cfg),
        "protocol": asdict(protocol),
        "csv_columns": header.split(","),
        "canonical_beta_grid": list(canonical_beta_grid(graph, cfg.jalpha, protocol)),
        "log_beta_grid": list(default_beta_grid(cfg.jalpha, cfg.beta_points, cfg.beta_anchors)),
        "pair": list(graph.default_pair(cfg.pair)),
        "notes": (
            [f"torus aspect ratio {_dims_str(cfg.dims)} taken from config; the source "
             "figures do not state one"]
            if cfg.geometry == "torus" else []
        ),
        "failures": failures,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_sweep(cfg: RunConfig, mode: str, out_dir, threads: int = None, config_text: str = ""):
    """Execute one sweep and emit ``<mode>.csv`` plus ``manifest.json``.

    Returns the result rows (ResultRow objects in ergodicity score mode,
    plain tuples otherwise).
    """
    from pathlib import Path

    if mode not in _MODES:
        raise ConfigSemanticError("mode", f"unknown mode {mode!r}")
    _check_mode_keys(cfg, mode)
    threads = threads or cfg.threads

    if mode == "equilibrium":
        tuples, failures, header = _equilibrium_rows(cfg, threads)
        rows = tuples
    elif mode == "evolve":
        tuples, failures, header = _evolve_rows(cfg, threads)
        rows = tuples
    elif cfg.transition:
        tuples, failures, header = _transition_rows(cfg, threads)
        rows = tuples
    else:
        rows, tuples, failures, header = _score_rows(cfg, threads)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / f"{mode}.csv", mode, header, tuples)
    _write_manifest(out / "manifest.json", cfg, mode, header, failures, config_text)
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spin-ergo",
        description="Ergodicity of quantum correlations in quenched XYZ spin lattices",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, blurb in (
        ("equilibrium", "measures of the Gibbs state over Jbeta/delta grids"),
        ("evolve", "measure time series of the quenched state"),
        ("ergodicity", "ergodicity-score sweeps and delta_c searches"),
    ):
        p = sub.add_parser(mode, help=blurb)
        p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--threads", type=int, default=None, help="worker pool size")
    args = parser.parse_args(argv)

    try:
        config_text = open(args.config).read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(config_text)
        run_sweep(cfg, args.mode, args.out, args.threads, config_text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SpinErgoError, OSError, Exception) as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
