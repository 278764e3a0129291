"""Configuration-driven Monte Carlo sweep over source separations.

For every separation on the grid and every enabled method the harness
simulates independent acquisitions, estimates the separation, and
aggregates the estimator statistics, normalized by the quantum bound.
Alongside the simulated points it emits the reference curves: the
constant quantum bound, the camera bound from the pixelated Fisher
information, and the projection bound from the binary-outcome Fisher
information.

Trials are embarrassingly parallel: trial (method, delta index, trial
index) maps to a fixed counter-based random stream, so results are
byte-identical for any worker count.
"""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import __version__
from .errors import DataError, ParameterError
from .estimators import (METHOD_DIRECT, METHOD_PROJECTION, aggregate,
                         estimate_direct_mle, estimate_from_projection)
from .fisher import pixelated_classical_fisher, quantum_fisher
from .modes import ProbabilityCurves, binary_outcome_fisher
from .numerics import RngStream
from .psf import make_gaussian, make_sinc
from .simulate import (EmccdParams, SceneConfig, default_ccd_edges,
                       simulate_ccd, simulate_projection)

WORKERS_ENV = "SPADESIM_WORKERS"

_METHOD_ORDER = (METHOD_PROJECTION, METHOD_DIRECT)

# Default grids in width units: steps of 0.2 for the Gaussian and 0.067
# for the sinc, up to the order of the Rayleigh limit.
_DEFAULT_GRID = {
    "gaussian": (0.2, 2.0, 0.2),
    "sinc": (0.067, 1.005, 0.067),
}


@dataclass(frozen=True)
class SweepConfig:
    psf_kind: str
    psf_width: float
    delta_start: Optional[float] = None   # in width units
    delta_stop: Optional[float] = None
    delta_step: Optional[float] = None
    n_trials: int = 500
    photon_budget: int = 100_000
    photon_model: str = "poisson"
    methods: tuple = (METHOD_PROJECTION, METHOD_DIRECT)
    seed: int = 12345
    emccd: Optional[EmccdParams] = None
    ccd_pixels: Optional[int] = None
    ccd_halfwidth: Optional[float] = None  # in width units
    dump_trials: bool = False

    def __post_init__(self):
        if self.psf_kind not in _DEFAULT_GRID:
            raise ParameterError(
                f"psf_kind must be one of {sorted(_DEFAULT_GRID)}, got {self.psf_kind!r}")
        if not self.psf_width > 0:
            raise ParameterError("psf_width must be positive")
        defaults = _DEFAULT_GRID[self.psf_kind]
        for name, value in zip(("delta_start", "delta_stop", "delta_step"),
                               defaults):
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if not (self.delta_start > 0 and self.delta_step > 0
                and self.delta_stop >= self.delta_start):
            raise ParameterError("delta grid must be positive and increasing")
        if self.n_trials < 2:
            raise ParameterError("n_trials must be at least 2")
        if self.photon_budget < 1:
            raise ParameterError("photon_budget must be at least 1")
        if self.photon_model not in ("fixed", "poisson"):
            raise ParameterError(
                f"photon_model must be 'fixed' or 'poisson', got {self.photon_model!r}")
        if not self.methods:
            raise ParameterError("at least one method must be enabled")
        bad = [m for m in self.methods if m not in _METHOD_ORDER]
        if bad:
            raise ParameterError(f"unknown methods {bad}; choose from {_METHOD_ORDER}")
        if len(set(self.methods)) != len(self.methods):
            raise ParameterError("methods must not repeat")

    def build_psf(self):
        if self.psf_kind == "gaussian":
            return make_gaussian(self.psf_width)
        return make_sinc(self.psf_width)

    def deltas(self) -> tuple:
        """Absolute separations of the sweep grid."""
        out = []
        k = 0
        while True:
            step = self.delta_start + k * self.delta_step
            if step > self.delta_stop + 1e-9:
                break
            out.append(step * self.psf_width)
            k += 1
        return tuple(out)


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    quantum_fi: float
    qcrlb_per_photon: float
    qcrlb: float                      # at the configured photon budget
    stats: tuple                      # ((method, SweepStats), ...) in output order
    provenance: dict
    trials: Optional[tuple] = None    # ((method, delta, EstimateRecord), ...)


def _stream_base(config: SweepConfig, method: str, delta_index: int) -> int:
    n_deltas = len(config.deltas())
    return (_METHOD_ORDER.index(method) * n_deltas + delta_index) * config.n_trials


def _run_cell(args):
    """All trials for one (method, separation) cell; run in a worker."""
    config, method, idx = args
    psf = config.build_psf()
    delta = config.deltas()[idx]
    fq = quantum_fisher(psf)
    qcrlb_n = 1.0 / (config.photon_budget * fq)
    scene = SceneConfig(delta_true=delta, psf=psf,
                        photon_budget=config.photon_budget,
                        photon_model=config.photon_model)
    base = _stream_base(config, method, idx)

    records = []
    if method == METHOD_PROJECTION:
        curves = ProbabilityCurves(psf)
        probs = curves.probabilities(delta)
        for t in range(config.n_trials):
            rng = RngStream(config.seed, base + t)
            outcome = simulate_projection(scene, probs, config.emccd, rng)
            records.append(estimate_from_projection(outcome, psf, curves, trial_id=t))
        crlb_ratio = fq / binary_outcome_fisher(psf, delta, curves)
    else:
        edges = default_ccd_edges(psf, config.ccd_pixels, config.ccd_halfwidth)
        for t in range(config.n_trials):
            rng = RngStream(config.seed, base + t)
            frame = simulate_ccd(scene, edges, rng)
            records.append(estimate_direct_mle(frame, psf, trial_id=t))
        pixel_width = float(edges[1] - edges[0])
        fi_pix = pixelated_classical_fisher(psf, delta, pixel_width, len(edges) - 1)
        crlb_ratio = fq / fi_pix

    stats = aggregate(records, delta, qcrlb_n).with_crlb_ratio(crlb_ratio)
    return method, idx, stats, (records if config.dump_trials else None)


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is not None:
        return max(int(workers), 1)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(int(env), 1)
        except ValueError as exc:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
    return min(4, os.cpu_count() or 1)


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> SweepResult:
    """Run the full sweep and collect per-cell statistics in grid order."""
    deltas = config.deltas()
    if not deltas:
        raise ParameterError("empty separation grid")
    jobs = [(config, method, idx)
            for method in config.methods
            for idx in range(len(deltas))]

    n_workers = resolve_workers(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]

    psf = config.build_psf()
    fq = quantum_fisher(psf)
    stats = tuple((method, cell_stats) for method, _, cell_stats, _ in results)
    trials = None
    if config.dump_trials:
        trials = tuple((method, deltas[idx], rec)
                       for method, idx, _, recs in results
                       for rec in recs)

    emccd_prov = asdict(config.emccd) if config.emccd is not None else None
    provenance = {
        "package": "spadesim",
        "version": __version__,
        "created_unix": time.time(),
        "seed": config.seed,
        "config": {**asdict(config), "emccd": emccd_prov},
        "delta_grid": list(deltas),
        "quantum_fisher_per_photon": fq,
        "qcrlb_per_photon": 1.0 / fq,
        "qcrlb_at_budget": 1.0 / (config.photon_budget * fq),
    }
    return SweepResult(config=config, quantum_fi=fq,
                       qcrlb_per_photon=1.0 / fq,
                       qcrlb=1.0 / (config.photon_budget * fq),
                       stats=stats, provenance=provenance, trials=trials)


CSV_HEADER = ("method,delta_true,n_trials,mean,std,bias,mse,"
              "mse_over_qcrlb,crlb_ratio,clamp_count")


def _fmt(value: float) -> str:
    # shortest decimal that round-trips
    return repr(float(value))


def sweep_csv(result: SweepResult) -> str:
    lines = [CSV_HEADER]
    for method, s in result.stats:
        lines.append(
            f"{method},{_fmt(s.delta_true)},{s.n_trials},{_fmt(s.mean)},"
            f"{_fmt(s.std)},{_fmt(s.bias)},{_fmt(s.mse)},"
            f"{_fmt(s.mse_over_qcrlb)},{_fmt(s.crlb_ratio)},{s.clamp_count}")
    return "\n".join(lines) + "\n"


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(sweep_csv(result))


def write_provenance(result: SweepResult, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(result.provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trials_csv(result: SweepResult, path) -> None:
    if result.trials is None:
        raise DataError("sweep was run without dump_trials")
    with open(path, "w", newline="\n") as fh:
        fh.write("method,delta_true,trial_id,delta_hat,clamped\n")
        for method, delta, rec in result.trials:
            fh.write(f"{method},{_fmt(delta)},{rec.trial_id},"
                     f"{_fmt(rec.delta_hat)},{int(rec.clamped)}\n")


def parse_config_text(text: str) -> SweepConfig:
    """Parse the flat key = value sweep configuration format.

    Lines are `key = value`; '#' starts a comment; no nesting.  Grid
    values are in units of the PSF width.
    """
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key or not value:
            raise DataError(f"config line {lineno}: empty key or value")
        if key in entries:
            raise DataError(f"config line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return _config_from_entries(entries)


def _parse_bool(value, key):
    lowered = value.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise DataError(f"config key {key!r}: expected a boolean, got {value!r}")


def _config_from_entries(entries: dict) -> SweepConfig:
    def pop_float(key, default=None):
        if key not in entries:
            return default
        value = entries.pop(key)
        try:
            return float(value)
        except ValueError as exc:
            raise DataError(f"config key {key!r}: expected a number, got {value!r}") from exc

    def pop_int(key, default=None):
        value = pop_float(key)
        if value is None:
            return default
        if value != int(value):
            raise DataError(f"config key {key!r}: expected an integer")
        return int(value)

    if "psf" not in entries:
        raise DataError("config is missing the 'psf' key")
    kind = entries.pop("psf").lower()
    width = pop_float("width")
    if width is None:
        raise DataError("config is missing the 'width' key")

    methods = tuple(m.strip() for m in
                    entries.pop("methods", "projection,direct").split(",") if m.strip())

    emccd = None
    gain = pop_float("emccd_gain")
    if gain is not None:
        emccd = EmccdParams(gain=gain,
                            readout_sigma=pop_float("emccd_readout_sigma", 0.0),
                            pixel_capacity=pop_float("emccd_pixel_capacity", 1e12))

    dump = entries.pop("dump_trials", None)
    config = SweepConfig(
        psf_kind=kind,
        psf_width=width,
        delta_start=pop_float("delta_start"),
        delta_stop=pop_float("delta_stop"),
        delta_step=pop_float("delta_step"),
        n_trials=pop_int("n_trials", 500),
        photon_budget=pop_int("photon_budget", 100_000),
        photon_model=entries.pop("photon_model", "poisson").lower(),
        methods=methods,
        seed=pop_int("seed", 12345),
        emccd=emccd,
        ccd_pixels=pop_int("ccd_pixels"),
        ccd_halfwidth=pop_float("ccd_halfwidth"),
        dump_trials=_parse_bool(dump, "dump_trials") if dump is not None else False,
    )
    if entries:
        raise DataError(f"unknown config keys: {sorted(entries)}")
    return config


def load_config(path) -> SweepConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
