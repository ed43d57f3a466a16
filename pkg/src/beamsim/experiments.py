"""Experiment runner: seeded, reproducible studies emitting CSV artifacts.

Four experiment kinds are supported: ``converge`` (mean power gain per
iteration), ``pep`` (Monte Carlo bounded-PEP curves per scheme), ``bler``
(block-error-rate curves per scheme) and ``overhead`` (training-slot
accounting).  Configurations are JSON documents with a versioned schema;
unknown keys are rejected so typos fail fast.  Every run writes its outputs
plus a ``manifest.json`` with per-file checksums, and reruns with the same
seed reproduce the checksums exactly, serial or parallel.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel import (
    ANGLE_MODE_UNIFORM,
    ANGLE_MODES,
    TX_MODE_PER_PATH,
    TX_MODES,
    ArrayConfig,
    ChannelEnsemble,
    sample_channel,
)
from .exceptions import ConfigError, SchemeInfeasibleError
from .ievd import TrainingBeamformer
from .linksim import LinkSimConfig, simulate_bler
from .metrics import (
    CSV_FLOAT_FORMAT,
    QPSK_MIN_DISTANCE,
    SnrGrid,
    _chunk_ranges,
    pep_monte_carlo,
)
from .schemes import SCHEME_CLASSES, make_scheme

SCHEMA_VERSION = 1
EXPERIMENTS = ("converge", "pep", "bler", "overhead")

_TOP_KEYS = {
    "schema_version",
    "experiment",
    "scenario",
    "schemes",
    "scheme_params",
    "snr_db",
    "samples",
    "samples_full_scale",
    "blocks",
    "blocks_full_scale",
    "min_distance",
    "converge",
    "link",
    "overhead",
}
_SCENARIO_KEYS = {"n_t", "n_r", "num_paths", "angle_mode", "transmit_angle_mode", "fixed_angles"}
_SNR_KEYS = {"start", "stop", "step"}
_CONVERGE_KEYS = {"path_counts", "powers", "iterations", "channels", "channels_full_scale"}
_LINK_KEYS = {"block_size", "zp_length"}
_OVERHEAD_KEYS = {"array_sizes", "iterations", "num_paths"}


def _check_keys(doc: dict, allowed: set, context: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{context} must be a JSON object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {context}")


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ConfigError(f"missing required key {key!r} in {context}")
    return doc[key]


def _as_int(value, context: str, minimum: int = 1) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{context} must be an integer >= {minimum}, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized experiment configuration."""

    data: dict

    @property
    def experiment(self) -> str:
        return self.data["experiment"]

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.data))

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)

    # -- parsed views ------------------------------------------------------

    def scenario(self, num_paths: int | None = None) -> ChannelEnsemble:
        sc = self.data["scenario"]
        fixed = sc.get("fixed_angles")
        return ChannelEnsemble(
            arrays=ArrayConfig(n_t=sc["n_t"], n_r=sc["n_r"]),
            num_paths=num_paths if num_paths is not None else sc["num_paths"][0],
            angle_mode=sc["angle_mode"],
            transmit_angle_mode=sc["transmit_angle_mode"],
            fixed_angles=tuple(tuple(pair) for pair in fixed) if fixed else None,
        )

    @property
    def path_counts(self) -> list[int]:
        if self.experiment == "converge":
            return list(self.data["converge"]["path_counts"])
        return list(self.data["scenario"]["num_paths"])

    @property
    def snr_grid(self) -> SnrGrid:
        spec = self.data["snr_db"]
        return SnrGrid.from_db_range(spec["start"], spec["stop"], spec["step"])

    def scheme_instance(self, name: str):
        return make_scheme(name, **self.data["scheme_params"].get(name, {}))

    def sample_count(self, full_scale: bool) -> int:
        if self.experiment == "pep":
            return self.data["samples_full_scale"] if full_scale else self.data["samples"]
        if self.experiment == "bler":
            return self.data["blocks_full_scale"] if full_scale else self.data["blocks"]
        if self.experiment == "converge":
            block = self.data["converge"]
            return block["channels_full_scale"] if full_scale else block["channels"]
        raise ConfigError(f"experiment {self.experiment!r} has no sample count")


def _normalize_scenario(doc: dict, *, require_paths: bool) -> dict:
    _check_keys(doc, _SCENARIO_KEYS, "scenario")
    out = {
        "n_t": _as_int(_require(doc, "n_t", "scenario"), "scenario.n_t"),
        "n_r": _as_int(_require(doc, "n_r", "scenario"), "scenario.n_r"),
        "angle_mode": doc.get("angle_mode", ANGLE_MODE_UNIFORM),
        "transmit_angle_mode": doc.get("transmit_angle_mode", TX_MODE_PER_PATH),
        "fixed_angles": doc.get("fixed_angles"),
    }
    if out["angle_mode"] not in ANGLE_MODES:
        raise ConfigError(f"scenario.angle_mode must be one of {ANGLE_MODES}")
    if out["transmit_angle_mode"] not in TX_MODES:
        raise ConfigError(f"scenario.transmit_angle_mode must be one of {TX_MODES}")
    if require_paths:
        raw = _require(doc, "num_paths", "scenario")
        counts = raw if isinstance(raw, list) else [raw]
        out["num_paths"] = [_as_int(c, "scenario.num_paths") for c in counts]
    else:
        raw = doc.get("num_paths", [])
        out["num_paths"] = [
            _as_int(c, "scenario.num_paths") for c in (raw if isinstance(raw, list) else [raw])
        ]
    return out


def _normalize_snr(doc: dict) -> dict:
    _check_keys(doc, _SNR_KEYS, "snr_db")
    out = {key: float(_require(doc, key, "snr_db")) for key in ("start", "stop", "step")}
    if out["step"] <= 0 or out["stop"] < out["start"]:
        raise ConfigError("snr_db must have positive step and stop >= start")
    return out


def normalize_config(doc: dict) -> ExperimentConfig:
    """Validate a raw JSON document and fill defaults; rejects unknown keys."""
    _check_keys(doc, _TOP_KEYS, "config")
    version = _require(doc, "schema_version", "config")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    experiment = _require(doc, "experiment", "config")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    out: dict = {"schema_version": SCHEMA_VERSION, "experiment": experiment}

    if experiment in ("converge", "pep", "bler"):
        out["scenario"] = _normalize_scenario(
            _require(doc, "scenario", "config"), require_paths=experiment != "converge"
        )

    if experiment in ("pep", "bler"):
        schemes = _require(doc, "schemes", "config")
        if not isinstance(schemes, list) or not schemes:
            raise ConfigError("schemes must be a non-empty list")
        for name in schemes:
            if name not in SCHEME_CLASSES:
                raise ConfigError(f"unknown scheme {name!r}; known: {sorted(SCHEME_CLASSES)}")
        out["schemes"] = list(schemes)
        params = doc.get("scheme_params", {})
        if not isinstance(params, dict):
            raise ConfigError("scheme_params must be an object")
        for name in params:
            if name not in SCHEME_CLASSES:
                raise ConfigError(f"scheme_params names unknown scheme {name!r}")
        out["scheme_params"] = params
        out["snr_db"] = _normalize_snr(_require(doc, "snr_db", "config"))
        out["min_distance"] = float(doc.get("min_distance", QPSK_MIN_DISTANCE))

    if experiment == "pep":
        out["samples"] = _as_int(_require(doc, "samples", "config"), "samples", minimum=100)
        out["samples_full_scale"] = _as_int(
            doc.get("samples_full_scale", 100_000), "samples_full_scale", minimum=100
        )
    if experiment == "bler":
        out["blocks"] = _as_int(_require(doc, "blocks", "config"), "blocks")
        out["blocks_full_scale"] = _as_int(
            doc.get("blocks_full_scale", 10_000_000), "blocks_full_scale"
        )
        link = doc.get("link", {})
        _check_keys(link, _LINK_KEYS, "link")
        out["link"] = {
            "block_size": _as_int(link.get("block_size", 32), "link.block_size"),
            "zp_length": _as_int(link.get("zp_length", 8), "link.zp_length"),
        }
    if experiment == "converge":
        block = _require(doc, "converge", "config")
        _check_keys(block, _CONVERGE_KEYS, "converge")
        out["converge"] = {
            "path_counts": [
                _as_int(c, "converge.path_counts")
                for c in _require(block, "path_counts", "converge")
            ],
            "powers": [
                _as_int(k, "converge.powers") for k in _require(block, "powers", "converge")
            ],
            "iterations": _as_int(block.get("iterations", 5), "converge.iterations"),
            "channels": _as_int(_require(block, "channels", "converge"), "converge.channels"),
            "channels_full_scale": _as_int(
                block.get("channels_full_scale", 100_000), "converge.channels_full_scale"
            ),
        }
        out["scheme_params"] = doc.get("scheme_params", {})
    if experiment == "overhead":
        block = _require(doc, "overhead", "config")
        _check_keys(block, _OVERHEAD_KEYS, "overhead")
        sizes = _require(block, "array_sizes", "overhead")
        if not isinstance(sizes, list) or not sizes:
            raise ConfigError("overhead.array_sizes must be a non-empty list of [n_t, n_r]")
        out["overhead"] = {
            "array_sizes": [[_as_int(a, "n_t"), _as_int(b, "n_r")] for a, b in sizes],
            "iterations": _as_int(block.get("iterations", 2), "overhead.iterations"),
            "num_paths": _as_int(block.get("num_paths", 4), "overhead.num_paths"),
        }

    return ExperimentConfig(data=out)


def load_config(source) -> ExperimentConfig:
    """Load and validate a config from a dict, a JSON string, or a path."""
    if isinstance(source, ExperimentConfig):
        return source
    if isinstance(source, dict):
        return normalize_config(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {source!r} is not valid JSON: {exc}") from exc
    return normalize_config(doc)


# ---------------------------------------------------------------------------
# manifest


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Record of one experiment run: config echo, output checksums, timing."""

    experiment: str
    config: dict
    seed: int
    full_scale: bool
    library_version: str
    outputs: dict
    elapsed_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "full_scale": self.full_scale,
            "library_version": self.library_version,
            "outputs": self.outputs,
            "elapsed_seconds": self.elapsed_seconds,
        }

    def write(self, out_dir: Path) -> Path:
        """Atomic write (temp file + rename) after all outputs exist."""
        path = Path(out_dir) / "manifest.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))
        os.replace(tmp, path)
        return path


def _finish_run(experiment, config, seed, full_scale, out_dir, files, started) -> RunManifest:
    manifest = RunManifest(
        experiment=experiment,
        config=config.to_dict(),
        seed=int(seed),
        full_scale=bool(full_scale),
        library_version=__version__,
        outputs={name: _sha256(Path(out_dir) / name) for name in sorted(files)},
        elapsed_seconds=time.perf_counter() - started,
    )
    manifest.write(Path(out_dir))
    return manifest


# ---------------------------------------------------------------------------
# converge


def _converge_rows(scenario, iterations, power, seed_key, start, stop):
    """Per-trial gain traces (iteration 0..N) for both iterative schemes.

    The two schemes are refit from identical per-trial streams, so they see
    the same channel and the same random initial weight pair.
    """
    from .ievd import IevdBeamformer

    rows_ievd = np.empty((stop - start, iterations + 1))
    rows_training = np.empty((stop - start, iterations + 1))
    ievd = IevdBeamformer(n_iterations=iterations)
    training = TrainingBeamformer(n_iterations=iterations, power=power)
    for trial in range(start, stop):
        for est, rows in ((ievd, rows_ievd), (training, rows_training)):
            rng = np.random.default_rng([*seed_key, trial])
            channel = sample_channel(scenario, rng)
            solution = est.fit(channel, rng=rng).solution_
            rows[trial - start, 0] = solution.initial_gain
            rows[trial - start, 1:] = solution.gain_trace
    return rows_ievd, rows_training


def run_converge(config: ExperimentConfig, seed: int, out_dir, *,
                 full_scale: bool = False, workers: int = 1) -> RunManifest:
    """Mean power gain versus iteration for every (L, K) cell.

    Iteration 0 reports the gain of the random initial weight pair (no
    beamforming yet); iteration n the gain after n full iterations.
    """
    started = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    block = config.data["converge"]
    channels = config.sample_count(full_scale)
    iterations = block["iterations"]
    files = []
    cell_index = 0
    for L in block["path_counts"]:
        for power in block["powers"]:
            scenario = config.scenario(num_paths=L)
            seed_key = [int(seed), cell_index]
            if workers <= 1:
                ievd_rows, training_rows = _converge_rows(
                    scenario, iterations, power, seed_key, 0, channels
                )
            else:
                ievd_rows = np.empty((channels, iterations + 1))
                training_rows = np.empty((channels, iterations + 1))
                ranges = _chunk_ranges(channels, workers * 4)
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    futures = [
                        pool.submit(_converge_rows, scenario, iterations, power, seed_key, a, b)
                        for a, b in ranges
                    ]
                    for (a, b), future in zip(ranges, futures):
                        ievd_rows[a:b], training_rows[a:b] = future.result()
            ievd_mean = ievd_rows.mean(axis=0)
            training_mean = training_rows.mean(axis=0)
            name = f"converge_L{L}_K{power}.csv"
            with open(out_dir / name, "w", newline="") as fh:
                fh.write("iteration,ievd_mean_gamma,training_mean_gamma\n")
                for it in range(iterations + 1):
                    fh.write(
                        f"{it},{CSV_FLOAT_FORMAT % ievd_mean[it]},"
                        f"{CSV_FLOAT_FORMAT % training_mean[it]}\n"
                    )
            files.append(name)
            cell_index += 1
    return _finish_run("converge", config, seed, full_scale, out_dir, files, started)


# ---------------------------------------------------------------------------
# pep / bler


def _check_feasible(scheme_name: str, L: int, scenario: ChannelEnsemble):
    limit = min(scenario.arrays.n_t, scenario.arrays.n_r)
    if scheme_name == "park-pan" and L > limit:
        raise SchemeInfeasibleError(
            f"park-pan cannot run with L={L} > min(n_t, n_r)={limit}; "
            "list park-pan-star instead for massive-multipath scenarios"
        )


def run_pep(config: ExperimentConfig, seed: int, out_dir, *,
            full_scale: bool = False, workers: int = 1) -> RunManifest:
    """One bounded-PEP curve CSV per (scheme, path count)."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = config.snr_grid
    samples = config.sample_count(full_scale)
    files = []
    for scenario_index, L in enumerate(config.path_counts):
        scenario = config.scenario(num_paths=L)
        for scheme_name in config.data["schemes"]:
            _check_feasible(scheme_name, L, scenario)
            curve = pep_monte_carlo(
                scenario,
                config.scheme_instance(scheme_name),
                grid,
                samples,
                config.data["min_distance"],
                seed=[int(seed), scenario_index],
                workers=workers,
            )
            name = f"pep_{scheme_name}_L{L}.csv"
            curve.to_csv(out_dir / name)
            files.append(name)
    return _finish_run("pep", config, seed, full_scale, out_dir, files, started)


def run_bler(config: ExperimentConfig, seed: int, out_dir, *,
             full_scale: bool = False, workers: int = 1) -> RunManifest:
    """One BLER curve CSV per (scheme, path count)."""
    started = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    link = config.data["link"]
    sim = LinkSimConfig(
        block_size=link["block_size"],
        zp_length=link["zp_length"],
        blocks=config.sample_count(full_scale),
        snr_grid=config.snr_grid,
    )
    files = []
    for scenario_index, L in enumerate(config.path_counts):
        scenario = config.scenario(num_paths=L)
        for scheme_name in config.data["schemes"]:
            _check_feasible(scheme_name, L, scenario)
            curve = simulate_bler(
                scenario,
                config.scheme_instance(scheme_name),
                sim,
                seed=[int(seed), scenario_index],
                workers=workers,
            )
            name = f"bler_{scheme_name}_L{L}.csv"
            curve.to_csv(out_dir / name)
            files.append(name)
    return _finish_run("bler", config, seed, full_scale, out_dir, files, started)


# ---------------------------------------------------------------------------
# overhead


def run_overhead(config: ExperimentConfig, seed: int, out_dir, *,
                 full_scale: bool = False, workers: int = 1) -> RunManifest:
    """Training-slot accounting per array size.

    The alternative full-estimation baseline needs ``n_t * n_r`` training
    sequences; the ping-pong training protocol consumes ``2 * (n_t + n_r)``
    slots at two iterations, which the slot counter measures directly.
    """
    started = time.perf_counter()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    block = config.data["overhead"]
    est = TrainingBeamformer(n_iterations=block["iterations"])
    name = "overhead.csv"
    with open(Path(out_dir) / name, "w", newline="") as fh:
        fh.write("n_t,n_r,nsenga_slots,ievd_training_slots\n")
        for index, (n_t, n_r) in enumerate(block["array_sizes"]):
            scenario = ChannelEnsemble(
                arrays=ArrayConfig(n_t=n_t, n_r=n_r), num_paths=block["num_paths"]
            )
            rng = np.random.default_rng([int(seed), index])
            channel = sample_channel(scenario, rng)
            solution = est.fit(channel, rng=rng).solution_
            fh.write(f"{n_t},{n_r},{n_t * n_r},{solution.training_slots}\n")
    return _finish_run("overhead", config, seed, full_scale, out_dir, [name], started)


RUNNERS = {
    "converge": run_converge,
    "pep": run_pep,
    "bler": run_bler,
    "overhead": run_overhead,
}


def run_experiment(config: ExperimentConfig, seed: int, out_dir, *,
                   full_scale: bool = False, workers: int = 1) -> RunManifest:
    return RUNNERS[config.experiment](
        config, seed, out_dir, full_scale=full_scale, workers=workers
    )
