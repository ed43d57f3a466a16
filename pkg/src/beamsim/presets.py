"""Built-in experiment presets.

Each ``figN-analog`` preset reproduces one of the reference studies at desk
scale; the paper-scale sample counts sit behind the ``--full-scale`` CLI
flag.  Presets are plain config dictionaries, so ``--config fig6-analog`` and
``--config path/to/file.json`` go through identical validation.
"""

from __future__ import annotations

_PEP_SCHEMES = ["ievd", "training", "mpg", "park-pan"]
_MASSIVE_SCHEMES = ["ievd", "mpg", "park-pan-star"]
_SNR = {"start": 0.0, "stop": 30.0, "step": 5.0}


def _pep(scenario, schemes, samples=1000):
    return {
        "schema_version": 1,
        "experiment": "pep",
        "scenario": scenario,
        "schemes": schemes,
        "snr_db": dict(_SNR),
        "samples": samples,
        "samples_full_scale": 100_000,
    }


def _bler(scenario, schemes, blocks=2000):
    return {
        "schema_version": 1,
        "experiment": "bler",
        "scenario": scenario,
        "schemes": schemes,
        "snr_db": dict(_SNR),
        "blocks": blocks,
        "blocks_full_scale": 10_000_000,
        "link": {"block_size": 32, "zp_length": 8},
    }


PRESETS: dict[str, dict] = {
    # Convergence study: mean gain vs iteration per (path count, power) cell.
    "fig3-analog": {
        "schema_version": 1,
        "experiment": "converge",
        "scenario": {"n_t": 8, "n_r": 8, "angle_mode": "uniform-random"},
        "converge": {
            "path_counts": [1, 2, 4],
            "powers": [1, 2],
            "iterations": 5,
            "channels": 2000,
            "channels_full_scale": 100_000,
        },
    },
    # PEP, one shared transmit angle, equally spaced receive angles.
    "fig4-analog": _pep(
        {
            "n_t": 8,
            "n_r": 8,
            "num_paths": [1, 2, 4, 8],
            "angle_mode": "deterministic-equally-spaced",
            "transmit_angle_mode": "same-single-angle",
        },
        _PEP_SCHEMES,
    ),
    # PEP, equally spaced angles at both ends.
    "fig5-analog": _pep(
        {
            "n_t": 8,
            "n_r": 8,
            "num_paths": [1, 2, 4, 8],
            "angle_mode": "deterministic-equally-spaced",
        },
        _PEP_SCHEMES,
    ),
    # PEP, uniform random angles at both ends.
    "fig6-analog": _pep(
        {"n_t": 8, "n_r": 8, "num_paths": [2, 4], "angle_mode": "uniform-random"},
        _PEP_SCHEMES,
    ),
    # Massive-multipath PEP (L > antennas): random selection replaces the
    # plain multi-direction scheme.
    "fig7-analog": _pep(
        {
            "n_t": 8,
            "n_r": 8,
            "num_paths": [10, 20],
            "angle_mode": "deterministic-equally-spaced",
        },
        _MASSIVE_SCHEMES,
    ),
    "fig8-analog": _pep(
        {"n_t": 8, "n_r": 8, "num_paths": [10, 20], "angle_mode": "uniform-random"},
        _MASSIVE_SCHEMES,
    ),
    # BLER over the zero-padded MMSE link.
    "fig9-analog": _bler(
        {
            "n_t": 8,
            "n_r": 8,
            "num_paths": [4],
            "angle_mode": "deterministic-equally-spaced",
        },
        ["ievd", "mpg", "park-pan"],
    ),
    "fig10-analog": _bler(
        {"n_t": 8, "n_r": 8, "num_paths": [4], "angle_mode": "uniform-random"},
        ["ievd", "mpg", "park-pan"],
    ),
    # Training-slot accounting table.
    "overhead": {
        "schema_version": 1,
        "experiment": "overhead",
        "overhead": {"array_sizes": [[8, 8], [16, 16], [32, 32]], "iterations": 2},
    },
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> dict:
    import copy

    return copy.deepcopy(PRESETS[name])
