"""Frequency-selective steering channel model for half-wave-spaced ULAs.

The channel is a sum of L resolvable multipath components.  Component ``l``
carries a rank-one antenna coupling

    sqrt(n_r * n_t) * g_l * lambda_l * h_l^H

at integer symbol delay ``tau_l``, where ``h_l`` and ``g_l`` are the unit-norm
transmit/receive steering vectors of its cosine angles and ``lambda_l`` is the
complex fading coefficient.  Angles live directly in cosine space
``Omega = cos(phi)`` in ``[-1, 1)``; convert a physical angle with
``math.cos`` if needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .validation import as_rng, check_cosine_angle, check_count, check_unit_vector

ANGLE_MODE_EQUISPACED = "deterministic-equally-spaced"
ANGLE_MODE_UNIFORM = "uniform-random"
ANGLE_MODE_FIXED = "fixed-list"
ANGLE_MODES = (ANGLE_MODE_EQUISPACED, ANGLE_MODE_UNIFORM, ANGLE_MODE_FIXED)

TX_MODE_PER_PATH = "per-path"
TX_MODE_SINGLE = "same-single-angle"
TX_MODES = (TX_MODE_PER_PATH, TX_MODE_SINGLE)

# Shared transmit angle used by the "same-single-angle" mode when angles are
# deterministic (broadside); in the random mode the shared angle is drawn.
SINGLE_TX_ANGLE = 0.0


def steering_vector(n: int, omega: float) -> np.ndarray:
    """Unit-norm ULA response: entry k is ``exp(j*pi*k*omega) / sqrt(n)``.

    Parameters
    ----------
    n : antenna count (>= 1)
    omega : cosine angle in [-1, 1)
    """
    n = check_count(n, "n")
    omega = check_cosine_angle(omega)
    phases = 1j * np.pi * omega * np.arange(n)
    return np.exp(phases) / np.sqrt(n)


def _steering_matrix(n: int, omegas) -> np.ndarray:
    """Columns are steering vectors of the given angles (angles pre-validated
    by PathComponent)."""
    omegas = np.asarray(omegas, dtype=np.float64)
    return np.exp(1j * np.pi * np.outer(np.arange(n), omegas)) / np.sqrt(n)


@dataclass(frozen=True)
class ArrayConfig:
    """Antenna counts of the transmit and receive uniform linear arrays."""

    n_t: int
    n_r: int

    def __post_init__(self):
        check_count(self.n_t, "n_t")
        check_count(self.n_r, "n_r")


@dataclass(frozen=True)
class PathComponent:
    """One resolvable multipath component."""

    omega_t: float
    omega_r: float
    coefficient: complex
    delay: int

    def __post_init__(self):
        check_cosine_angle(self.omega_t, "omega_t")
        check_cosine_angle(self.omega_r, "omega_r")
        c = complex(self.coefficient)
        if not (np.isfinite(c.real) and np.isfinite(c.imag)):
            raise ValueError("coefficient must be finite")
        if int(self.delay) != self.delay or self.delay < 0:
            raise ValueError(f"delay must be a non-negative integer, got {self.delay!r}")


@dataclass(frozen=True, eq=False)
class MultipathChannel:
    """Immutable L-path steering channel.

    Delays must be pairwise distinct: the error-probability analysis assumes
    resolvable components, so user-supplied duplicate delays are rejected
    instead of silently summing taps.
    """

    arrays: ArrayConfig
    paths: tuple[PathComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if len(self.paths) < 1:
            raise ValueError("channel needs at least one path")
        delays = [p.delay for p in self.paths]
        if len(set(delays)) != len(delays):
            raise ValueError(f"path delays must be pairwise distinct, got {delays}")

    @property
    def num_paths(self) -> int:
        return len(self.paths)

    @property
    def max_delay(self) -> int:
        return max(p.delay for p in self.paths)

    @cached_property
    def delays(self) -> np.ndarray:
        return np.array([p.delay for p in self.paths], dtype=np.int64)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array([p.coefficient for p in self.paths], dtype=np.complex128)

    @cached_property
    def tx_steering(self) -> np.ndarray:
        """n_t-by-L matrix whose columns are the transmit steering vectors."""
        return _steering_matrix(self.arrays.n_t, [p.omega_t for p in self.paths])

    @cached_property
    def rx_steering(self) -> np.ndarray:
        """n_r-by-L matrix whose columns are the receive steering vectors."""
        return _steering_matrix(self.arrays.n_r, [p.omega_r for p in self.paths])

    def path_matrix(self, index: int) -> np.ndarray:
        """Rank-one antenna coupling of one path:
        ``sqrt(n_r*n_t) * g * lambda * h^H`` (an n_r-by-n_t matrix)."""
        if not 0 <= index < self.num_paths:
            raise ValueError(f"path index {index} out of range for L={self.num_paths}")
        p = self.paths[index]
        g = steering_vector(self.arrays.n_r, p.omega_r)
        h = steering_vector(self.arrays.n_t, p.omega_t)
        scale = np.sqrt(self.arrays.n_r * self.arrays.n_t) * p.coefficient
        return scale * np.outer(g, h.conj())

    def to_json_dict(self) -> dict:
        return {
            "n_t": self.arrays.n_t,
            "n_r": self.arrays.n_r,
            "paths": [
                {
                    "omega_t": p.omega_t,
                    "omega_r": p.omega_r,
                    "lambda_re": complex(p.coefficient).real,
                    "lambda_im": complex(p.coefficient).imag,
                    "tau": p.delay,
                }
                for p in self.paths
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MultipathChannel":
        paths = tuple(
            PathComponent(
                omega_t=p["omega_t"],
                omega_r=p["omega_r"],
                coefficient=complex(p["lambda_re"], p["lambda_im"]),
                delay=p["tau"],
            )
            for p in doc["paths"]
        )
        return cls(arrays=ArrayConfig(n_t=doc["n_t"], n_r=doc["n_r"]), paths=paths)

    @classmethod
    def from_json(cls, text: str) -> "MultipathChannel":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class ChannelEnsemble:
    """Random-channel generator configuration.

    ``angle_mode`` picks the receive-side (and, in ``per-path`` transmit
    mode, transmit-side) angles: equally spaced ``-1 + 2l/L``, uniform on
    [-1, 1), or a fixed list.  Coefficients are i.i.d. circular complex
    Gaussian with variance ``coefficient_variance`` (default 1/L), and path
    ``l`` gets delay ``l`` unless ``delays`` overrides that.
    """

    arrays: ArrayConfig
    num_paths: int
    angle_mode: str = ANGLE_MODE_UNIFORM
    transmit_angle_mode: str = TX_MODE_PER_PATH
    fixed_angles: tuple[tuple[float, float], ...] | None = None
    coefficient_variance: float | None = None
    delays: tuple[int, ...] | None = None

    def __post_init__(self):
        check_count(self.num_paths, "num_paths")
        if self.angle_mode not in ANGLE_MODES:
            raise ValueError(f"angle_mode must be one of {ANGLE_MODES}, got {self.angle_mode!r}")
        if self.transmit_angle_mode not in TX_MODES:
            raise ValueError(
                f"transmit_angle_mode must be one of {TX_MODES}, got {self.transmit_angle_mode!r}"
            )
        if self.angle_mode == ANGLE_MODE_FIXED:
            if self.fixed_angles is None or len(self.fixed_angles) != self.num_paths:
                raise ValueError("fixed-list mode needs exactly num_paths (omega_t, omega_r) pairs")
            for omega_t, omega_r in self.fixed_angles:
                check_cosine_angle(omega_t, "omega_t")
                check_cosine_angle(omega_r, "omega_r")
        if self.coefficient_variance is not None and self.coefficient_variance <= 0:
            raise ValueError("coefficient_variance must be positive")
        if self.delays is not None:
            if len(self.delays) != self.num_paths:
                raise ValueError("delays must list one value per path")

    @property
    def variance(self) -> float:
        if self.coefficient_variance is not None:
            return float(self.coefficient_variance)
        return 1.0 / self.num_paths

    def delay_of(self, index: int) -> int:
        if self.delays is not None:
            return int(self.delays[index])
        return index


def equispaced_angles(num_paths: int) -> np.ndarray:
    """The deterministic angle grid ``-1 + 2*l/L`` for ``l = 0..L-1``."""
    ell = np.arange(num_paths, dtype=np.float64)
    return -1.0 + 2.0 * ell / num_paths


def sample_channel(config: ChannelEnsemble, rng) -> MultipathChannel:
    """Draw one channel realization.

    Draw order (part of the reproducibility contract): transmit angles,
    then receive angles, then coefficients, each only when the mode calls
    for randomness.
    """
    rng = as_rng(rng)
    L = config.num_paths

    if config.angle_mode == ANGLE_MODE_EQUISPACED:
        omega_r = equispaced_angles(L)
        omega_t = omega_r.copy()
    elif config.angle_mode == ANGLE_MODE_UNIFORM:
        omega_t = rng.uniform(-1.0, 1.0, size=L)
        omega_r = rng.uniform(-1.0, 1.0, size=L)
    else:
        omega_t = np.array([a for a, _ in config.fixed_angles])
        omega_r = np.array([b for _, b in config.fixed_angles])

    if config.transmit_angle_mode == TX_MODE_SINGLE:
        if config.angle_mode == ANGLE_MODE_UNIFORM:
            shared = rng.uniform(-1.0, 1.0)
        else:
            shared = SINGLE_TX_ANGLE
        omega_t = np.full(L, shared)

    sigma = np.sqrt(config.variance / 2.0)
    coeffs = sigma * (rng.standard_normal(L) + 1j * rng.standard_normal(L))

    paths = tuple(
        PathComponent(
            omega_t=float(omega_t[i]),
            omega_r=float(omega_r[i]),
            coefficient=complex(coeffs[i]),
            delay=config.delay_of(i),
        )
        for i in range(L)
    )
    return MultipathChannel(arrays=config.arrays, paths=paths)


def path_gains(channel: MultipathChannel, tx_weights, rx_weights) -> np.ndarray:
    """Per-path beamformed gains ``w_r^H Hhat_l w_t`` as a length-L array."""
    w_t = check_unit_vector(tx_weights, "tx_weights")
    w_r = check_unit_vector(rx_weights, "rx_weights")
    if w_t.shape[0] != channel.arrays.n_t:
        raise ValueError(
            f"tx_weights length {w_t.shape[0]} does not match n_t={channel.arrays.n_t}"
        )
    if w_r.shape[0] != channel.arrays.n_r:
        raise ValueError(
            f"rx_weights length {w_r.shape[0]} does not match n_r={channel.arrays.n_r}"
        )
    return _path_gains_core(channel, w_t, w_r)


def _path_gains_core(channel: MultipathChannel, w_t: np.ndarray, w_r: np.ndarray) -> np.ndarray:
    """Validation-free gains for internal callers holding unit weights."""
    scale = np.sqrt(channel.arrays.n_r * channel.arrays.n_t)
    rx_part = w_r.conj() @ channel.rx_steering          # w_r^H g_l
    tx_part = channel.tx_steering.conj().T @ w_t        # h_l^H w_t
    return scale * channel.coefficients * rx_part * tx_part


@dataclass(frozen=True, eq=False)
class SisoChannel:
    """Post-beamforming scalar tap sequence h[0..v]."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        if taps.ndim != 1 or taps.size < 1:
            raise ValueError("taps must be a non-empty 1-D sequence")
        object.__setattr__(self, "taps", taps)

    @property
    def order(self) -> int:
        return self.taps.size - 1

    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))


def siso_equivalent(channel: MultipathChannel, tx_weights, rx_weights) -> SisoChannel:
    """Reduce the channel through a weight pair to its SISO tap sequence:
    tap ``tau_l`` is ``w_r^H Hhat_l w_t``, all other taps are exactly zero."""
    gains = path_gains(channel, tx_weights, rx_weights)
    taps = np.zeros(channel.max_delay + 1, dtype=np.complex128)
    taps[channel.delays] = gains
    return SisoChannel(taps=taps)
