"""Block-error-rate simulation over the post-beamforming SISO channel.

QPSK symbols are sent in zero-padded single-carrier blocks; the guard of
``zp_length`` zero symbols between blocks lets a block MMSE equalizer collect
the multipath diversity.  A block is in error when any of its demodulated
bits differs from the transmitted bits.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .base import BaseBeamformer
from .channel import ChannelEnsemble, SisoChannel, sample_channel, siso_equivalent
from .exceptions import SchemeInfeasibleError
from .metrics import CSV_FLOAT_FORMAT, SnrGrid, _chunk_ranges
from .validation import as_rng, check_count

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class LinkSimConfig:
    """Block-transmission parameters (defaults: 32-symbol blocks, guard 8)."""

    block_size: int = 32
    zp_length: int = 8
    modulation: str = "qpsk"
    blocks: int = 10_000
    snr_grid: SnrGrid | None = None

    def __post_init__(self):
        check_count(self.block_size, "block_size")
        check_count(self.zp_length, "zp_length")
        check_count(self.blocks, "blocks")
        if self.modulation != "qpsk":
            raise ValueError("only QPSK modulation is supported")


def qpsk_modulate(bits) -> np.ndarray:
    """Gray-mapped QPSK: bit pair (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1))/sqrt(2),
    so 00 maps to (1+1j)/sqrt(2).  Unit symbol power, minimum distance
    sqrt(2)."""
    bits = np.asarray(bits, dtype=np.int64)
    if bits.ndim != 1 or bits.size % 2 != 0:
        raise ValueError("bits must be a flat sequence of even length")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    in_phase = 1.0 - 2.0 * bits[0::2]
    quadrature = 1.0 - 2.0 * bits[1::2]
    return (in_phase + 1j * quadrature) / _SQRT2


def qpsk_demodulate(symbols) -> np.ndarray:
    """Hard decisions inverting :func:`qpsk_modulate`."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    bits = np.empty(2 * symbols.size, dtype=np.int64)
    bits[0::2] = symbols.real < 0
    bits[1::2] = symbols.imag < 0
    return bits


def zp_transmit_receive(siso: SisoChannel, symbols, snr: float, zp_length: int, rng) -> np.ndarray:
    """One zero-padded block over the SISO channel.

    Returns ``sqrt(snr) * conv([symbols, zeros(zp_length)], taps)`` truncated
    to ``block_size + zp_length`` samples, plus unit-variance circular complex
    Gaussian noise.  The channel order must not exceed the guard length.
    """
    if siso.order > zp_length:
        raise ValueError(
            f"channel order {siso.order} exceeds the zero-padding length {zp_length}"
        )
    if snr <= 0:
        raise ValueError("snr must be positive (linear scale)")
    rng = as_rng(rng)
    symbols = np.asarray(symbols, dtype=np.complex128)
    padded = np.concatenate([symbols, np.zeros(zp_length, dtype=np.complex128)])
    clean = np.convolve(padded, siso.taps)[: symbols.size + zp_length]
    noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    return np.sqrt(snr) * clean + noise / _SQRT2


def convolution_matrix(taps, block_size: int, zp_length: int) -> np.ndarray:
    """Tall banded convolution matrix H with H[i, j] = taps[i - j],
    shaped (block_size + zp_length, block_size)."""
    taps = np.asarray(taps, dtype=np.complex128)
    rows = block_size + zp_length
    matrix = np.zeros((rows, block_size), dtype=np.complex128)
    cols = np.arange(block_size)
    for k, tap in enumerate(taps):
        matrix[cols + k, cols] = tap
    return matrix


def mmse_equalize(siso: SisoChannel, received, snr: float, block_size: int) -> np.ndarray:
    """Block MMSE estimate
    ``(H^H H + I/snr)^{-1} H^H y / sqrt(snr)`` with H the dense convolution
    matrix of the taps.  The regularized system is always invertible for
    finite SNR."""
    received = np.asarray(received, dtype=np.complex128)
    zp_length = received.size - block_size
    if zp_length < siso.order:
        raise ValueError("received block is too short for the channel order")
    h = convolution_matrix(siso.taps, block_size, zp_length)
    gram = h.conj().T @ h + np.eye(block_size) / snr
    return np.linalg.solve(gram, h.conj().T @ received) / np.sqrt(snr)


@dataclass(frozen=True, eq=False)
class BlerCurve:
    """SNR-indexed block-error fractions with binomial standard errors."""

    scheme: str
    grid: SnrGrid
    bler: tuple[float, ...]
    stderr: tuple[float, ...]
    blocks: int

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        if len(self.bler) != len(self.grid):
            raise ValueError("bler length must match the grid")
        if any(not 0.0 <= b <= 1.0 for b in self.bler):
            raise ValueError("bler values must lie in [0, 1]")
        object.__setattr__(self, "bler", tuple(float(b) for b in self.bler))
        object.__setattr__(self, "stderr", tuple(float(s) for s in self.stderr))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["snr_db", "bler", "blocks", "stderr"])
            for db, b, s in zip(self.grid.db(), self.bler, self.stderr):
                writer.writerow(
                    [CSV_FLOAT_FORMAT % db, CSV_FLOAT_FORMAT % b, str(self.blocks),
                     CSV_FLOAT_FORMAT % s]
                )

    @classmethod
    def from_csv(cls, path, scheme: str = "") -> "BlerCurve":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        grid = SnrGrid.from_db([float(r["snr_db"]) for r in rows])
        return cls(
            scheme=scheme,
            grid=grid,
            bler=tuple(float(r["bler"]) for r in rows),
            stderr=tuple(float(r["stderr"]) for r in rows),
            blocks=int(rows[0]["blocks"]),
        )


def _bler_rows(scenario, scheme, grid_points, config, seed_key, start, stop):
    """Block-error indicators for blocks [start, stop); one stream per block.

    Per block: fresh channel, scheme weights, bits, then one transmission per
    SNR point, in that fixed draw order.
    """
    scheme = scheme.__class__(**scheme.get_params())
    points = np.asarray(grid_points)
    errors = np.empty((stop - start, points.size), dtype=bool)
    for block in range(start, stop):
        rng = np.random.default_rng([*seed_key, block])
        channel = sample_channel(scenario, rng)
        try:
            scheme.fit(channel, rng=rng)
        except SchemeInfeasibleError as exc:
            raise SchemeInfeasibleError(
                f"scheme {scheme.scheme_name!r} infeasible on block {block}: {exc}"
            ) from exc
        siso = siso_equivalent(channel, scheme.tx_weights_, scheme.rx_weights_)
        bits = rng.integers(0, 2, size=2 * config.block_size)
        symbols = qpsk_modulate(bits)
        for snr_idx, snr in enumerate(points):
            received = zp_transmit_receive(siso, symbols, snr, config.zp_length, rng)
            estimates = mmse_equalize(siso, received, snr, config.block_size)
            errors[block - start, snr_idx] = bool(
                np.any(qpsk_demodulate(estimates) != bits)
            )
    return errors


def simulate_bler(
    scenario: ChannelEnsemble,
    scheme: BaseBeamformer,
    config: LinkSimConfig,
    *,
    seed,
    workers: int = 1,
) -> BlerCurve:
    """Monte Carlo BLER over random channel draws.

    Block ``b`` uses the stream ``default_rng([*seed, b])``; both the channel
    and the coefficients are redrawn every block (fast-fading reading of
    random channel realizations).  Identical for any degree of parallelism.
    """
    if config.snr_grid is None:
        raise ValueError("config.snr_grid must be set")
    # Default consecutive delays give channel order L-1; reject scenarios the
    # guard interval cannot cover before burning any compute.
    max_delay = max(scenario.delay_of(i) for i in range(scenario.num_paths))
    if max_delay > config.zp_length:
        raise ValueError(
            f"max path delay {max_delay} exceeds the zero-padding length {config.zp_length}"
        )
    seed_key = [int(s) for s in (seed if isinstance(seed, (list, tuple)) else [seed])]
    points = np.asarray(config.snr_grid.points)
    blocks = config.blocks

    if workers <= 1:
        errors = _bler_rows(scenario, scheme, points, config, seed_key, 0, blocks)
    else:
        errors = np.empty((blocks, points.size), dtype=bool)
        ranges = _chunk_ranges(blocks, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_bler_rows, scenario, scheme, points, config, seed_key, a, b)
                for a, b in ranges
            ]
            for (a, b), future in zip(ranges, futures):
                errors[a:b] = future.result()

    bler = errors.mean(axis=0)
    stderr = np.sqrt(bler * (1.0 - bler) / blocks)
    return BlerCurve(
        scheme=scheme.scheme_name,
        grid=config.snr_grid,
        bler=tuple(bler),
        stderr=tuple(stderr),
        blocks=blocks,
    )
