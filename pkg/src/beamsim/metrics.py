"""Pairwise-error-probability bounds and diversity-order estimation.

The instantaneous PEP upper bound after beamforming is ``Q(d * sqrt(g*G/2))``
where ``g`` is the transmit SNR, ``G`` the power gain of the weight pair and
``d`` the constellation minimum distance (noise power is normalized to 1, so
``g`` is exactly the SNR without array gain).  Averaging the bound over
random channel draws gives the Monte Carlo curves; the closed-form product
bound takes the expectation over the fading coefficients analytically.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .base import BaseBeamformer
from .channel import ChannelEnsemble, MultipathChannel, path_gains, sample_channel
from .exceptions import SchemeInfeasibleError
from .ievd import array_gain
from .validation import check_unit_vector

QPSK_MIN_DISTANCE = float(np.sqrt(2.0))

CSV_FLOAT_FORMAT = "%.9e"  # 10 significant digits, scientific notation


def q_function(x) -> np.ndarray:
    """Gaussian tail probability Q(x), evaluated through erfc to double
    precision."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def snr_from_db(db) -> np.ndarray:
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


def snr_to_db(linear) -> np.ndarray:
    return 10.0 * np.log10(np.asarray(linear, dtype=np.float64))


@dataclass(frozen=True)
class SnrGrid:
    """Strictly increasing transmit-SNR grid, stored on the linear scale."""

    points: tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        if len(points) < 1:
            raise ValueError("SNR grid must be non-empty")
        if any(p <= 0 for p in points):
            raise ValueError("SNR grid values must be positive (linear scale)")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise ValueError("SNR grid must be strictly increasing")
        object.__setattr__(self, "points", points)

    @classmethod
    def from_db(cls, db_values) -> "SnrGrid":
        return cls(points=tuple(snr_from_db(np.asarray(db_values, dtype=np.float64))))

    @classmethod
    def from_db_range(cls, start: float, stop: float, step: float) -> "SnrGrid":
        if step <= 0:
            raise ValueError("step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return cls.from_db(start + step * np.arange(count))

    def db(self) -> np.ndarray:
        return snr_to_db(np.asarray(self.points))

    def __len__(self) -> int:
        return len(self.points)


def pep_bound_instant(channel: MultipathChannel, tx_weights, rx_weights, snr: float,
                      min_distance: float = QPSK_MIN_DISTANCE) -> float:
    """Instantaneous PEP upper bound ``Q(d * sqrt(snr * gain / 2))``.

    Extremely large arguments underflow to exactly 0.0 in double precision;
    the bound is 0.5 at zero gain or vanishing SNR.
    """
    if snr <= 0:
        raise ValueError("snr must be positive (linear scale)")
    if min_distance <= 0:
        raise ValueError("min_distance must be positive")
    gain = array_gain(channel, tx_weights, rx_weights)
    return float(q_function(min_distance * np.sqrt(snr * gain / 2.0)))


def pep_product_bound(channel: MultipathChannel, tx_weights, rx_weights, snr: float,
                      min_distance: float = QPSK_MIN_DISTANCE) -> float:
    """Closed-form high-SNR bound with the fading expectation taken
    analytically:

        prod_l 1 / (1 + d^2 * snr * n_t*n_r * |w_r^H g_l|^2 |h_l^H w_t|^2 * s2 / 4)

    where ``s2 = 1/L`` is the per-path coefficient variance.  The channel's
    drawn coefficients do not enter, only its steering directions.  Zero SNR
    gives the trivial bound 1.
    """
    if snr < 0:
        raise ValueError("snr must be non-negative (linear scale)")
    if min_distance <= 0:
        raise ValueError("min_distance must be positive")
    w_t = check_unit_vector(tx_weights, "tx_weights")
    w_r = check_unit_vector(rx_weights, "rx_weights")
    scale2 = channel.arrays.n_r * channel.arrays.n_t
    variance = 1.0 / channel.num_paths
    rx_part = np.abs(w_r.conj() @ channel.rx_steering) ** 2
    tx_part = np.abs(channel.tx_steering.conj().T @ w_t) ** 2
    factors = 1.0 + min_distance**2 * snr * scale2 * rx_part * tx_part * variance / 4.0
    return float(np.prod(1.0 / factors))


@dataclass(frozen=True, eq=False)
class PepCurve:
    """SNR-indexed mean bounded PEP with per-point standard errors."""

    scheme: str
    grid: SnrGrid
    pep: tuple[float, ...]
    stderr: tuple[float, ...]
    samples: int

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if len(self.pep) != len(self.grid) or len(self.stderr) != len(self.grid):
            raise ValueError("pep/stderr length must match the grid")
        # Bounds live in [0, 0.5]; an exact 0 can occur when every sampled
        # bound underflows at very high SNR.
        if any(not (0.0 <= p <= 0.5 + 1e-12) for p in self.pep):
            raise ValueError("pep values must lie in [0, 0.5]")
        object.__setattr__(self, "pep", tuple(float(p) for p in self.pep))
        object.__setattr__(self, "stderr", tuple(float(s) for s in self.stderr))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["snr_db", "pep_mean", "pep_stderr", "samples"])
            for db, p, s in zip(self.grid.db(), self.pep, self.stderr):
                writer.writerow(
                    [CSV_FLOAT_FORMAT % db, CSV_FLOAT_FORMAT % p, CSV_FLOAT_FORMAT % s,
                     str(self.samples)]
                )

    @classmethod
    def from_csv(cls, path, scheme: str = "") -> "PepCurve":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        grid = SnrGrid.from_db([float(r["snr_db"]) for r in rows])
        return cls(
            scheme=scheme,
            grid=grid,
            pep=tuple(float(r["pep_mean"]) for r in rows),
            stderr=tuple(float(r["pep_stderr"]) for r in rows),
            samples=int(rows[0]["samples"]),
        )


def _pep_rows(scenario, scheme, grid_points, min_distance, seed_key, start, stop):
    """Bounded-PEP rows for trials [start, stop); one stream per trial."""
    scheme = scheme.__class__(**scheme.get_params())
    points = np.asarray(grid_points)
    rows = np.empty((stop - start, points.size))
    for trial in range(start, stop):
        rng = np.random.default_rng([*seed_key, trial])
        channel = sample_channel(scenario, rng)
        try:
            scheme.fit(channel, rng=rng)
        except SchemeInfeasibleError as exc:
            raise SchemeInfeasibleError(
                f"scheme {scheme.scheme_name!r} infeasible on trial {trial}: {exc}"
            ) from exc
        gain = array_gain(channel, scheme.tx_weights_, scheme.rx_weights_)
        rows[trial - start] = q_function(min_distance * np.sqrt(points * gain / 2.0))
    return rows


def _chunk_ranges(total: int, chunks: int):
    edges = np.linspace(0, total, chunks + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def pep_monte_carlo(
    scenario: ChannelEnsemble,
    scheme: BaseBeamformer,
    grid: SnrGrid,
    samples: int,
    min_distance: float = QPSK_MIN_DISTANCE,
    *,
    seed,
    workers: int = 1,
) -> PepCurve:
    """Average the instantaneous PEP bound over random channel draws.

    Trial ``t`` uses the stream ``default_rng([*seed, t])`` for its channel
    draw and for any randomness inside the scheme, so results are identical
    for any degree of parallelism.  Fresh coefficients are drawn every trial;
    angles are redrawn only when the scenario's angle mode is random.
    """
    if samples < 100:
        raise ValueError("samples must be >= 100")
    seed_key = [int(s) for s in (seed if isinstance(seed, (list, tuple)) else [seed])]
    points = np.asarray(grid.points)

    if workers <= 1:
        rows = _pep_rows(scenario, scheme, points, min_distance, seed_key, 0, samples)
    else:
        rows = np.empty((samples, points.size))
        ranges = _chunk_ranges(samples, workers * 4)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_pep_rows, scenario, scheme, points, min_distance, seed_key, a, b)
                for a, b in ranges
            ]
            for (a, b), future in zip(ranges, futures):
                rows[a:b] = future.result()

    mean = rows.mean(axis=0)
    stderr = rows.std(axis=0, ddof=1) / np.sqrt(samples)
    return PepCurve(
        scheme=scheme.scheme_name,
        grid=grid,
        pep=tuple(mean),
        stderr=tuple(stderr),
        samples=samples,
    )


@dataclass(frozen=True)
class DiversityFit:
    """Least-squares log-log slope of a PEP/BLER curve over its high-SNR end."""

    slope: float
    fit_range: tuple[float, float]  # linear-SNR interval used
    r_squared: float
    points_used: int


def diversity_fit(curve, high_snr_fraction: float = 0.4) -> DiversityFit:
    """Estimate the diversity order as minus the slope of ``log10(pep)``
    against ``log10(snr)`` over the top ``high_snr_fraction`` of the grid
    (at least 3 points).  Zero values (underflow) are dropped with a warning
    by shrinking the range; fewer than 3 surviving points is an error."""
    if not 0 < high_snr_fraction <= 1:
        raise ValueError("high_snr_fraction must be in (0, 1]")
    snr = np.asarray(curve.grid.points)
    values = np.asarray(curve.pep if hasattr(curve, "pep") else curve.bler)
    count = max(3, int(np.ceil(high_snr_fraction * snr.size)))
    if snr.size < 3:
        raise ValueError("curve needs at least 3 grid points")
    count = min(count, snr.size)
    snr = snr[-count:]
    values = values[-count:]
    keep = values > 0.0
    if not keep.all():
        import warnings

        warnings.warn(
            f"dropping {int((~keep).sum())} zero-valued points from the diversity fit",
            stacklevel=2,
        )
        snr, values = snr[keep], values[keep]
    if snr.size < 3:
        raise ValueError("fewer than 3 positive points remain in the fit range")
    x = np.log10(snr)
    y = np.log10(values)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DiversityFit(
        slope=float(-slope),
        fit_range=(float(snr[0]), float(snr[-1])),
        r_squared=r_squared,
        points_used=int(snr.size),
    )
