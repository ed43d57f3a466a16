"""Beamforming schemes that need only the quasi-static steering vectors.

These schemes never touch the fast-fading coefficients: the weight vectors
are built purely from the per-path steering directions, either directly
(multi-direction pseudo-inverse beamforming, after Park and Pan) or after
collapsing groups of nearby directions into equivalent steering vectors
(multipath grouping), which keeps the solve well-conditioned and feasible
even when there are more paths than antennas.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .base import BaseBeamformer, BeamformingSolution
from .channel import MultipathChannel, steering_vector
from .exceptions import DegenerateGroupError, RankDeficiencyError, SchemeInfeasibleError
from .linalg import canonical_phase, gram_right_pseudo_apply
from .validation import as_complex_matrix, as_rng, check_cosine_angle, check_count

GROUPING_ANGLE = "angle"
GROUPING_BARTLETT = "bartlett"
GROUPING_METHODS = (GROUPING_ANGLE, GROUPING_BARTLETT)


@dataclass(frozen=True, eq=False)
class SteeringSet:
    """Per-end steering-vector matrices (columns are unit vectors)."""

    tx_matrix: np.ndarray  # n_t x L
    rx_matrix: np.ndarray  # n_r x L

    def __post_init__(self):
        tx = as_complex_matrix(self.tx_matrix, "tx_matrix")
        rx = as_complex_matrix(self.rx_matrix, "rx_matrix")
        if tx.shape[1] != rx.shape[1]:
            raise ValueError("tx_matrix and rx_matrix must have one column per path")
        for name, m in (("tx_matrix", tx), ("rx_matrix", rx)):
            norms = np.linalg.norm(m, axis=0)
            if norms.size and np.max(np.abs(norms - 1.0)) > 1e-9:
                raise ValueError(f"{name} columns must be unit-norm")
        object.__setattr__(self, "tx_matrix", tx)
        object.__setattr__(self, "rx_matrix", rx)

    @property
    def num_paths(self) -> int:
        return self.tx_matrix.shape[1]

    @classmethod
    def from_channel(cls, channel: MultipathChannel) -> "SteeringSet":
        return cls(tx_matrix=channel.tx_steering, rx_matrix=channel.rx_steering)


@dataclass(frozen=True)
class GainVectors:
    """Target per-direction gains (all ones unless a study overrides them)."""

    tx: tuple[complex, ...]
    rx: tuple[complex, ...]

    @classmethod
    def ones(cls, num_paths: int) -> "GainVectors":
        return cls(tx=(1.0 + 0.0j,) * num_paths, rx=(1.0 + 0.0j,) * num_paths)

    def __post_init__(self):
        object.__setattr__(self, "tx", tuple(complex(g) for g in self.tx))
        object.__setattr__(self, "rx", tuple(complex(g) for g in self.rx))
        if len(self.tx) != len(self.rx):
            raise ValueError("tx and rx gain vectors must have equal length")


def group_by_angle(omegas, segment_count: int) -> np.ndarray:
    """Assign each cosine angle to one of ``segment_count`` uniform segments.

    Segment ``i`` (1-indexed) covers the half-open interval
    ``[-1 + 2(i-1)/n, -1 + 2i/n)``.
    """
    n = check_count(segment_count, "segment_count")
    omegas = np.atleast_1d(np.asarray(omegas, dtype=np.float64))
    for omega in omegas:
        check_cosine_angle(omega)
    raw = np.floor((omegas + 1.0) * n / 2.0).astype(np.int64) + 1
    # Guard against (omega + 1) rounding up to exactly 2.0 for omega just
    # below 1; mathematically the index never exceeds n on [-1, 1).
    return np.minimum(raw, n)


def bartlett_dictionary(n: int) -> np.ndarray:
    """Columns are the segment-center steering vectors ``-1 + (2i-1)/n``."""
    n = check_count(n, "n")
    centers = -1.0 + (2.0 * np.arange(1, n + 1) - 1.0) / n
    return np.column_stack([steering_vector(n, c) for c in centers])


def group_by_bartlett(steering_vectors, segment_count: int) -> np.ndarray:
    """Assign each steering vector to the dictionary vector it correlates
    with most strongly (the spatial-spectrum peak); exact ties go to the
    lowest segment index.  Agrees with :func:`group_by_angle` away from
    segment boundaries."""
    n = check_count(segment_count, "segment_count")
    vectors = as_complex_matrix(np.column_stack(steering_vectors) if not isinstance(
        steering_vectors, np.ndarray) else steering_vectors, "steering_vectors")
    if vectors.shape[0] != n:
        raise ValueError(
            f"steering vectors of length {vectors.shape[0]} do not match segment_count {n}"
        )
    correlations = np.abs(bartlett_dictionary(n).conj().T @ vectors)  # (n, L)
    return np.argmax(correlations, axis=0).astype(np.int64) + 1


def equivalent_steering(members) -> np.ndarray:
    """Normalized sum of a group's steering vectors.

    A single member is returned unchanged.  A (numerically) cancelling sum is
    an error: it cannot happen for directions within one angle segment, so it
    signals a caller bug rather than a recoverable condition.
    """
    matrix = np.column_stack(members) if not isinstance(members, np.ndarray) else members
    matrix = as_complex_matrix(matrix, "members")
    if matrix.shape[1] == 0:
        raise ValueError("members must be non-empty")
    if matrix.shape[1] == 1:
        return matrix[:, 0].copy()
    total = matrix.sum(axis=1)
    norm = np.linalg.norm(total)
    if norm <= 1e-12:
        raise DegenerateGroupError("group steering vectors cancel; no equivalent vector exists")
    return total / norm


@dataclass(frozen=True, eq=False)
class MultipathGroups:
    """Partition of path indices into angle segments, with the equivalent
    steering vector of every non-empty segment."""

    segment_count: int
    assignments: tuple[int, ...]          # 1-indexed segment per path
    equivalent_matrix: np.ndarray         # one column per non-empty segment
    segments: tuple[int, ...]             # non-empty segment indices, ascending

    @property
    def nonempty_count(self) -> int:
        return len(self.segments)

    @cached_property
    def members(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, tuple[int, ...]] = {}
        for segment in self.segments:
            out[segment] = tuple(
                i for i, s in enumerate(self.assignments) if s == segment
            )
        return out

    def to_json_dict(self) -> dict:
        return {str(segment): list(paths) for segment, paths in self.members.items()}

    @classmethod
    def build(cls, steering_matrix: np.ndarray, assignments) -> "MultipathGroups":
        assignments = tuple(int(a) for a in np.atleast_1d(assignments))
        segments = tuple(sorted(set(assignments)))
        columns = []
        for segment in segments:
            member_idx = [i for i, s in enumerate(assignments) if s == segment]
            columns.append(equivalent_steering(steering_matrix[:, member_idx]))
        n = steering_matrix.shape[0]
        return cls(
            segment_count=n,
            assignments=assignments,
            equivalent_matrix=np.column_stack(columns),
            segments=segments,
        )


def _solve_end(columns: np.ndarray, targets: np.ndarray, end: str):
    """Pseudo-inverse weight solve for one array end; returns the normalized
    weights and the pre-normalization residual of the gain constraints."""
    try:
        raw = gram_right_pseudo_apply(columns, targets)
    except RankDeficiencyError as exc:
        raise SchemeInfeasibleError(f"{end} weight solve is rank-deficient: {exc}") from exc
    residual = float(np.linalg.norm(columns.conj().T @ raw - targets))
    return canonical_phase(raw / np.linalg.norm(raw)), residual


def parkpan_weights(steering: SteeringSet, gains: GainVectors | None = None):
    """Multi-direction beamforming: unit gain along every path's steering
    vector via the right pseudo-inverse, then normalization.

    Returns ``(tx_weights, rx_weights, extras)`` where extras carries the
    pre-normalization residuals.  Infeasible when there are more paths than
    antennas at either end or the steering directions are (numerically)
    dependent.
    """
    L = steering.num_paths
    gains = gains if gains is not None else GainVectors.ones(L)
    if len(gains.tx) != L:
        raise ValueError("gain vectors must list one gain per path")
    n_t = steering.tx_matrix.shape[0]
    n_r = steering.rx_matrix.shape[0]
    if L > min(n_t, n_r):
        raise SchemeInfeasibleError(
            f"no weight solution exists for L={L} paths with n_t={n_t}, n_r={n_r}"
        )
    tx_targets = np.asarray(gains.tx, dtype=np.complex128)
    # The receive gains enter conjugated so the realized gains w_r^H g_l come
    # out as specified (vacuous for the default all-ones gains).
    rx_targets = np.asarray(gains.rx, dtype=np.complex128).conj()
    w_t, tx_residual = _solve_end(steering.tx_matrix, tx_targets, "transmit")
    w_r, rx_residual = _solve_end(steering.rx_matrix, rx_targets, "receive")
    extras = {"tx_residual": tx_residual, "rx_residual": rx_residual}
    return w_t, w_r, extras


_STAR_MAX_RETRIES = 10


def _select_columns(matrix, targets, size, rng, end):
    """Random sub-selection for the over-populated case, resampling (bounded)
    when the selected sub-Gram happens to be singular."""
    L = matrix.shape[1]
    last_error = None
    for _ in range(_STAR_MAX_RETRIES):
        chosen = np.sort(rng.choice(L, size=size, replace=False))
        try:
            w, residual = _solve_end(matrix[:, chosen], targets[chosen], end)
            return w, residual, chosen
        except SchemeInfeasibleError as exc:
            last_error = exc
    raise SchemeInfeasibleError(
        f"{end} selection retries exhausted ({_STAR_MAX_RETRIES})"
    ) from last_error


def parkpan_star_weights(steering: SteeringSet, gains: GainVectors | None, rng):
    """Random-selection variant: when feasible it is exactly the plain solve
    (and consumes no randomness); otherwise n_t / n_r paths are selected
    uniformly without replacement at the two ends independently."""
    L = steering.num_paths
    gains = gains if gains is not None else GainVectors.ones(L)
    n_t = steering.tx_matrix.shape[0]
    n_r = steering.rx_matrix.shape[0]
    if L <= min(n_t, n_r):
        return parkpan_weights(steering, gains)
    rng = as_rng(rng)
    tx_targets = np.asarray(gains.tx, dtype=np.complex128)
    rx_targets = np.asarray(gains.rx, dtype=np.complex128).conj()
    w_t, tx_residual, tx_selected = _select_columns(
        steering.tx_matrix, tx_targets, n_t, rng, "transmit"
    )
    w_r, rx_residual, rx_selected = _select_columns(
        steering.rx_matrix, rx_targets, n_r, rng, "receive"
    )
    extras = {
        "tx_residual": tx_residual,
        "rx_residual": rx_residual,
        "tx_selected": tx_selected.tolist(),
        "rx_selected": rx_selected.tolist(),
    }
    return w_t, w_r, extras


def mpg_weights(
    channel_or_steering,
    grouping_method: str = GROUPING_ANGLE,
    omegas_t=None,
    omegas_r=None,
):
    """Multipath-grouping weights.

    Paths are grouped independently at the two ends (n_t angle segments over
    the transmit angles, n_r over the receive angles), each non-empty group
    is replaced by its equivalent steering vector, and the pseudo-inverse
    solve runs on the reduced systems with all-ones gains.  Angle grouping
    needs the cosine angles (taken from the channel when one is given);
    Bartlett grouping works from the steering vectors alone.
    """
    if isinstance(channel_or_steering, MultipathChannel):
        steering = SteeringSet.from_channel(channel_or_steering)
        omegas_t = np.array([p.omega_t for p in channel_or_steering.paths])
        omegas_r = np.array([p.omega_r for p in channel_or_steering.paths])
    else:
        steering = channel_or_steering
    if grouping_method not in GROUPING_METHODS:
        raise ValueError(
            f"grouping_method must be one of {GROUPING_METHODS}, got {grouping_method!r}"
        )
    n_t = steering.tx_matrix.shape[0]
    n_r = steering.rx_matrix.shape[0]

    if grouping_method == GROUPING_ANGLE:
        if omegas_t is None or omegas_r is None:
            raise ValueError("angle grouping needs the cosine angles; pass a channel")
        tx_assignment = group_by_angle(omegas_t, n_t)
        rx_assignment = group_by_angle(omegas_r, n_r)
    else:
        tx_assignment = group_by_bartlett(steering.tx_matrix, n_t)
        rx_assignment = group_by_bartlett(steering.rx_matrix, n_r)

    tx_groups = MultipathGroups.build(steering.tx_matrix, tx_assignment)
    rx_groups = MultipathGroups.build(steering.rx_matrix, rx_assignment)

    tx_targets = np.ones(tx_groups.nonempty_count, dtype=np.complex128)
    rx_targets = np.ones(rx_groups.nonempty_count, dtype=np.complex128)
    w_t, tx_residual = _solve_end(tx_groups.equivalent_matrix, tx_targets, "transmit")
    w_r, rx_residual = _solve_end(rx_groups.equivalent_matrix, rx_targets.conj(), "receive")
    extras = {
        "tx_residual": tx_residual,
        "rx_residual": rx_residual,
        "tx_groups": tx_groups.to_json_dict(),
        "rx_groups": rx_groups.to_json_dict(),
        "num_tx_groups": tx_groups.nonempty_count,
        "num_rx_groups": rx_groups.nonempty_count,
    }
    return w_t, w_r, extras, (tx_groups, rx_groups)


class ParkPanBeamformer(BaseBeamformer):
    """Multi-direction pseudo-inverse beamforming (needs L <= min(n_t, n_r))."""

    scheme_name = "park-pan"

    def __init__(self, gains: GainVectors | None = None):
        self.gains = gains

    def fit(self, channel, rng=None):
        steering = channel if isinstance(channel, SteeringSet) else SteeringSet.from_channel(channel)
        w_t, w_r, extras = parkpan_weights(steering, self.gains)
        return self._finish(
            BeamformingSolution(
                scheme=self.scheme_name, tx_weights=w_t, rx_weights=w_r, extras=extras
            )
        )


class ParkPanStarBeamformer(BaseBeamformer):
    """Multi-direction beamforming with random path selection when there are
    more paths than antennas (identical to the plain scheme otherwise)."""

    scheme_name = "park-pan-star"

    def __init__(self, gains: GainVectors | None = None, random_state=None):
        self.gains = gains
        self.random_state = random_state

    def fit(self, channel, rng=None):
        steering = channel if isinstance(channel, SteeringSet) else SteeringSet.from_channel(channel)
        rng = rng if rng is not None else self.random_state
        w_t, w_r, extras = parkpan_star_weights(steering, self.gains, rng)
        return self._finish(
            BeamformingSolution(
                scheme=self.scheme_name, tx_weights=w_t, rx_weights=w_r, extras=extras
            )
        )


class MpgBeamformer(BaseBeamformer):
    """Multipath-grouping beamforming (feasible for any number of paths)."""

    scheme_name = "mpg"

    def __init__(self, grouping_method: str = GROUPING_ANGLE):
        self.grouping_method = grouping_method

    def fit(self, channel, rng=None):
        w_t, w_r, extras, groups = mpg_weights(channel, self.grouping_method)
        self.tx_groups_, self.rx_groups_ = groups
        return self._finish(
            BeamformingSolution(
                scheme=self.scheme_name, tx_weights=w_t, rx_weights=w_r, extras=extras
            )
        )
