"""Alternating-eigenvector beamforming and its over-the-air training variant.

Both schemes maximize the power gain

    Gamma(w_t, w_r) = sum_l |w_r^H Hhat_l w_t|^2

by alternating: fix one side's weights, then the optimal other side is the
principal eigenvector of the accumulated quadratic-form matrix.  With full
channel knowledge the eigenvector is computed (numerically) exactly; the
training protocol instead estimates the same matrix from ping-pong training
slots and approximates the eigenvector with a K-step power method, so no
channel estimation is needed at all.

Each alternating update can only increase the gain, so the per-iteration
gain trace is non-descending (exactly for the full-knowledge scheme, and for
noiseless training up to the power-method approximation).
"""

from __future__ import annotations

import numpy as np

from .base import BaseBeamformer, BeamformingSolution
from .channel import MultipathChannel, path_gains
from .linalg import principal_eigvec_power
from .validation import as_rng, check_count, check_unit_vector

STOP_FIXED_COUNT = "fixed-count"
STOP_GAIN_RATIO = "gain-ratio"
STOPPING_RULES = (STOP_FIXED_COUNT, STOP_GAIN_RATIO)

# Power-method exponent that makes the eigenvector numerically exact on the
# rank-limited accumulated matrices (dimension <= 32 here); with the warm
# start from the previous weights the gain is monotone for any exponent.
EXACT_EIG_POWER = 24


def array_gain(channel: MultipathChannel, tx_weights, rx_weights) -> float:
    """Power gain of a weight pair: sum of squared per-path beamformed gains.
    Multiplies the transmit SNR to give the receive SNR."""
    gains = path_gains(channel, tx_weights, rx_weights)
    return float(np.sum(np.abs(gains) ** 2))


def _random_unit(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def _tx_update_matrix(channel: MultipathChannel, rx_weights: np.ndarray) -> np.ndarray:
    """sum_l Hhat_l^H w_r w_r^H Hhat_l, an n_t-by-n_t PSD matrix of rank <= L."""
    scale2 = channel.arrays.n_r * channel.arrays.n_t
    coupling = scale2 * np.abs(channel.coefficients) ** 2
    coupling = coupling * np.abs(rx_weights.conj() @ channel.rx_steering) ** 2
    h = channel.tx_steering
    m = (h * coupling) @ h.conj().T
    return (m + m.conj().T) / 2.0


def _rx_update_matrix(channel: MultipathChannel, tx_weights: np.ndarray) -> np.ndarray:
    """sum_l Hhat_l w_t w_t^H Hhat_l^H, an n_r-by-n_r PSD matrix of rank <= L."""
    scale2 = channel.arrays.n_r * channel.arrays.n_t
    coupling = scale2 * np.abs(channel.coefficients) ** 2
    coupling = coupling * np.abs(channel.tx_steering.conj().T @ tx_weights) ** 2
    g = channel.rx_steering
    m = (g * coupling) @ g.conj().T
    return (m + m.conj().T) / 2.0


def _validate_stopping(stopping_rule: str, ratio_threshold: float, n_iterations: int):
    check_count(n_iterations, "n_iterations")
    if stopping_rule not in STOPPING_RULES:
        raise ValueError(f"stopping_rule must be one of {STOPPING_RULES}, got {stopping_rule!r}")
    if stopping_rule == STOP_GAIN_RATIO and not ratio_threshold > 1.0:
        raise ValueError(f"ratio_threshold must exceed 1, got {ratio_threshold!r}")


def _should_stop(stopping_rule: str, ratio_threshold: float, trace: list[float]) -> bool:
    # The ratio rule needs two completed iterations before it can fire.
    if stopping_rule != STOP_GAIN_RATIO or len(trace) < 2:
        return False
    previous = trace[-2]
    if previous <= 0.0:
        return False
    return trace[-1] / previous < ratio_threshold


def _initial_weights(channel, initial_rx_weights, rng):
    """Starting pair.  Draw order (reproducibility contract): receive weights
    first, then the transmit weights used only to record the pre-iteration
    gain."""
    if initial_rx_weights is None:
        w_r = _random_unit(channel.arrays.n_r, rng)
    else:
        w_r = check_unit_vector(initial_rx_weights, "initial_rx_weights")
        if w_r.shape[0] != channel.arrays.n_r:
            raise ValueError("initial_rx_weights length does not match n_r")
    w_t = _random_unit(channel.arrays.n_t, rng)
    return w_t, w_r


class SteeringEstimate:
    """Per-path steering-vector estimates from one training round-trip.

    Columns of ``tx_vectors`` / ``rx_vectors`` are unit estimates of the
    transmit / receive steering vectors (zero columns where the path was
    unobservable through the probe weights, see the boolean masks).
    """

    def __init__(self, tx_vectors, rx_vectors, tx_observable, rx_observable):
        self.tx_vectors = tx_vectors
        self.rx_vectors = rx_vectors
        self.tx_observable = tx_observable
        self.rx_observable = rx_observable


_OBSERVABLE_NORM = 1e-10


def estimate_steering_vectors(
    channel: MultipathChannel,
    probe_tx_weights,
    probe_rx_weights,
    *,
    noise_variance: float = 0.0,
    rng=None,
) -> SteeringEstimate:
    """Estimate all steering vectors from one ping-pong training exchange.

    The per-path response to the destination probe is a scalar multiple of
    the transmit steering vector (and mirrored for the receive side), so
    normalizing each observed column recovers the steering vector up to a
    unit-magnitude phase.  A path whose observed column has norm below
    ``1e-10`` is flagged unobservable for that side (its probe weights are
    orthogonal to it, or its coefficient vanished).
    """
    rng = as_rng(rng)
    noise_std = float(np.sqrt(noise_variance))
    w_t = check_unit_vector(probe_tx_weights, "probe_tx_weights")
    w_r = check_unit_vector(probe_rx_weights, "probe_rx_weights")
    n_t, n_r = channel.arrays.n_t, channel.arrays.n_r

    observed_tx = path_observations(
        channel, w_r, np.eye(n_t), reverse=True, noise_std=noise_std, rng=rng
    )
    observed_rx = path_observations(
        channel, w_t, np.eye(n_r), reverse=False, noise_std=noise_std, rng=rng
    )

    def _normalize_columns(observed):
        norms = np.linalg.norm(observed, axis=0)
        observable = norms >= _OBSERVABLE_NORM
        vectors = np.zeros_like(observed)
        if observable.any():
            vectors[:, observable] = observed[:, observable] / norms[observable]
        return vectors, observable

    tx_vectors, tx_observable = _normalize_columns(observed_tx)
    rx_vectors, rx_observable = _normalize_columns(observed_rx)
    return SteeringEstimate(tx_vectors, rx_vectors, tx_observable, rx_observable)


class IevdBeamformer(BaseBeamformer):
    """Iterative eigenvector beamforming with full channel knowledge.

    Parameters
    ----------
    n_iterations : iteration budget (the fixed count when
        ``stopping_rule="fixed-count"``, otherwise a cap).
    stopping_rule : "fixed-count" or "gain-ratio".  The ratio rule stops as
        soon as the per-iteration gain ratio drops below ``ratio_threshold``.
    ratio_threshold : threshold slightly above 1 for the ratio rule.
    initial_rx_weights : fixed starting receive weights, or None to draw a
        random unit vector from the fit-time stream.
    random_state : seed material used when ``fit`` is not handed a stream.
    """

    scheme_name = "ievd"

    def __init__(
        self,
        n_iterations: int = 3,
        stopping_rule: str = STOP_FIXED_COUNT,
        ratio_threshold: float = 1.05,
        initial_rx_weights=None,
        random_state=None,
    ):
        self.n_iterations = n_iterations
        self.stopping_rule = stopping_rule
        self.ratio_threshold = ratio_threshold
        self.initial_rx_weights = initial_rx_weights
        self.random_state = random_state

    def fit(self, channel: MultipathChannel, rng=None):
        _validate_stopping(self.stopping_rule, self.ratio_threshold, self.n_iterations)
        rng = as_rng(rng if rng is not None else self.random_state)
        w_t, w_r = _initial_weights(channel, self.initial_rx_weights, rng)
        initial_gain = array_gain(channel, w_t, w_r)

        trace: list[float] = []
        degenerate = False
        for _ in range(self.n_iterations):
            # Warm-starting each eigenvector solve from the current weights
            # makes every half-step a Rayleigh-quotient ascent, which is what
            # guarantees the non-descending gain trace.
            w_t, d1 = principal_eigvec_power(_tx_update_matrix(channel, w_r), w_t, EXACT_EIG_POWER)
            w_r, d2 = principal_eigvec_power(_rx_update_matrix(channel, w_t), w_r, EXACT_EIG_POWER)
            degenerate = degenerate or d1 or d2
            trace.append(array_gain(channel, w_t, w_r))
            if _should_stop(self.stopping_rule, self.ratio_threshold, trace):
                break

        return self._finish(
            BeamformingSolution(
                scheme=self.scheme_name,
                tx_weights=w_t,
                rx_weights=w_r,
                iterations=len(trace),
                gain_trace=tuple(trace),
                initial_gain=initial_gain,
                extras={"degenerate_seed": degenerate},
            )
        )


def path_observations(
    channel: MultipathChannel,
    tx_weights,
    rx_probes,
    *,
    reverse: bool,
    noise_std: float = 0.0,
    rng=None,
) -> np.ndarray:
    """Simulated training transmission, resolved per path.

    One training sequence is sent per probe (per slot): the transmitting end
    applies ``tx_weights``, the receiving end applies one column of
    ``rx_probes`` per slot, and per-path decoding yields, for slot ``i`` and
    path ``l``,

        forward (source -> destination):  probe_i^H Hhat_l  tx_weights
        reverse (destination -> source):  probe_i^H Hhat_l^H tx_weights

    plus circular complex Gaussian noise of standard deviation ``noise_std``
    per sample.  Returns an (n_slots, L) array.  All over-the-air channel
    access of the training scheme goes through this primitive.
    """
    probes = np.asarray(rx_probes, dtype=np.complex128)
    if probes.ndim == 1:
        probes = probes[:, None]
    w = np.asarray(tx_weights, dtype=np.complex128)
    scale = np.sqrt(channel.arrays.n_r * channel.arrays.n_t)
    if reverse:
        # Hhat_l^H = scale * conj(lambda_l) * h_l g_l^H maps the destination
        # weights back to the source array.
        if w.shape[0] != channel.arrays.n_r or probes.shape[0] != channel.arrays.n_t:
            raise ValueError("reverse pass needs destination weights and source probes")
        per_path = scale * channel.coefficients.conj() * (channel.rx_steering.conj().T @ w)
        samples = (probes.conj().T @ channel.tx_steering) * per_path[None, :]
    else:
        if w.shape[0] != channel.arrays.n_t or probes.shape[0] != channel.arrays.n_r:
            raise ValueError("forward pass needs source weights and destination probes")
        per_path = scale * channel.coefficients * (channel.tx_steering.conj().T @ w)
        samples = (probes.conj().T @ channel.rx_steering) * per_path[None, :]
    if noise_std > 0.0:
        rng = as_rng(rng)
        noise = rng.standard_normal(samples.shape) + 1j * rng.standard_normal(samples.shape)
        samples = samples + noise_std / np.sqrt(2.0) * noise
    return samples


class TrainingBeamformer(BaseBeamformer):
    """Over-the-air realization of the alternating-eigenvector scheme.

    Per iteration the destination transmits over n_t slots while the source
    scans the identity-matrix probes, giving the per-path vectors
    ``r[l] = Hhat_l^H w_r``; the source sets
    ``w_t = normalize(R_S^K e_1)`` with ``R_S = sum_l r[l] r[l]^H``, then the
    mirrored pass updates ``w_r`` from ``R_D``.  Channel access happens only
    through :func:`path_observations`; the slot counter in the solution
    records ``n_t + n_r`` slots per iteration.

    ``noise_variance=0`` is the idealized protocol; a positive value adds
    complex Gaussian noise per training sample for robustness studies.
    """

    scheme_name = "training"

    def __init__(
        self,
        n_iterations: int = 3,
        power: int = 2,
        noise_variance: float = 0.0,
        stopping_rule: str = STOP_FIXED_COUNT,
        ratio_threshold: float = 1.05,
        initial_rx_weights=None,
        random_state=None,
    ):
        self.n_iterations = n_iterations
        self.power = power
        self.noise_variance = noise_variance
        self.stopping_rule = stopping_rule
        self.ratio_threshold = ratio_threshold
        self.initial_rx_weights = initial_rx_weights
        self.random_state = random_state

    def fit(self, channel: MultipathChannel, rng=None):
        _validate_stopping(self.stopping_rule, self.ratio_threshold, self.n_iterations)
        check_count(self.power, "power")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be >= 0")
        rng = as_rng(rng if rng is not None else self.random_state)
        noise_std = float(np.sqrt(self.noise_variance))
        n_t, n_r = channel.arrays.n_t, channel.arrays.n_r
        w_t, w_r = _initial_weights(channel, self.initial_rx_weights, rng)
        initial_gain = array_gain(channel, w_t, w_r)

        source_seed = np.zeros(n_t, dtype=np.complex128)
        source_seed[0] = 1.0
        destination_seed = np.zeros(n_r, dtype=np.complex128)
        destination_seed[0] = 1.0

        trace: list[float] = []
        slots = 0
        degenerate = False
        for _ in range(self.n_iterations):
            observed = path_observations(
                channel, w_r, np.eye(n_t), reverse=True, noise_std=noise_std, rng=rng
            )
            slots += n_t
            # With identity probes, column l of `observed` is r[l], so this
            # accumulates sum_l r[l] r[l]^H.
            accumulated = observed @ observed.conj().T
            w_t, d1 = principal_eigvec_power(
                (accumulated + accumulated.conj().T) / 2.0, source_seed, self.power
            )

            observed = path_observations(
                channel, w_t, np.eye(n_r), reverse=False, noise_std=noise_std, rng=rng
            )
            slots += n_r
            accumulated = observed @ observed.conj().T
            w_r, d2 = principal_eigvec_power(
                (accumulated + accumulated.conj().T) / 2.0, destination_seed, self.power
            )
            degenerate = degenerate or d1 or d2

            trace.append(array_gain(channel, w_t, w_r))
            if _should_stop(self.stopping_rule, self.ratio_threshold, trace):
                break

        return self._finish(
            BeamformingSolution(
                scheme=self.scheme_name,
                tx_weights=w_t,
                rx_weights=w_r,
                iterations=len(trace),
                gain_trace=tuple(trace),
                initial_gain=initial_gain,
                training_slots=slots,
                extras={"degenerate_seed": degenerate},
            )
        )
