"""Estimator base class and the fitted-solution container.

Every beamforming scheme is an sklearn-style estimator: construct it with its
hyper-parameters, call ``fit`` on a :class:`~beamsim.channel.MultipathChannel`,
then read the fitted weight pair from ``tx_weights_`` / ``rx_weights_`` (or the
full :class:`BeamformingSolution` from ``solution_``).  ``get_params`` /
``set_params`` / ``sklearn.clone`` work as usual, so schemes compose with
generic tooling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .channel import MultipathChannel, SisoChannel, siso_equivalent
from .validation import UNIT_NORM_TOL


@dataclass(frozen=True, eq=False)
class BeamformingSolution:
    """A fitted transmit/receive weight pair with its provenance.

    ``gain_trace`` holds the power gain after each full iteration for the
    iterative schemes (empty for the one-shot schemes); ``initial_gain`` is
    the gain of the random starting pair, kept separate because the
    monotonicity guarantee starts at the first iteration.  ``training_slots``
    counts the over-the-air training slots the protocol consumed (None for
    schemes that do not train).
    """

    scheme: str
    tx_weights: np.ndarray
    rx_weights: np.ndarray
    iterations: int = 0
    gain_trace: tuple[float, ...] = ()
    initial_gain: float | None = None
    training_slots: int | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("tx_weights", "rx_weights"):
            w = np.asarray(getattr(self, name), dtype=np.complex128)
            norm = np.linalg.norm(w)
            if abs(norm - 1.0) > UNIT_NORM_TOL:
                raise ValueError(f"{name} must be unit-norm, got {norm!r}")
            object.__setattr__(self, name, w)
        object.__setattr__(self, "gain_trace", tuple(float(g) for g in self.gain_trace))

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "w_t": {"re": self.tx_weights.real.tolist(), "im": self.tx_weights.imag.tolist()},
            "w_r": {"re": self.rx_weights.real.tolist(), "im": self.rx_weights.imag.tolist()},
            "gamma_trace": list(self.gain_trace),
            "slots_consumed": self.training_slots,
        }


class BaseBeamformer(BaseEstimator):
    """Common estimator surface shared by all schemes."""

    scheme_name = ""

    def fit(self, channel: MultipathChannel, rng=None):  # pragma: no cover - interface
        raise NotImplementedError

    def _finish(self, solution: BeamformingSolution):
        self.solution_ = solution
        self.tx_weights_ = solution.tx_weights
        self.rx_weights_ = solution.rx_weights
        return self

    def transform(self, channel: MultipathChannel) -> SisoChannel:
        """Reduce a channel through the fitted weights to its SISO taps."""
        check_is_fitted(self, "solution_")
        return siso_equivalent(channel, self.tx_weights_, self.rx_weights_)

    def score(self, channel: MultipathChannel) -> float:
        """Power gain of the fitted weights on the given channel."""
        check_is_fitted(self, "solution_")
        from .ievd import array_gain

        return array_gain(channel, self.tx_weights_, self.rx_weights_)
