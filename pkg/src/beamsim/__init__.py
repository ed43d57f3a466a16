"""Tx/Rx joint beamforming schemes for frequency-selective steering channels.

The package provides four weight-design schemes as sklearn-style estimators
(iterative eigenvector beamforming, its over-the-air training realization,
multi-direction pseudo-inverse beamforming, and multipath grouping), the
steering channel model they operate on, PEP/BLER evaluation metrics, and a
seeded experiment harness with a CLI.
"""

__version__ = "0.1.0"

from .base import BaseBeamformer, BeamformingSolution
from .channel import (
    ArrayConfig,
    ChannelEnsemble,
    MultipathChannel,
    PathComponent,
    SisoChannel,
    sample_channel,
    siso_equivalent,
    steering_vector,
)
from .exceptions import (
    BeamsimError,
    ConfigError,
    DegenerateGroupError,
    RankDeficiencyError,
    SchemeInfeasibleError,
)
from .grouping import (
    GainVectors,
    MpgBeamformer,
    MultipathGroups,
    ParkPanBeamformer,
    ParkPanStarBeamformer,
    SteeringSet,
    equivalent_steering,
    group_by_angle,
    group_by_bartlett,
)
from .ievd import (
    IevdBeamformer,
    TrainingBeamformer,
    array_gain,
    estimate_steering_vectors,
    path_observations,
)
from .linalg import condition_ratio, gram_right_pseudo_apply, principal_eigvec_power
from .linksim import (
    BlerCurve,
    LinkSimConfig,
    mmse_equalize,
    qpsk_demodulate,
    qpsk_modulate,
    simulate_bler,
    zp_transmit_receive,
)
from .metrics import (
    DiversityFit,
    PepCurve,
    SnrGrid,
    diversity_fit,
    pep_bound_instant,
    pep_monte_carlo,
    pep_product_bound,
    q_function,
)
from .schemes import SCHEME_CLASSES, make_scheme

__all__ = [
    "ArrayConfig",
    "BaseBeamformer",
    "BeamformingSolution",
    "BeamsimError",
    "BlerCurve",
    "ChannelEnsemble",
    "ConfigError",
    "DegenerateGroupError",
    "DiversityFit",
    "GainVectors",
    "IevdBeamformer",
    "LinkSimConfig",
    "MpgBeamformer",
    "MultipathChannel",
    "MultipathGroups",
    "ParkPanBeamformer",
    "ParkPanStarBeamformer",
    "PathComponent",
    "PepCurve",
    "RankDeficiencyError",
    "SCHEME_CLASSES",
    "SchemeInfeasibleError",
    "SisoChannel",
    "SnrGrid",
    "SteeringSet",
    "TrainingBeamformer",
    "array_gain",
    "condition_ratio",
    "diversity_fit",
    "equivalent_steering",
    "estimate_steering_vectors",
    "gram_right_pseudo_apply",
    "group_by_angle",
    "group_by_bartlett",
    "make_scheme",
    "mmse_equalize",
    "path_observations",
    "pep_bound_instant",
    "pep_monte_carlo",
    "pep_product_bound",
    "principal_eigvec_power",
    "q_function",
    "qpsk_demodulate",
    "qpsk_modulate",
    "sample_channel",
    "simulate_bler",
    "siso_equivalent",
    "steering_vector",
    "zp_transmit_receive",
]
