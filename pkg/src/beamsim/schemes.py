"""Registry mapping scheme identifiers to estimator factories."""

from __future__ import annotations

from .base import BaseBeamformer
from .exceptions import ConfigError
from .grouping import MpgBeamformer, ParkPanBeamformer, ParkPanStarBeamformer
from .ievd import IevdBeamformer, TrainingBeamformer

SCHEME_CLASSES: dict[str, type[BaseBeamformer]] = {
    IevdBeamformer.scheme_name: IevdBeamformer,
    TrainingBeamformer.scheme_name: TrainingBeamformer,
    ParkPanBeamformer.scheme_name: ParkPanBeamformer,
    ParkPanStarBeamformer.scheme_name: ParkPanStarBeamformer,
    MpgBeamformer.scheme_name: MpgBeamformer,
}


def make_scheme(name: str, **params) -> BaseBeamformer:
    """Instantiate a scheme by identifier with keyword hyper-parameters."""
    if name not in SCHEME_CLASSES:
        raise ConfigError(
            f"unknown scheme {name!r}; known schemes: {sorted(SCHEME_CLASSES)}"
        )
    cls = SCHEME_CLASSES[name]
    valid = set(cls().get_params())
    unknown = set(params) - valid
    if unknown:
        raise ConfigError(
            f"unknown parameters {sorted(unknown)} for scheme {name!r}; valid: {sorted(valid)}"
        )
    return cls(**params)
