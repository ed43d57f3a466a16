"""Exception types shared across the package."""


class BeamsimError(Exception):
    """Base class for all beamsim-specific errors."""


class RankDeficiencyError(BeamsimError):
    """A Gram matrix is numerically singular, so the pseudo-inverse solve
    cannot proceed (coincident steering directions or too many paths)."""


class SchemeInfeasibleError(BeamsimError):
    """A beamforming scheme has no solution for the given channel, e.g.
    multi-direction beamforming with more paths than antennas."""


class DegenerateGroupError(BeamsimError):
    """A group of steering vectors sums to (numerically) zero, so no
    equivalent steering vector exists for it."""


class ConfigError(BeamsimError):
    """An experiment configuration file is malformed or inconsistent."""
