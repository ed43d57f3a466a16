"""Input-validation helpers used by every module.

All checks raise ``ValueError`` on contract violations so that callers can
distinguish bad inputs from the domain errors in :mod:`beamsim.exceptions`.
"""

from __future__ import annotations

import numbers

import numpy as np

UNIT_NORM_TOL = 1e-10


def as_complex_matrix(m, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_complex_vector(v, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def check_unit_vector(v, name: str = "vector", tol: float = UNIT_NORM_TOL) -> np.ndarray:
    v = as_complex_vector(v, name)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} must have unit 2-norm, got {norm!r}")
    return v


def check_square_hermitian(m, name: str = "matrix", tol: float = 1e-10) -> np.ndarray:
    m = as_complex_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    asym = np.abs(m - m.conj().T)
    if asym.size and asym.max() > tol:
        raise ValueError(f"{name} is not Hermitian within {tol} (max deviation {asym.max()})")
    return m


def check_cosine_angle(omega, name: str = "omega") -> float:
    omega = float(omega)
    if not np.isfinite(omega) or not (-1.0 <= omega < 1.0):
        raise ValueError(f"{name} must lie in [-1, 1), got {omega!r}")
    return omega


def check_count(n, name: str = "count", minimum: int = 1) -> int:
    if not isinstance(n, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return n


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, seed material, or None (fresh OS-seeded stream)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
