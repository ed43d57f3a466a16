"""Minimal dense complex linear algebra for the beamforming schemes.

Everything here operates on small matrices (dimension bounded by the antenna
counts or the number of multipath components, so at most a few dozen), which
keeps dense methods both exact enough and fast enough.

Eigenvector phase is not determined by the math, so every vector returned by
this module is canonicalized: the entry of largest magnitude is rotated to be
real and positive.  That makes weight-vector comparisons and golden tests
deterministic.
"""

from __future__ import annotations

import numpy as np

from .exceptions import RankDeficiencyError
from .validation import as_complex_matrix, as_complex_vector, check_count, check_square_hermitian

# Below this reciprocal-condition estimate a Gram matrix is treated as
# singular.  The floor separates genuine rank loss (duplicated steering
# vectors, more paths than antennas: rcond at rounding level ~1e-16) from
# merely ill-conditioned solves, which iterative refinement below still
# carries to the residual tolerance.  Random-angle draws produce Gram
# matrices just under 1e-12 often enough that a tighter floor would abort
# large Monte Carlo runs, so the floor sits at 1e-14.
GRAM_RCOND_FLOOR = 1e-14

# Residual the pseudo-inverse solve must meet; enforced after iterative
# refinement rather than assumed from the solver.
PSEUDO_INVERSE_RESIDUAL_TOL = 1e-8

_DEGENERATE_NORM = 1e-14


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale to unit 2-norm.  The input must not be (numerically) zero."""
    v = as_complex_vector(v)
    norm = np.linalg.norm(v)
    if norm < _DEGENERATE_NORM:
        raise ValueError("cannot normalize a (numerically) zero vector")
    return v / norm


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a vector's global phase so its largest-magnitude entry is real
    and positive.  Zero vectors are returned unchanged."""
    v = np.asarray(v, dtype=np.complex128)
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    if pivot == 0:
        return v
    return v * (abs(pivot) / pivot)


def principal_eigvec_power(matrix, seed_vector, power: int) -> tuple[np.ndarray, bool]:
    """Power-method step: ``normalize(matrix**power @ seed_vector)``.

    Parameters
    ----------
    matrix : (n, n) Hermitian positive-semidefinite array
    seed_vector : (n,) unit vector
    power : int >= 1, number of matrix applications

    Returns
    -------
    (vector, degenerate) : the canonicalized unit result and a flag that is
        True when the seed was (numerically) orthogonal to the range of the
        matrix; in that case the first standard basis vector is returned so
        protocol loops can keep running instead of aborting.
    """
    m = check_square_hermitian(matrix, "matrix", tol=1e-10)
    seed = as_complex_vector(seed_vector, "seed_vector")
    power = check_count(power, "power", minimum=1)
    n = m.shape[0]
    if seed.shape[0] != n:
        raise ValueError(f"seed_vector length {seed.shape[0]} does not match matrix dimension {n}")
    diag = m.diagonal().real
    if diag.size and diag.min() < -1e-12:
        raise ValueError("matrix is not positive semidefinite (negative diagonal entry)")
    return _power_core(m, seed, power)


def _power_core(m: np.ndarray, seed: np.ndarray, power: int) -> tuple[np.ndarray, bool]:
    """Validation-free power step for internal callers whose matrices are
    Hermitian PSD by construction."""
    fallback = np.zeros(m.shape[0], dtype=np.complex128)
    fallback[0] = 1.0

    # Scaling by the largest diagonal entry keeps the dominant component of
    # the powered matrix between 1 and n**power, so neither overflow nor a
    # spurious underflow past the degeneracy threshold can occur.
    scale = m.diagonal().real.max() if m.shape[0] else 0.0
    if scale <= 0.0:
        return fallback, True

    powered = np.linalg.matrix_power(m / scale, power) @ seed
    norm = np.linalg.norm(powered)
    if norm < _DEGENERATE_NORM:
        return fallback, True
    return canonical_phase(powered / norm), False


def _gram_rcond(gram_eigvals: np.ndarray) -> float:
    top = gram_eigvals[-1]
    if top <= 0.0:
        return 0.0
    return max(gram_eigvals[0], 0.0) / top


def gram_right_pseudo_apply(columns, rhs) -> np.ndarray:
    """Apply the right pseudo-inverse of ``columns.conj().T``.

    For an n-by-m matrix A with full column rank and a length-m right-hand
    side b, returns ``x = A (A^H A)^{-1} b`` so that ``A^H x == b``.  The
    relative residual of that identity is refined to below
    ``PSEUDO_INVERSE_RESIDUAL_TOL``.

    Raises
    ------
    RankDeficiencyError
        when the Gram matrix A^H A is numerically singular (reciprocal
        condition estimate below ``GRAM_RCOND_FLOOR``), or when refinement
        cannot reach the residual tolerance.
    """
    a = as_complex_matrix(columns, "columns")
    b = as_complex_vector(rhs, "rhs")
    n, m = a.shape
    if m > n:
        raise ValueError(f"columns must be tall or square, got shape {a.shape}")
    if b.shape[0] != m:
        raise ValueError(f"rhs length {b.shape[0]} does not match column count {m}")

    gram = a.conj().T @ a
    gram = (gram + gram.conj().T) / 2.0
    eigvals = np.linalg.eigvalsh(gram)
    if _gram_rcond(eigvals) < GRAM_RCOND_FLOOR:
        raise RankDeficiencyError(
            f"Gram matrix is numerically singular (rcond ~ {_gram_rcond(eigvals):.2e})"
        )

    rhs_norm = np.linalg.norm(b)
    if rhs_norm == 0.0:
        return np.zeros(n, dtype=np.complex128)

    z = np.linalg.solve(gram, b)
    # Iterative refinement against the true operator A^H(A z): each round
    # shrinks the residual by roughly cond(gram) * eps, so solves near the
    # conditioning floor still reach the promised tolerance.
    for _ in range(12):
        residual = b - a.conj().T @ (a @ z)
        if np.linalg.norm(residual) / rhs_norm <= PSEUDO_INVERSE_RESIDUAL_TOL:
            break
        z = z + np.linalg.solve(gram, residual)
    residual = b - a.conj().T @ (a @ z)
    if np.linalg.norm(residual) / rhs_norm > PSEUDO_INVERSE_RESIDUAL_TOL:
        raise RankDeficiencyError(
            "pseudo-inverse solve could not reach the residual tolerance "
            f"({np.linalg.norm(residual) / rhs_norm:.2e} > {PSEUDO_INVERSE_RESIDUAL_TOL})"
        )
    return a @ z


def condition_ratio(columns) -> float:
    """Ratio of the largest to smallest singular value of a matrix, computed
    from the eigenvalues of its Gram matrix.  Rank-deficient input maps to
    ``inf`` rather than an error, since the ratio is used as a diagnostic."""
    a = as_complex_matrix(columns, "columns")
    gram = a.conj().T @ a
    gram = (gram + gram.conj().T) / 2.0
    eigvals = np.linalg.eigvalsh(gram)
    top = eigvals[-1]
    if top <= 0.0:
        return float("inf")
    bottom = eigvals[0]
    # eigvalsh on an exactly singular Gram matrix returns a smallest
    # eigenvalue at rounding level; treat anything below it as rank loss.
    if bottom <= top * 1e-14:
        return float("inf")
    return float(np.sqrt(top / bottom))
