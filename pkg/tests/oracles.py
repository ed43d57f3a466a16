"""Independent oracles used to cross-check the library.

Everything here is deliberately written without reusing the library's own
computation paths: the eigensolver is a hand-rolled cyclic Jacobi iteration,
the power-gain evaluator uses explicit elementwise loops, the Gaussian tail
is numerically integrated, and the beamforming optimum comes from a direct
grid search over the weight parameterization.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate


def jacobi_hermitian_eig(matrix, sweeps: int = 60, tol: float = 1e-13):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi
    rotations.  Returns (eigenvalues ascending, eigenvectors as columns)."""
    a = np.array(matrix, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                scale = abs(a[p, p]) + abs(a[q, q])
                if abs(apq) <= tol * max(scale, 1.0):
                    continue
                off = max(off, abs(apq))
                # Phase rotation makes the pivot real, then a real Jacobi
                # rotation annihilates it.
                phase = apq / abs(apq)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * abs(apq))
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n, dtype=np.complex128)
                rot[p, p] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                rot[q, q] = c
                a = rot.conj().T @ a @ rot
                v = v @ rot
        if off <= tol:
            break
    eigvals = a.diagonal().real
    order = np.argsort(eigvals)
    return eigvals[order], v[:, order]


def power_gain_loops(channel, tx_weights, rx_weights) -> float:
    """Power gain evaluated with explicit per-path, per-element loops."""
    total = 0.0
    n_t, n_r = channel.arrays.n_t, channel.arrays.n_r
    scale = np.sqrt(n_t * n_r)
    for path in channel.paths:
        g = [np.exp(1j * np.pi * k * path.omega_r) / np.sqrt(n_r) for k in range(n_r)]
        h = [np.exp(1j * np.pi * k * path.omega_t) / np.sqrt(n_t) for k in range(n_t)]
        acc = 0.0 + 0.0j
        for i in range(n_r):
            for j in range(n_t):
                acc += np.conj(rx_weights[i]) * scale * g[i] * path.coefficient * np.conj(h[j]) * tx_weights[j]
        total += abs(acc) ** 2
    return total


def gaussian_tail(x: float) -> float:
    """Q(x) by numeric quadrature of the standard normal density."""
    value, _ = integrate.quad(
        lambda t: np.exp(-t * t / 2.0) / np.sqrt(2.0 * np.pi), x, np.inf
    )
    return value


def single_path_mean_pep(snr: float, array_product: float, min_distance: float = np.sqrt(2.0)) -> float:
    """Closed-form mean bounded PEP for one path with unit-variance fading:
    E[Q(d*sqrt(snr*N*t/2))] over t ~ Exp(1), by quadrature."""
    value, _ = integrate.quad(
        lambda t: gaussian_tail(min_distance * np.sqrt(snr * array_product * t / 2.0))
        * np.exp(-t),
        0.0,
        np.inf,
        limit=200,
    )
    return value


def _weights_from_params(theta, phi):
    """Unit vector in C^2 up to global phase: [cos(theta), sin(theta)e^{j phi}]."""
    return np.array([np.cos(theta), np.sin(theta) * np.exp(1j * phi)])


def grid_search_gain_2x2(channel, resolution: float = 1e-3):
    """Global maximum of the power gain for n_t = n_r = 2 by a direct grid
    search over both weight vectors (amplitude angle + relative phase at each
    end), refined until the grid step drops below ``resolution``."""
    matrices = [channel.path_matrix(i) for i in range(channel.num_paths)]

    def gain(theta_t, phi_t, theta_r, phi_r):
        w_t = _weights_from_params(theta_t, phi_t)
        w_r = _weights_from_params(theta_r, phi_r)
        return sum(abs(w_r.conj() @ m @ w_t) ** 2 for m in matrices)

    def gain_grid(tt, pt, tr, pr):
        # Broadcast evaluation over a 4-D parameter grid.
        w_t = np.stack(
            [
                np.cos(tt)[:, None] * np.ones_like(pt)[None, :],
                np.sin(tt)[:, None] * np.exp(1j * pt)[None, :],
            ],
            axis=-1,
        )  # (T, P, 2)
        w_r = np.stack(
            [
                np.cos(tr)[:, None] * np.ones_like(pr)[None, :],
                np.sin(tr)[:, None] * np.exp(1j * pr)[None, :],
            ],
            axis=-1,
        )
        total = 0.0
        for m in matrices:
            # (T, P, 2) @ (2, 2) -> projected transmit side
            mt = w_t @ m.T  # w_t index order matches m @ w_t with transpose
            # gain entry: w_r^H (m w_t) over all combinations
            total = total + np.abs(np.einsum("abi,cdi->abcd", mt, w_r.conj())) ** 2
        return total

    theta = np.linspace(0.0, np.pi / 2.0, 16)
    phi = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    centers = None
    spans = (np.pi / 2.0, 2.0 * np.pi, np.pi / 2.0, 2.0 * np.pi)
    grids = (theta, phi, theta.copy(), phi.copy())
    best = -1.0
    while True:
        tt, pt, tr, pr = grids
        values = gain_grid(tt, pt, tr, pr)
        flat = int(np.argmax(values))
        idx = np.unravel_index(flat, values.shape)
        best = float(values[idx])
        centers = (tt[idx[0]], pt[idx[1]], tr[idx[2]], pr[idx[3]])
        steps = [g[1] - g[0] if len(g) > 1 else 0.0 for g in grids]
        if max(steps) < resolution:
            break
        grids = tuple(
            np.linspace(c - s, c + s, 9)
            for c, s in zip(centers, steps)
        )
    return best, centers


def convolve_loops(symbols, taps):
    """Linear convolution with explicit loops."""
    out = np.zeros(len(symbols) + len(taps) - 1, dtype=np.complex128)
    for i, s in enumerate(symbols):
        for k, t in enumerate(taps):
            out[i + k] += s * t
    return out


def mmse_solve_explicit(taps, received, snr, block_size):
    """Normal-equations MMSE solve with an explicitly assembled convolution
    matrix and an explicit inverse."""
    taps = np.asarray(taps, dtype=np.complex128)
    rows = len(received)
    h = np.zeros((rows, block_size), dtype=np.complex128)
    for j in range(block_size):
        for k, t in enumerate(taps):
            if j + k < rows:
                h[j + k, j] = t
    a = h.conj().T @ h + np.eye(block_size) / snr
    return np.linalg.inv(a) @ (h.conj().T @ received) / np.sqrt(snr)
