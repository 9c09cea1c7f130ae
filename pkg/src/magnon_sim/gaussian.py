"""
Covariance-matrix algebra for n-mode Gaussian states.

Quadratures are ordered (X_1, Y_1, X_2, Y_2, ...) with X = (a + a†)/√2 and
Y = i(a† - a)/√2, so the vacuum covariance matrix is I/2.  For the three-mode
system the mode order is (cavity, magnon 1, magnon 2).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

CAVITY, MAGNON_1, MAGNON_2 = 0, 1, 2

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
# radicand of the smallest symplectic eigenvalue is clamped to zero inside this band
RADICAND_TOL = 1e-9


class UnphysicalStateError(ValueError):
    """Raised when a covariance matrix violates the uncertainty principle."""


def _n_modes(cm: NDArray[np.float64]) -> int:
    dim = cm.shape[0]
    if cm.ndim != 2 or cm.shape[1] != dim or dim % 2:
        raise ValueError(f"covariance matrix must be square with even dimension, got {cm.shape}")
    return dim // 2


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form with per-mode blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def vacuum_cm(n_modes: int) -> NDArray[np.float64]:
    return 0.5 * np.eye(2 * n_modes)


def mode_block(cm: NDArray[np.float64], i: int, j: int | None = None) -> NDArray[np.float64]:
    """The 2x2 block of ``cm`` coupling mode ``i`` to mode ``j`` (diagonal block when j is None)."""
    j = i if j is None else j
    return cm[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]


def mode_population(cm: NDArray[np.float64], mode: int) -> float:
    """Mean excitation number <a†a> = (σ_xx + σ_yy - 1)/2 of one mode."""
    n = _n_modes(cm)
    if not 0 <= mode < n:
        raise IndexError(f"mode {mode} out of range for {n}-mode state")
    return 0.5 * (cm[2 * mode, 2 * mode] + cm[2 * mode + 1, 2 * mode + 1] - 1.0)


def populations(cm: NDArray[np.float64]) -> NDArray[np.float64]:
    diag = np.diag(cm)
    return 0.5 * (diag[0::2] + diag[1::2] - 1.0)


def reduce_two_mode(cm: NDArray[np.float64], i: int, j: int) -> NDArray[np.float64]:
    """
    Reduced 4x4 covariance matrix of modes ``i`` and ``j``.

    Returns [[Φ_i, Φ_ij], [Φ_ijᵀ, Φ_j]] where Φ_ij is the cross block.
    """
    n = _n_modes(cm)
    if i == j:
        raise ValueError("reduce_two_mode needs two distinct modes")
    for k in (i, j):
        if not 0 <= k < n:
            raise IndexError(f"mode {k} out of range for {n}-mode state")
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    return cm[np.ix_(idx, idx)].copy()


def physicality_margin(cm: NDArray[np.float64]) -> float:
    """Smallest eigenvalue of the Hermitian matrix σ + (i/2)Ω; physical states give >= 0."""
    n = _n_modes(cm)
    herm = cm + 0.5j * symplectic_form(n)
    return float(np.linalg.eigvalsh(herm)[0])


def is_physical(cm: NDArray[np.float64], tol: float = PHYSICALITY_TOL) -> bool:
    return bool(np.max(np.abs(cm - cm.T)) <= SYMMETRY_TOL * max(1.0, np.max(np.abs(cm)))) and (
        physicality_margin(cm) >= -tol
    )


def smallest_symplectic_eigenvalue_pt(cm4: NDArray[np.float64]) -> float:
    """
    Smallest symplectic eigenvalue η⁻ of the partially transposed two-mode state.

    Uses the determinant invariants W = det Φ_1 + det Φ_2 - 2 det Φ_12 and det σ,
    η⁻² = (W - sqrt(W² - 4 det σ))/2.
    """
    if cm4.shape != (4, 4):
        raise ValueError(f"expected a 4x4 covariance matrix, got {cm4.shape}")
    a = np.linalg.det(cm4[:2, :2])
    b = np.linalg.det(cm4[2:, 2:])
    c = np.linalg.det(cm4[:2, 2:])
    w = a + b - 2.0 * c
    det_full = np.linalg.det(cm4)
    disc = w * w - 4.0 * det_full
    if disc < 0.0:
        if disc < -RADICAND_TOL:
            raise UnphysicalStateError(f"W^2 - 4 det(sigma) = {disc:.3e} < 0")
        disc = 0.0
    root = np.sqrt(disc)
    if w > 0.0:
        # equal to (W - root)/2 but free of the cancellation at strong squeezing
        radicand = 2.0 * det_full / (w + root)
    else:
        radicand = 0.5 * (w - root)
    if radicand < 0.0:
        if radicand < -RADICAND_TOL:
            raise UnphysicalStateError(f"negative symplectic radicand {radicand:.3e}")
        radicand = 0.0
    return float(np.sqrt(radicand))


def log_negativity(cm4: NDArray[np.float64]) -> float:
    """Logarithmic negativity max(0, -ln(2η⁻)) of a two-mode Gaussian state, in nats."""
    eta = smallest_symplectic_eigenvalue_pt(cm4)
    if eta == 0.0:
        raise UnphysicalStateError("vanishing symplectic eigenvalue, state is unphysical")
    return max(0.0, -float(np.log(2.0 * eta)))


def two_mode_squeezing_symplectic(r: float) -> NDArray[np.float64]:
    """Two-mode squeezer on (X_a, Y_a, X_b, Y_b); maps the vacuum to ``two_mode_squeezed_cm(r)``."""
    ch, sh = np.cosh(r), np.sinh(r)
    return np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )


def two_mode_squeezed_cm(r: float) -> NDArray[np.float64]:
    """Covariance matrix of the two-mode squeezed vacuum with squeezing ``r``."""
    if r < 0:
        raise ValueError("squeezing amplitude must be non-negative")
    diag = 0.5 * np.cosh(2.0 * r)
    off = 0.5 * np.sinh(2.0 * r)
    return np.array(
        [
            [diag, 0.0, off, 0.0],
            [0.0, diag, 0.0, -off],
            [off, 0.0, diag, 0.0],
            [0.0, -off, 0.0, diag],
        ]
    )


def thermal_cm(occupations) -> NDArray[np.float64]:
    """Product of thermal states with the given mean occupations."""
    occ = np.asarray(occupations, dtype=float)
    return np.diag(np.repeat(occ + 0.5, 2))


def phase_rotation(theta: float) -> NDArray[np.float64]:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def block_diag(*blocks: NDArray[np.float64]) -> NDArray[np.float64]:
    dim = sum(b.shape[0] for b in blocks)
    out = np.zeros((dim, dim))
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k : k + m, k : k + m] = b
        k += m
    return out


def symmetrize(cm: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (cm + cm.T)
