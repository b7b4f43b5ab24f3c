"""
angles.py — Unitary Representatives, Angles and the Δ Map

Identifies R^2d with C^d through z = q + i p. A g-orthonormal frame A of a
Lagrangian L gives the unitary Z = A_q + i A_p; the symmetric unitary
W = Z Z^T (Souriau map) does not depend on the frame and has eigenvalues
e^{2iθ_j}, θ_j ∈ (-π/2, π/2] the angles of L with respect to the horizontal.
Δ(L) = (-1)^d det(Z)^2 = exp(2i Σ θ_j) exp(i d π).
"""

import math
from dataclasses import dataclass

import numpy as np

from config import DEFAULT_TOLERANCES, DELTA_CHECK_TOL, EIGEN_PIN_TOL
from utils.errors import DeltaConsistencyError
from .linalg import LagrangianFrame


@dataclass(frozen=True, eq=False)
class AngleSpectrum:
    """Sorted angles θ_1 <= ... <= θ_d, each in (-π/2, π/2]."""

    angles: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.angles)

    def vertical_count(self, angle_tol: float = DEFAULT_TOLERANCES.angle_tol) -> int:
        """Number of angles within angle_tol of π/2, i.e. dim(L ∩ V)."""
        dist = np.minimum(np.abs(self.angles - math.pi / 2), np.abs(self.angles + math.pi / 2))
        return int(np.count_nonzero(dist <= angle_tol))


@dataclass(frozen=True)
class DeltaValue:
    """Unit complex number Δ(L) and its argument in (-π, π]."""

    value: complex
    arg: float


def unitary_frame(L: LagrangianFrame) -> np.ndarray:
    """Unitary matrix Z = A_q + i A_p for the orthonormal frame A of L."""
    return L.q_block + 1j * L.p_block


def unitary_frames(frames: np.ndarray) -> np.ndarray:
    """Stacked version of unitary_frame for an (n, 2d, d) array of orthonormal frames."""
    d = frames.shape[-1]
    return frames[..., :d, :] + 1j * frames[..., d:, :]


def souriau(L: LagrangianFrame) -> np.ndarray:
    """Frame-independent symmetric unitary W = Z Z^T."""
    Z = unitary_frame(L)
    return Z @ Z.T


def souriau_stack(frames: np.ndarray) -> np.ndarray:
    """Souriau maps of an (n, 2d, d) stack of orthonormal frames."""
    Z = unitary_frames(frames)
    return Z @ np.swapaxes(Z, -1, -2)


def half_arguments(eigenvalues: np.ndarray) -> np.ndarray:
    """
    Map unit eigenvalues e^{2iθ} to θ ∈ (-π/2, π/2].

    Eigenvalues within EIGEN_PIN_TOL of -1 map to π/2 exactly, so the sign of
    a vanishing imaginary part cannot flip the branch.
    """
    theta = 0.5 * np.angle(eigenvalues)
    pinned = np.abs(eigenvalues + 1.0) <= EIGEN_PIN_TOL
    return np.where(pinned, math.pi / 2, theta)


def angles(L: LagrangianFrame) -> AngleSpectrum:
    """Angles of L with respect to the horizontal H = JV."""
    eig = np.linalg.eigvals(souriau(L))
    return AngleSpectrum(np.sort(half_arguments(eig)))


def delta(L: LagrangianFrame) -> DeltaValue:
    """
    Δ(L) = (-1)^d det(Z)^2.

    Raises:
        DeltaConsistencyError: if det^2 and exp(2iΣθ) exp(idπ) disagree beyond DELTA_CHECK_TOL
    """
    d = L.dim
    value = complex((-1) ** d * np.linalg.det(unitary_frame(L)) ** 2)
    from_angles = complex(np.exp(2j * np.sum(angles(L).angles)) * np.exp(1j * d * math.pi))
    if abs(value - from_angles) > DELTA_CHECK_TOL:
        raise DeltaConsistencyError(
            f"Δ mismatch: det^2 gives {value:.12g}, angle sum gives {from_angles:.12g}"
        )
    return DeltaValue(value, float(np.angle(value)))
