"""
flow.py — Fixed-Step RK4 Flow and Linearized Flow

Integrates, with one set of RK4 stages:
- the base trajectory x' = X(t, x)
- the variational matrix M' = DX(t, x) M, M(t0) = I          (optional)
- a transported Lagrangian frame Y' = DX(t, x) Y             (optional)
- the log conformal factor s' = -a(t), so M^T Ω M = e^s Ω

Y is re-orthonormalized after every step (same subspace, fresh basis), so
long horizons keep the Lagrangian subspace even when M itself overflows.
Conformality of M is monitored, never enforced.

The time grid is uniform between checkpoints, so every checkpoint and the
final time are exact grid points. Coefficient-table Hamiltonians step in the
compiled kernels of dynamics.kernels; any other Hamiltonian uses the Python
stepper, which also serves the partial steps of frame refinement.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

import config
from config import DEFAULT_TOLERANCES, Tolerances
from analysis.maslov_path import LagrangianPath
from symplectic.linalg import LagrangianFrame, omega_matrix, orthonormalize
from utils.errors import ConfigError, FrameError, IsotropyDriftError, NonFiniteStateError
from utils.logger import get_logger
from . import kernels
from .hamiltonians import PolyTrigHamiltonian
from .systems import ConformalSystem

logger = get_logger(__name__)


# ══════════════════════════════════════════════════════════════════════════════
# Result types
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class TangentBlocks:
    """
    Linearized flow M = [[a_t, b_t], [c_t, d_t]] in (q, p) blocks.

    Columns of M are the images of the horizontal-then-vertical basis at the
    initial point; log_factor is s(t) = -∫ a.
    """

    matrix: np.ndarray
    log_factor: float = 0.0

    @property
    def dim(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def a_t(self) -> np.ndarray:
        return self.matrix[: self.dim, : self.dim]

    @property
    def b_t(self) -> np.ndarray:
        return self.matrix[: self.dim, self.dim:]

    @property
    def c_t(self) -> np.ndarray:
        return self.matrix[self.dim:, : self.dim]

    @property
    def d_t(self) -> np.ndarray:
        return self.matrix[self.dim:, self.dim:]

    @property
    def conformal_factor(self) -> float:
        return math.exp(self.log_factor)

    def conformal_defect(self) -> float:
        """max |M^T Ω M - e^s Ω|."""
        omega = omega_matrix(self.dim)
        return float(np.max(np.abs(self.matrix.T @ omega @ self.matrix - self.conformal_factor * omega)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled base trajectory; states keep the unwrapped lift of angle coordinates."""

    times: np.ndarray
    states: np.ndarray
    system: ConformalSystem

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def wrapped(self) -> np.ndarray:
        """States with angle coordinates reduced to [0, 2π)."""
        return self.system.wrap(self.states)


def transport_frame(blocks: TangentBlocks, L: LagrangianFrame) -> LagrangianFrame:
    """
    Image M·L, re-orthonormalized.

    Raises:
        IsotropyDriftError: if the image is no longer Lagrangian
    """
    try:
        return LagrangianFrame(blocks.matrix @ L.columns, L.tol)
    except FrameError as e:
        raise IsotropyDriftError(f"Transported frame is not Lagrangian: {e}") from e


# ══════════════════════════════════════════════════════════════════════════════
# Time grid and RK4
# ══════════════════════════════════════════════════════════════════════════════

def time_grid(t0: float, t1: float, dt: float, checkpoints: Sequence[float] = ()) -> np.ndarray:
    """
    Grid from t0 to t1 (either direction) with steps at most dt, containing
    every checkpoint strictly between them.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if t1 == t0:
        return np.array([float(t0)])
    direction = 1.0 if t1 > t0 else -1.0
    inner = {float(c) for c in checkpoints if min(t0, t1) < c < max(t0, t1)}
    knots = sorted(inner | {float(t0), float(t1)}, key=lambda c: direction * c)
    pieces = []
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(1, math.ceil(abs(b - a) / dt - 1e-9))
        pieces.append(np.linspace(a, b, n + 1)[:-1])
    pieces.append(np.array([float(t1)]))
    return np.concatenate(pieces)


def _axpy(base: np.ndarray | None, h: float, slope: np.ndarray | None) -> np.ndarray | None:
    return None if base is None else base + h * slope


class _CoupledRK4:
    """One RK4 step of (x, M, Y, s); x is frozen when the orbit is an equilibrium."""

    def __init__(self, system: ConformalSystem, pinned: bool):
        self.system = system
        self.pinned = pinned
        self._pinned_jacobian: np.ndarray | None = None

    def _derivs(self, t, x, M, Y):
        if self.pinned:
            if self._pinned_jacobian is None:
                self._pinned_jacobian = self.system.jacobian(t, x)
            X, A = np.zeros_like(x), self._pinned_jacobian
        else:
            X, A = self.system.field_and_jacobian(t, x)
        dM = None if M is None else A @ M
        dY = None if Y is None else A @ Y
        return X, dM, dY, -self.system.rate_at(t)

    def step(self, t, h, x, M, Y, s):
        x1, M1, Y1, s1 = self._derivs(t, x, M, Y)
        half = 0.5 * h
        x2, M2, Y2, s2 = self._derivs(
            t + half, x + half * x1, _axpy(M, half, M1), _axpy(Y, half, Y1)
        )
        x3, M3, Y3, s3 = self._derivs(
            t + half, x + half * x2, _axpy(M, half, M2), _axpy(Y, half, Y2)
        )
        x4, M4, Y4, s4 = self._derivs(t + h, x + h * x3, _axpy(M, h, M3), _axpy(Y, h, Y3))
        sixth = h / 6.0
        x_new = x + sixth * (x1 + 2 * x2 + 2 * x3 + x4)
        M_new = None if M is None else M + sixth * (M1 + 2 * M2 + 2 * M3 + M4)
        Y_new = None if Y is None else orthonormalize(Y + sixth * (Y1 + 2 * Y2 + 2 * Y3 + Y4))
        s_new = s + sixth * (s1 + 2 * s2 + 2 * s3 + s4)
        return x_new, M_new, Y_new, s_new


def _check_finite(t: float, *arrays) -> None:
    for arr in arrays:
        if arr is not None and not np.all(np.isfinite(arr)):
            raise NonFiniteStateError(f"Non-finite state at t = {t:.6g}")


def uses_compiled_kernel(system: ConformalSystem) -> bool:
    return bool(config.COMPILED_RK4) and isinstance(system.hamiltonian, PolyTrigHamiltonian)


def _stage_rates(system: ConformalSystem, grid: np.ndarray) -> np.ndarray:
    """Rate a at t_k, t_k + h/2 and t_{k+1} for every step, shape (n - 1, 3)."""
    h = np.diff(grid)
    if system.constant_rate:
        return np.full((len(h), 3), system.rate_at(0.0))
    rows = [(system.rate_at(t), system.rate_at(t + 0.5 * dh), system.rate_at(t + dh))
            for t, dh in zip(grid[:-1], h)]
    return np.array(rows, dtype=float).reshape(-1, 3)


def _log_factors(grid: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """s(t_k) = -∫ a by the RK4 quadrature of the steps."""
    h = np.diff(grid)
    increments = -h / 6.0 * (rates[:, 0] + 4.0 * rates[:, 1] + rates[:, 2])
    return np.concatenate([[0.0], np.cumsum(increments)])


def _compiled_run(
    system: ConformalSystem,
    grid: np.ndarray,
    x: np.ndarray,
    M: np.ndarray | None,
    Y: np.ndarray | None,
    pinned: bool,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None, np.ndarray]:
    """States, matrices, frames and log factors over grid from the compiled kernel."""
    coef, powers, trig, kvec = system.hamiltonian.coefficient_arrays()
    n, D = len(grid), len(x)
    blocks = [b for b in (M, Y) if b is not None]
    Z0 = np.ascontiguousarray(np.hstack(blocks), dtype=float) if blocks else np.zeros((D, 0))
    frame_start = D if M is not None else 0
    rates = _stage_rates(system, grid)
    states = np.empty((n, D))
    tangents = np.empty((n, D, Z0.shape[1]))
    failed = kernels.rk4_table(coef, powers, trig, kvec, np.ascontiguousarray(grid), rates,
                               np.ascontiguousarray(x), Z0, frame_start, bool(pinned),
                               states, tangents)
    if failed >= 0:
        raise NonFiniteStateError(f"Non-finite state at t = {grid[failed]:.6g}")
    matrices = tangents[:, :, :frame_start] if M is not None else None
    frames = tangents[:, :, frame_start:] if Y is not None else None
    return states, matrices, frames, _log_factors(grid, rates)


def is_equilibrium(system: ConformalSystem, x0: np.ndarray, t0: float, tol: Tolerances) -> bool:
    """True for autonomous systems whose field vanishes at x0 (within equilibrium_tol)."""
    if not system.autonomous:
        return False
    X = system.field(t0, x0)
    return bool(np.linalg.norm(X) <= tol.equilibrium_tol * (1.0 + np.linalg.norm(x0)))


# ══════════════════════════════════════════════════════════════════════════════
# Tangent flow
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class TangentFlowResult:
    """
    Samples of the coupled integration.

    Attributes:
        trajectory: base trajectory
        matrices: M(t_k) (n, 2d, 2d), or None when not tracked
        frames: orthonormal frames of Dφ_t(L0) (n, 2d, d), or None without L0
        log_factors: s(t_k) = -∫ a
        pinned: True when x0 was held fixed as an equilibrium
    """

    trajectory: Trajectory
    matrices: np.ndarray | None
    frames: np.ndarray | None
    log_factors: np.ndarray
    pinned: bool = False
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)
    _stepper: _CoupledRK4 | None = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times

    def blocks(self, k: int = -1) -> TangentBlocks:
        if self.matrices is None:
            raise ValueError("Linearized matrix was not tracked (track_matrix=False)")
        return TangentBlocks(self.matrices[k], float(self.log_factors[k]))

    def conformal_defects(self) -> np.ndarray:
        """
        Relative defect max|M^T Ω M - e^s Ω| / max(1, max|M|^2) per sample;
        NaN when M was not tracked.
        """
        if self.matrices is None:
            return np.full(len(self.times), np.nan)
        M = self.matrices
        d = M.shape[1] // 2
        omega = omega_matrix(d)
        gram = np.swapaxes(M, 1, 2) @ omega @ M
        target = np.exp(self.log_factors)[:, None, None] * omega
        defect = np.max(np.abs(gram - target), axis=(1, 2))
        scale = np.maximum(1.0, np.max(np.abs(M), axis=(1, 2)) ** 2)
        return defect / scale

    def frame_at(self, t: float) -> np.ndarray:
        """Frame at any t inside the integrated interval (one partial RK4 step)."""
        if self.frames is None or self._stepper is None:
            raise ValueError("No frame was transported")
        times = self.times
        forward = times[-1] >= times[0]
        key = times if forward else -times
        k = int(np.searchsorted(key, t if forward else -t, side="right")) - 1
        k = min(max(k, 0), len(times) - 1)
        if times[k] == t:
            return self.frames[k]
        x = self.trajectory.states[k]
        _, _, Y, _ = self._stepper.step(
            float(times[k]), t - float(times[k]), x, None, self.frames[k], float(self.log_factors[k])
        )
        return Y

    def frame_path(self) -> LagrangianPath:
        """Refinable path t -> Dφ_t(L0) over the integrated (forward) interval."""
        if self.frames is None:
            raise ValueError("No frame was transported")
        if len(self.times) > 1 and self.times[-1] < self.times[0]:
            raise ValueError("Frame paths need a forward time interval")
        return LagrangianPath(self.times, self.frames, self.frame_at, self.tol)


def tangent_flow(
    system: ConformalSystem,
    x0,
    t_span: tuple[float, float],
    dt: float,
    L0: LagrangianFrame | None = None,
    track_matrix: bool = True,
    checkpoints: Sequence[float] = (),
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TangentFlowResult:
    """
    Integrate the trajectory together with its linearization.

    Args:
        system: Conformal system
        x0: Initial state (q, p), length 2d
        t_span: (t0, t1); t1 < t0 integrates backwards
        dt: Largest RK4 step
        L0: Optional initial Lagrangian frame to transport
        track_matrix: Also integrate the full matrix M
        checkpoints: Times that must be exact grid points
        tol: Tolerances (conformal_tol, equilibrium_tol)

    Returns:
        TangentFlowResult with samples at every grid point

    Raises:
        NonFiniteStateError: if the state, M or the frame stops being finite
    """
    x = np.asarray(x0, dtype=float).ravel().copy()
    d = system.dim
    if len(x) != 2 * d:
        raise ConfigError(f"Initial state has {len(x)} entries, expected {2 * d}")
    if L0 is not None and L0.dim != d:
        raise FrameError(f"Initial frame has dimension {L0.dim}, system has {d}")
    t0, t1 = float(t_span[0]), float(t_span[1])
    grid = time_grid(t0, t1, dt, checkpoints)
    n = len(grid)

    pinned = is_equilibrium(system, x, t0, tol)
    if pinned:
        logger.debug(f"Initial state {x} is an equilibrium; holding it fixed")
    stepper = _CoupledRK4(system, pinned)

    M = np.eye(2 * d) if track_matrix else None
    Y = np.array(L0.columns) if L0 is not None else None
    if uses_compiled_kernel(system):
        states, matrices, frames, logs = _compiled_run(system, grid, x, M, Y, pinned)
    else:
        states = np.empty((n, 2 * d))
        logs = np.empty(n)
        matrices = np.empty((n, 2 * d, 2 * d)) if track_matrix else None
        frames = np.empty((n, 2 * d, d)) if L0 is not None else None
        s = 0.0
        states[0], logs[0] = x, s
        if matrices is not None:
            matrices[0] = M
        if frames is not None:
            frames[0] = Y
        for k in range(n - 1):
            t, h = grid[k], grid[k + 1] - grid[k]
            x, M, Y, s = stepper.step(t, h, x, M, Y, s)
            _check_finite(grid[k + 1], x, M, Y)
            states[k + 1], logs[k + 1] = x, s
            if matrices is not None:
                matrices[k + 1] = M
            if frames is not None:
                frames[k + 1] = Y

    result = TangentFlowResult(
        Trajectory(grid, states, system), matrices, frames, logs, pinned, tol, stepper
    )
    if matrices is not None:
        worst = float(np.max(result.conformal_defects()))
        if worst > tol.conformal_tol:
            logger.warning(
                f"Conformal defect {worst:.3e} exceeds {tol.conformal_tol:.1e} "
                f"({system.name}, dt = {dt})"
            )
    logger.debug(f"Integrated {system.name} over [{t0:.6g}, {t1:.6g}] in {n - 1} steps")
    return result


def flow(
    system: ConformalSystem,
    x0,
    t_span: tuple[float, float],
    dt: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> Trajectory:
    """Fixed-step RK4 trajectory (angle coordinates reduced only by Trajectory.wrapped)."""
    x = np.asarray(x0, dtype=float).ravel().copy()
    if len(x) != 2 * system.dim:
        raise ConfigError(f"Initial state has {len(x)} entries, expected {2 * system.dim}")
    grid = time_grid(float(t_span[0]), float(t_span[1]), dt)
    pinned = is_equilibrium(system, x, grid[0], tol)
    if uses_compiled_kernel(system):
        states, _, _, _ = _compiled_run(system, grid, x, None, None, pinned)
        return Trajectory(grid, states, system)
    stepper = _CoupledRK4(system, pinned)
    states = np.empty((len(grid), len(x)))
    states[0] = x
    for k in range(len(grid) - 1):
        x, _, _, _ = stepper.step(grid[k], grid[k + 1] - grid[k], x, None, None, 0.0)
        _check_finite(grid[k + 1], x)
        states[k + 1] = x
    return Trajectory(grid, states, system)


def lagrangian_path(
    system: ConformalSystem,
    x0,
    L0: LagrangianFrame,
    t_span: tuple[float, float],
    dt: float,
    checkpoints: Sequence[float] = (),
    track_matrix: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[LagrangianPath, TangentFlowResult]:
    """Flow-generated refinable path Γ(t) = Dφ_t(L0) and the underlying integration."""
    result = tangent_flow(system, x0, t_span, dt, L0, track_matrix, checkpoints, tol)
    return result.frame_path(), result
