"""
maslov_path.py — Maslov Indices of Sampled Lagrangian Paths

Two independent ways to count how a path of Lagrangian subspaces winds
around the vertical V = {q = 0}:

- Angular index (αMI): continuous lift of arg Δ(Γ(t)) divided by 2π. The
  integer index MI follows from the identity
      αMI = (1/π) Σ_j (θ_j(b) - θ_j(a)) + MI
  by rounding, which is robust to near-tangential crossings.
- Crossing count: each time an angle passes the cut at π/2 (mod π) it is
  located by bisection and signed +1 when it increases through the cut,
  -1 when it decreases. The sign of every crossing is also recomputed from
  the jump of the index of the height form Q_H(V, Γ(t)).

Paths generated by a flow carry a refinement callback, so steps that are
too coarse to unwrap are bisected instead of aliased.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

import config
from config import DEFAULT_TOLERANCES, EIGEN_PIN_TOL, Tolerances
from symplectic.angles import half_arguments, souriau_stack, unitary_frames
from symplectic.linalg import (
    CoisotropicData,
    LagrangianFrame,
    height,
    linear_reduce,
    omega_matrix,
    orthonormalize,
)
from utils.errors import (
    AliasingError,
    DegenerateCrossingError,
    EndpointOnSigmaError,
    FrameError,
    ResidualError,
    TangentialCrossingError,
    TransversalityError,
)
from utils.logger import get_logger

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi

Refiner = Callable[[float], np.ndarray]


def _wrap(x):
    """Reduce phases to (-π, π]."""
    return math.pi - np.mod(math.pi - x, TWO_PI)


def _as_frame_array(value: Any) -> np.ndarray:
    if isinstance(value, LagrangianFrame):
        return np.asarray(value.columns)
    return np.asarray(value, dtype=float)


# ══════════════════════════════════════════════════════════════════════════════
# Paths
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class LagrangianPath:
    """
    Time-stamped Lagrangian frames, optionally refinable.

    Attributes:
        times: strictly increasing sample times (n,)
        frames: frames at the sample times (n, 2d, d); stored orthonormalized
        refine: callback t -> 2d x d frame at any t in [times[0], times[-1]];
            must be safe for re-entrant calls
        tol: tolerances used for validation and index computations

    Raises:
        FrameError: if a frame is malformed, rank deficient or not isotropic
        ValueError: if the times are not strictly increasing
    """

    times: np.ndarray
    frames: np.ndarray
    refine: Refiner | None = None
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        raw = np.asarray(self.frames, dtype=float)
        if len(times) < 1:
            raise ValueError("A Lagrangian path needs at least one sample")
        if raw.ndim != 3 or raw.shape[0] != len(times):
            raise FrameError(
                f"Expected {len(times)} frames of shape 2d x d, got array of shape {raw.shape}"
            )
        n, rows, d = raw.shape
        if rows != 2 * d:
            raise FrameError(f"Dimension mismatch for path frames: expected 2d x d, got {rows} x {d}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Path times must be strictly increasing")
        if not np.all(np.isfinite(raw)):
            raise FrameError("Path frames contain non-finite entries")

        gram = np.einsum("nri,nrj->nij", raw, raw)
        if np.max(np.abs(gram - np.eye(d))) <= config.ORTHONORMAL_TOL:
            # flow-generated frames arrive orthonormal
            Q = raw.copy()
        else:
            sv = np.linalg.svd(raw, compute_uv=False)
            ratio = np.where(sv[:, 0] > 0, sv[:, -1] / np.where(sv[:, 0] > 0, sv[:, 0], 1.0), 0.0)
            bad = np.flatnonzero(ratio <= self.tol.rank_tol)
            if bad.size:
                raise FrameError(f"Path frame at t = {times[bad[0]]:.6g} is rank deficient")
            Q = orthonormalize(raw)
        iso = np.max(np.abs(np.swapaxes(Q, 1, 2) @ omega_matrix(d) @ Q), axis=(1, 2))
        bad = np.flatnonzero(iso > self.tol.iso_tol)
        if bad.size:
            raise FrameError(
                f"Path frame at t = {times[bad[0]]:.6g} is not isotropic "
                f"(max|F^T Ω F| = {iso[bad[0]]:.3e})"
            )
        times.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "frames", Q)

    # ── basic accessors ──────────────────────────────────────────────────────

    @property
    def dim(self) -> int:
        return self.frames.shape[2]

    @property
    def size(self) -> int:
        return len(self.times)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def horizon(self) -> float:
        return self.end - self.start

    @property
    def refinable(self) -> bool:
        return self.refine is not None

    def frame(self, k: int) -> LagrangianFrame:
        return LagrangianFrame(self.frames[k], self.tol)

    def frame_array_at(self, t: float) -> np.ndarray:
        """
        Orthonormal frame at time t: a stored sample or a refined evaluation.

        Raises:
            AliasingError: if t is not a sample time and the path is not refinable
        """
        k = int(np.searchsorted(self.times, t))
        if k < self.size and self.times[k] == t:
            return self.frames[k]
        if self.refine is None:
            raise AliasingError(f"Path is not refinable; no frame at t = {t:.6g}")
        if t < self.start or t > self.end:
            raise ValueError(f"t = {t:.6g} lies outside [{self.start:.6g}, {self.end:.6g}]")
        return orthonormalize(_as_frame_array(self.refine(t)))

    # ── constructors ─────────────────────────────────────────────────────────

    @classmethod
    def from_frames(
        cls,
        times: Sequence[float],
        frames: Sequence[LagrangianFrame | np.ndarray],
        refine: Refiner | None = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
    ) -> "LagrangianPath":
        """Static path from a list of frames (not refinable unless a callback is given)."""
        stack = np.stack([_as_frame_array(F) for F in frames])
        return cls(np.asarray(times, dtype=float), stack, refine, tol)

    @classmethod
    def from_function(
        cls,
        func: Callable[[float], LagrangianFrame | np.ndarray],
        times: Sequence[float],
        tol: Tolerances = DEFAULT_TOLERANCES,
    ) -> "LagrangianPath":
        """Refinable path sampling an analytic family t -> frame."""
        times = np.asarray(times, dtype=float)

        def refine(t: float) -> np.ndarray:
            return _as_frame_array(func(t))

        return cls(times, np.stack([refine(t) for t in times]), refine, tol)

    # ── path algebra ─────────────────────────────────────────────────────────

    def reversed(self) -> "LagrangianPath":
        """Same subspaces traversed backwards over the same time interval."""
        total = self.start + self.end
        refine = None
        if self.refine is not None:
            inner = self.refine

            def refine(t: float) -> np.ndarray:
                return inner(total - t)

        return LagrangianPath(total - self.times[::-1], self.frames[::-1], refine, self.tol)

    def concatenate(self, other: "LagrangianPath", junction_tol: float = 1e-8) -> "LagrangianPath":
        """
        This path followed by `other`, whose times are shifted to start at self.end.

        Raises:
            FrameError: if the end of this path and the start of `other` differ
        """
        if other.dim != self.dim:
            raise FrameError("Cannot concatenate paths of different dimension")
        P1 = self.frames[-1] @ self.frames[-1].T
        P2 = other.frames[0] @ other.frames[0].T
        if np.max(np.abs(P1 - P2)) > junction_tol:
            raise FrameError("Concatenated paths do not share the junction subspace")
        offset = self.end - other.start
        times = np.concatenate([self.times, other.times[1:] + offset])
        frames = np.concatenate([self.frames, other.frames[1:]])
        refine = None
        if self.refine is not None and other.refine is not None:
            first, second, junction = self.refine, other.refine, self.end

            def refine(t: float) -> np.ndarray:
                return first(t) if t <= junction else second(t - offset)

        return LagrangianPath(times, frames, refine, self.tol)

    def transformed(self, M: np.ndarray | Callable[[float], np.ndarray]) -> "LagrangianPath":
        """Image of every frame under a constant matrix M or a family t -> M(t)."""
        matrix_at = M if callable(M) else (lambda t, _M=np.asarray(M, dtype=float): _M)
        frames = np.stack([matrix_at(t) @ F for t, F in zip(self.times, self.frames)])
        refine = None
        if self.refine is not None:
            inner = self.refine

            def refine(t: float) -> np.ndarray:
                return matrix_at(t) @ _as_frame_array(inner(t))

        return LagrangianPath(self.times, frames, refine, self.tol)


def reduced_path(W: CoisotropicData, path: LagrangianPath) -> LagrangianPath:
    """Image of a path under linear coisotropic reduction by W (frame by frame)."""
    frames = [linear_reduce(W, path.frame(k)).columns for k in range(path.size)]
    refine = None
    if path.refine is not None:
        inner = path.refine

        def refine(t: float) -> np.ndarray:
            return linear_reduce(W, LagrangianFrame(_as_frame_array(inner(t)), path.tol)).columns

    return LagrangianPath.from_frames(path.times, frames, refine, path.tol)


# ══════════════════════════════════════════════════════════════════════════════
# Angular index
# ══════════════════════════════════════════════════════════════════════════════

def _delta_args(frames: np.ndarray) -> np.ndarray:
    """arg Δ = arg((-1)^d det(Z)^2) for a stack of orthonormal frames."""
    d = frames.shape[-1]
    det = np.linalg.det(unitary_frames(frames))
    return np.angle((-1) ** d * det ** 2)


def _phase_step(
    path: LagrangianPath, t_a: float, t_b: float, phi_a: float, phi_b: float, depth: int
) -> tuple[float, int]:
    """Lifted increment of arg Δ on [t_a, t_b], bisecting while it exceeds the guard."""
    step = float(_wrap(phi_b - phi_a))
    if abs(step) <= path.tol.unwrap_guard:
        return step, 0
    if path.refine is None:
        raise AliasingError(
            f"arg Δ jumps by {step:.3f} between t = {t_a:.6g} and t = {t_b:.6g} "
            "on a path that cannot be refined"
        )
    if depth >= path.tol.max_refine_depth:
        raise AliasingError(f"Phase step near t = {t_a:.6g} still exceeds the guard after {depth} halvings")
    t_m = 0.5 * (t_a + t_b)
    phi_m = float(_delta_args(path.frame_array_at(t_m)[None])[0])
    left, n_left = _phase_step(path, t_a, t_m, phi_a, phi_m, depth + 1)
    right, n_right = _phase_step(path, t_m, t_b, phi_m, phi_b, depth + 1)
    return left + right, n_left + n_right + 1


def lift_delta(path: LagrangianPath) -> tuple[np.ndarray, int]:
    """
    Continuous lift of arg Δ along the path.

    Returns:
        (lifted arguments at every sample, number of refinement bisections)

    Raises:
        AliasingError: if a step exceeds unwrap_guard and cannot be refined
    """
    phases = _delta_args(path.frames)
    steps = _wrap(np.diff(phases))
    refinements = 0
    for k in np.flatnonzero(np.abs(steps) > path.tol.unwrap_guard):
        steps[k], n = _phase_step(
            path, path.times[k], path.times[k + 1], phases[k], phases[k + 1], 0
        )
        refinements += n
    if refinements:
        logger.debug(f"Phase unwrapping refined {refinements} interval(s)")
    lifted = phases[0] + np.concatenate([[0.0], np.cumsum(steps)])
    return lifted, refinements


def angular_mi(path: LagrangianPath) -> float:
    """αMI = (θ(b) - θ(a)) / 2π for the lifted argument θ of Δ."""
    lifted, _ = lift_delta(path)
    return float((lifted[-1] - lifted[0]) / TWO_PI)


# ══════════════════════════════════════════════════════════════════════════════
# Integer index via the angular identity
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Crossing:
    """A located passage of one angle through the cut at π/2."""

    time: float
    sign: int
    min_angle_distance: float
    height_sign: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "time": self.time,
            "sign": self.sign,
            "min_angle_distance": self.min_angle_distance,
            "height_sign": self.height_sign,
        }


@dataclass(frozen=True)
class IndexReport:
    """
    Result of an index computation on one path.

    Attributes:
        alpha_mi: angular index αMI
        mi: integer index, or None when undefined
        boundary_term: (1/π) Σ (θ_j(b) - θ_j(a)) with branch angles
        residual: alpha_mi - boundary_term - mi
        crossings: located crossings (crossing count only)
        aliasing_flag: True when unwrapping had to refine coarse steps
        deep_stratum: True when two angles came within stratum_tol of the cut together
        coorientation_mismatches: crossings whose height-form sign disagreed
    """

    alpha_mi: float
    mi: int | None
    boundary_term: float
    residual: float
    crossings: tuple[Crossing, ...] = ()
    aliasing_flag: bool = False
    deep_stratum: bool = False
    coorientation_mismatches: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "alpha_mi": self.alpha_mi,
            "mi": self.mi,
            "boundary_term": self.boundary_term,
            "residual": self.residual,
            "crossings": [c.to_dict() for c in self.crossings],
            "aliasing_flag": self.aliasing_flag,
            "deep_stratum": self.deep_stratum,
            "coorientation_mismatches": self.coorientation_mismatches,
        }


@dataclass(frozen=True, eq=False)
class RunningIndex:
    """
    Indices of the sub-paths [t0, t_k] for every sample k.

    mi and residual hold NaN where the index is undefined (an endpoint meets V).
    """

    times: np.ndarray
    arg_delta: np.ndarray
    alpha_mi: np.ndarray
    boundary_term: np.ndarray
    mi: np.ndarray
    residual: np.ndarray
    vert_dim: np.ndarray
    deep_stratum: np.ndarray
    refinements: int = 0

    def mi_at(self, k: int) -> int | None:
        value = self.mi[k]
        return None if np.isnan(value) else int(value)

    def defined_mi(self) -> np.ndarray:
        return self.mi[~np.isnan(self.mi)].astype(int)


def _branch_angles(frames: np.ndarray) -> np.ndarray:
    return half_arguments(np.linalg.eigvals(souriau_stack(frames)))


def _vertical_dims(frames: np.ndarray, rank_tol: float) -> np.ndarray:
    d = frames.shape[-1]
    sv = np.linalg.svd(frames[:, :d, :], compute_uv=False)
    return np.count_nonzero(sv <= rank_tol, axis=1)


def running_maslov(path: LagrangianPath) -> RunningIndex:
    """
    αMI and MI of the path restricted to [t0, t_k], for every sample time.

    Raises:
        AliasingError: if the phase cannot be unwrapped
        ResidualError: if the angular identity leaves a non-integer residual
    """
    tol = path.tol
    lifted, refinements = lift_delta(path)
    theta = _branch_angles(path.frames)
    branch = theta.sum(axis=1)
    alpha = (lifted - lifted[0]) / TWO_PI
    boundary = (branch - branch[0]) / math.pi
    vert = _vertical_dims(path.frames, tol.rank_tol)

    raw = alpha - boundary
    defined = (vert == 0) & (vert[0] == 0)
    mi = np.where(defined, np.round(raw), np.nan)
    residual = np.where(defined, raw - np.where(defined, mi, 0.0), np.nan)
    bad = np.flatnonzero(defined & (np.abs(np.nan_to_num(residual)) >= tol.residual_tol))
    if bad.size:
        k = bad[0]
        raise ResidualError(
            f"Angular identity residual {residual[k]:.3e} at t = {path.times[k]:.6g} "
            f"exceeds {tol.residual_tol:.1e}"
        )

    near_cut = (math.pi / 2 - np.abs(theta)) < tol.stratum_tol
    deep = np.count_nonzero(near_cut, axis=1) >= 2
    return RunningIndex(
        times=path.times,
        arg_delta=lifted,
        alpha_mi=alpha,
        boundary_term=boundary,
        mi=mi,
        residual=residual,
        vert_dim=vert,
        deep_stratum=deep,
        refinements=refinements,
    )


def checkpoint_indices(
    path: LagrangianPath,
    sample_indices: Sequence[int],
    lifted: np.ndarray | None = None,
) -> list[int | None]:
    """
    MI over [t0, t_k] for selected samples k only (None where an endpoint meets V).

    Args:
        path: Lagrangian path
        sample_indices: indices into path.times
        lifted: lifted arg Δ from lift_delta, if already computed

    Raises:
        ResidualError: if the angular identity leaves a non-integer residual
    """
    if lifted is None:
        lifted, _ = lift_delta(path)
    idx = np.asarray(sample_indices, dtype=int)
    frames = path.frames[np.concatenate([[0], idx])]
    branch = _branch_angles(frames).sum(axis=1)
    vert = _vertical_dims(frames, path.tol.rank_tol)
    out: list[int | None] = []
    for j, k in enumerate(idx, start=1):
        if vert[0] or vert[j]:
            out.append(None)
            continue
        raw = (lifted[k] - lifted[0]) / TWO_PI - (branch[j] - branch[0]) / math.pi
        mi = round(raw)
        if abs(raw - mi) >= path.tol.residual_tol:
            raise ResidualError(
                f"Angular identity residual {raw - mi:.3e} at t = {path.times[k]:.6g}"
            )
        out.append(int(mi))
    return out


def _check_endpoints(path: LagrangianPath, vert: np.ndarray) -> None:
    if vert[0]:
        raise EndpointOnSigmaError(
            f"Path start (t = {path.start:.6g}) meets the vertical in dimension {vert[0]}"
        )
    if vert[-1]:
        raise EndpointOnSigmaError(
            f"Path end (t = {path.end:.6g}) meets the vertical in dimension {vert[-1]}"
        )


def index_report(path: LagrangianPath) -> IndexReport:
    """
    Angular index, integer index and reconciliation residual of a path.

    Raises:
        EndpointOnSigmaError: if Γ(a) or Γ(b) meets the vertical
        ResidualError: if |αMI - boundary - MI| >= residual_tol
        AliasingError: if the phase cannot be unwrapped
    """
    running = running_maslov(path)
    _check_endpoints(path, running.vert_dim)
    deep = bool(np.any(running.deep_stratum))
    if deep:
        logger.warning("Path passes near a deeper stratum of the singular cycle")
    return IndexReport(
        alpha_mi=float(running.alpha_mi[-1]),
        mi=int(running.mi[-1]),
        boundary_term=float(running.boundary_term[-1]),
        residual=float(running.residual[-1]),
        aliasing_flag=running.refinements > 0,
        deep_stratum=deep,
    )


def maslov_index(path: LagrangianPath) -> int:
    """Integer Maslov index by rounding αMI - boundary term."""
    mi = index_report(path).mi
    assert mi is not None
    return mi


# ══════════════════════════════════════════════════════════════════════════════
# Crossing count
# ══════════════════════════════════════════════════════════════════════════════

def _cut_offsets(frames: np.ndarray) -> np.ndarray:
    """
    Offsets χ = 2θ - π (mod 2π) of the angles from the cut, per frame.

    χ ∈ (-π, π]; χ <= 0 just below the cut (θ -> π/2) and χ > 0 just above
    it (θ -> -π/2). Eigenvalues pinned to -1 give χ = 0.
    """
    lam = np.linalg.eigvals(souriau_stack(frames))
    chi = np.angle(-lam)
    return np.where(np.abs(lam + 1.0) <= EIGEN_PIN_TOL, 0.0, chi)


def _match(chi0: np.ndarray, chi1: np.ndarray) -> np.ndarray:
    """Increments of each χ in chi0, matched to chi1 by minimal circular distance."""
    if len(chi0) == 1:
        return _wrap(chi1 - chi0)
    cost = np.abs(_wrap(chi1[None, :] - chi0[:, None]))
    rows, cols = linear_sum_assignment(cost)
    delta = np.empty_like(chi0)
    delta[rows] = _wrap(chi1[cols] - chi0[rows])
    return delta


class _Sample(NamedTuple):
    t: float
    chi: np.ndarray


class _CrossingScanner:
    """Walks a refinable path, locating and signing cut crossings."""

    def __init__(self, path: LagrangianPath):
        self.path = path
        self.tol = path.tol
        self.horizon = max(path.horizon, np.finfo(float).tiny)
        self.time_tol = self.tol.time_tol * self.horizon
        self.crossings: list[Crossing] = []
        self.mismatches = 0

    def chi_at(self, t: float) -> np.ndarray:
        return _cut_offsets(self.path.frame_array_at(t)[None])[0]

    def scan(self, a: _Sample, b: _Sample, depth: int = 0) -> None:
        delta = _match(a.chi, b.chi)
        if np.max(np.abs(delta)) > self.tol.crossing_guard:
            if depth >= self.tol.max_refine_depth:
                raise AliasingError(f"Angles near t = {a.t:.6g} move too fast to track")
            t_m = 0.5 * (a.t + b.t)
            m = _Sample(t_m, self.chi_at(t_m))
            self.scan(a, m, depth + 1)
            self.scan(m, b, depth + 1)
            return
        for c0, dc in zip(a.chi, delta):
            c1 = c0 + dc
            if c0 <= 0.0 < c1:
                self._locate(a.t, b.t, c0, c1, +1)
            elif c1 <= 0.0 < c0:
                self._locate(a.t, b.t, c0, c1, -1)

    @staticmethod
    def _track(chi: np.ndarray, target: float) -> float:
        offsets = _wrap(chi - target)
        return float(target + offsets[np.argmin(np.abs(offsets))])

    def _locate(self, t_lo: float, t_hi: float, v_lo: float, v_hi: float, sign: int) -> None:
        tol = self.tol
        min_width = max(self.time_tol, 4.0 * np.finfo(float).eps * max(abs(t_lo), abs(t_hi)))
        while t_hi - t_lo > min_width:
            t_m = 0.5 * (t_lo + t_hi)
            v_m = self._track(self.chi_at(t_m), 0.5 * (v_lo + v_hi))
            if (v_m <= 0.0) == (sign > 0):
                t_lo, v_lo = t_m, v_m
            else:
                t_hi, v_hi = t_m, v_m
        t_c = 0.5 * (t_lo + t_hi)

        offset = max(1e-6 * self.horizon, 100.0 * self.time_tol)
        left = max(self.path.start, t_c - offset)
        right = min(self.path.end, t_c + offset)
        velocity = 0.5 * (self._track(self.chi_at(right), 0.0) - self._track(self.chi_at(left), 0.0))
        velocity /= right - left
        if abs(velocity) < tol.vel_tol:
            raise TangentialCrossingError(
                f"Tangential crossing at t = {t_c:.6g}: angle velocity {velocity:.3e}"
            )

        chi_c = np.sort(np.abs(self.chi_at(t_c)))
        if np.count_nonzero(chi_c <= tol.degeneracy_tol) >= 2:
            raise DegenerateCrossingError(f"Several angles reach the cut together at t = {t_c:.6g}")
        distance = float(chi_c[1] / 2.0) if len(chi_c) > 1 else math.pi / 2

        signed = sign * config.CROSSING_ORIENTATION
        h_sign = self._height_sign(t_c, abs(velocity))
        if h_sign is not None and h_sign != signed:
            self.mismatches += 1
            logger.warning(
                f"Crossing at t = {t_c:.6g}: angle sign {signed:+d}, height-form sign {h_sign:+d}"
            )
        logger.debug(f"Crossing at t = {t_c:.9g}, sign {signed:+d}, velocity {velocity:.3e}")
        self.crossings.append(Crossing(t_c, signed, distance, h_sign))

    def _height_sign(self, t_c: float, speed: float) -> int | None:
        """index Q_H(V, Γ(t-)) - index Q_H(V, Γ(t+)), or None if undecidable."""
        offset = min(1e-3 / max(2.0 * speed, 1e-12), 1e-3 * self.horizon)
        t_before = max(self.path.start, t_c - offset)
        t_after = min(self.path.end, t_c + offset)
        d = self.path.dim
        H = LagrangianFrame.horizontal(d)
        V = LagrangianFrame.vertical(d)
        try:
            before = height(H, V, LagrangianFrame(self.path.frame_array_at(t_before), self.tol))
            after = height(H, V, LagrangianFrame(self.path.frame_array_at(t_after), self.tol))
        except (TransversalityError, FrameError):
            return None
        if before.nullity or after.nullity:
            return None
        return before.index - after.index


def crossing_mi(path: LagrangianPath) -> IndexReport:
    """
    Maslov index as the signed count of crossings with the vertical.

    Raises:
        EndpointOnSigmaError: if an endpoint meets the vertical
        AliasingError: if the path is not refinable or angles cannot be tracked
        TangentialCrossingError: at a crossing with vanishing angle velocity
        DegenerateCrossingError: when two angles reach the cut at once
    """
    if not path.refinable:
        raise AliasingError("Crossing counting requires a refinable path")
    vert = _vertical_dims(path.frames, path.tol.rank_tol)
    _check_endpoints(path, vert)

    scanner = _CrossingScanner(path)
    chi = _cut_offsets(path.frames)
    for k in range(path.size - 1):
        scanner.scan(_Sample(path.times[k], chi[k]), _Sample(path.times[k + 1], chi[k + 1]))
    crossings = tuple(sorted(scanner.crossings, key=lambda c: c.time))
    mi = int(sum(c.sign for c in crossings))

    lifted, refinements = lift_delta(path)
    theta = _branch_angles(path.frames[[0, -1]])
    alpha = float((lifted[-1] - lifted[0]) / TWO_PI)
    boundary = float((theta[1].sum() - theta[0].sum()) / math.pi)
    logger.info(
        f"Crossing count: {len(crossings)} crossing(s), MI = {mi}, "
        f"{scanner.mismatches} coorientation mismatch(es)"
    )
    return IndexReport(
        alpha_mi=alpha,
        mi=mi,
        boundary_term=boundary,
        residual=alpha - boundary - mi,
        crossings=crossings,
        aliasing_flag=refinements > 0,
        coorientation_mismatches=scanner.mismatches,
    )
