"""
asymptotic.py — Asymptotic Maslov Indices and Graph Scans

Long-horizon averages of the angular index along single orbits:
- asymptotic_index: αMI(0, T)/T at a list of horizons with a Cauchy-gap
  convergence diagnostic
- measure_index_estimate: the same average after a burn-in, i.e. the index
  of the empirical measure of the orbit
- graph_scan: seeds points on the graph of a closed 1-form, tracks the
  running MI at every integer time and reports the point whose index stays
  smallest
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from config import BURN_IN_FRACTION, DEFAULT_DT, DEFAULT_TOLERANCES, Tolerances
from dynamics.flow import tangent_flow
from dynamics.systems import ConformalSystem
from symplectic.linalg import LagrangianFrame
from utils.errors import ConfigError, NonCompactOrbitError, NumericalError
from utils.logger import get_logger
from .maslov_path import TWO_PI, angular_mi, checkpoint_indices, lift_delta

logger = get_logger(__name__)


# ══════════════════════════════════════════════════════════════════════════════
# Asymptotic index at a point
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class AsymptoticEstimate:
    """
    Partial rates αMI(0, T)/T at increasing horizons.

    converged is True iff cauchy_gap < conv_tol. mi_rate is MI(0, T_max)/T_max
    when the final endpoint is transverse to the vertical.
    """

    rate: float
    horizons: tuple[float, ...]
    partials: tuple[float, ...]
    cauchy_gap: float
    converged: bool
    mi_rate: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "rate": self.rate,
            "horizons": list(self.horizons),
            "partials": list(self.partials),
            "cauchy_gap": self.cauchy_gap if math.isfinite(self.cauchy_gap) else None,
            "converged": self.converged,
            "mi_rate": self.mi_rate,
        }


def _check_horizons(horizons: Sequence[float]) -> list[float]:
    values = [float(T) for T in horizons]
    if not values:
        raise ConfigError("At least one horizon is required")
    if values[0] <= 0 or any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"Horizons must be positive and strictly increasing, got {values}")
    return values


def asymptotic_index(
    system: ConformalSystem,
    x0,
    L0: LagrangianFrame,
    horizons: Sequence[float],
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AsymptoticEstimate:
    """
    Asymptotic angular index of L0 along the orbit of x0.

    Args:
        system: Conformal system
        x0: Initial state
        L0: Initial Lagrangian frame
        horizons: Increasing positive horizons T
        dt: RK4 step
        tol: Tolerances (conv_tol, conv_window)

    Returns:
        AsymptoticEstimate; non-convergence is reported, not raised
    """
    values = _check_horizons(horizons)
    result = tangent_flow(system, x0, (0.0, values[-1]), dt, L0, track_matrix=False,
                          checkpoints=values, tol=tol)
    path = result.frame_path()
    lifted, _ = lift_delta(path)
    idx = np.searchsorted(path.times, values)
    partials = [(lifted[k] - lifted[0]) / (TWO_PI * T) for k, T in zip(idx, values)]

    window = partials[-tol.conv_window:]
    gap = float(max(window) - min(window)) if len(window) >= 2 else math.inf
    converged = gap < tol.conv_tol

    mi_final = checkpoint_indices(path, [len(path.times) - 1], lifted)[0]
    mi_rate = None if mi_final is None else mi_final / values[-1]
    estimate = AsymptoticEstimate(
        rate=float(partials[-1]),
        horizons=tuple(values),
        partials=tuple(float(p) for p in partials),
        cauchy_gap=gap,
        converged=converged,
        mi_rate=mi_rate,
    )
    if not converged:
        logger.warning(f"Asymptotic rate not converged: Cauchy gap {gap:.3e} >= {tol.conv_tol:.1e}")
    logger.info(f"Asymptotic index of {system.name} at {list(np.asarray(x0))}: rate {estimate.rate:.8g}")
    return estimate


def dynamical_alpha_mi(
    system: ConformalSystem,
    x0,
    L0: LagrangianFrame,
    t: float,
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Angular index of t -> Dφ_s(L0), s ∈ [0, t]."""
    result = tangent_flow(system, x0, (0.0, t), dt, L0, track_matrix=False, tol=tol)
    return angular_mi(result.frame_path())


def measure_index_estimate(
    system: ConformalSystem,
    x0,
    L0: LagrangianFrame,
    T: float,
    burn_in: float | None = None,
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    Time average αMI(burn_in, T) / (T - burn_in) along the orbit of x0.

    Raises:
        ConfigError: if T <= burn_in or burn_in < 0
        NonCompactOrbitError: if the orbit (angles reduced mod 2π) leaves escape_bound
    """
    if burn_in is None:
        burn_in = BURN_IN_FRACTION * T
    if burn_in < 0 or T <= burn_in:
        raise ConfigError(f"Need 0 <= burn_in < T, got burn_in = {burn_in}, T = {T}")
    result = tangent_flow(system, x0, (0.0, T), dt, L0, track_matrix=False,
                          checkpoints=[burn_in], tol=tol)
    reach = np.max(np.abs(result.trajectory.wrapped()), axis=1)
    escaped = np.flatnonzero(reach > tol.escape_bound)
    if escaped.size:
        t_esc = result.times[escaped[0]]
        raise NonCompactOrbitError(
            f"Orbit leaves the escape bound {tol.escape_bound:.3g} at t = {t_esc:.6g}"
        )
    path = result.frame_path()
    lifted, _ = lift_delta(path)
    k = int(np.searchsorted(path.times, burn_in))
    return float((lifted[-1] - lifted[k]) / (TWO_PI * (T - burn_in)))


# ══════════════════════════════════════════════════════════════════════════════
# Graph scans
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class GraphParam:
    """
    Closed 1-form c + dF with F(q) = Σ a cos(k·q) + b sin(k·q).

    Attributes:
        constant: cohomology class c (length d)
        modes: (a, b, k) triples
    """

    constant: tuple[float, ...]
    modes: tuple[tuple[float, float, tuple[float, ...]], ...] = ()

    @property
    def dim(self) -> int:
        return len(self.constant)

    @classmethod
    def zero_section(cls, d: int) -> "GraphParam":
        return cls((0.0,) * d)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], d: int) -> "GraphParam":
        constant = tuple(float(c) for c in raw.get("constant", [0.0] * d))
        modes = []
        for mode in raw.get("modes", []):
            k = tuple(float(v) for v in mode["k"])
            if len(k) != d:
                raise ConfigError(f"Graph mode wave vector {k} does not match dimension {d}")
            modes.append((float(mode.get("a", 0.0)), float(mode.get("b", 0.0)), k))
        if len(constant) != d:
            raise ConfigError(f"Graph constant must have {d} entries")
        return cls(constant, tuple(modes))

    def to_dict(self) -> dict[str, Any]:
        return {
            "constant": list(self.constant),
            "modes": [{"a": a, "b": b, "k": list(k)} for a, b, k in self.modes],
        }

    def momentum(self, q: np.ndarray) -> np.ndarray:
        """p = c + ∇F(q)."""
        p = np.array(self.constant, dtype=float)
        for a, b, k in self.modes:
            kv = np.asarray(k)
            s = float(kv @ q)
            p += (-a * math.sin(s) + b * math.cos(s)) * kv
        return p

    def hessian(self, q: np.ndarray) -> np.ndarray:
        H = np.zeros((self.dim, self.dim))
        for a, b, k in self.modes:
            kv = np.asarray(k)
            s = float(kv @ q)
            H += (-a * math.cos(s) - b * math.sin(s)) * np.outer(kv, kv)
        return H

    def frame(self, q: np.ndarray) -> LagrangianFrame:
        """Tangent space of the graph at q: columns [I; Hess F(q)]."""
        return LagrangianFrame(np.vstack([np.eye(self.dim), self.hessian(q)]))


def seed_points(system: ConformalSystem, n_points: int) -> np.ndarray:
    """
    Base points q for a scan: a uniform grid for d <= 2, an unscrambled
    Halton sequence for d >= 3. Angle coordinates cover [0, 2π), line
    coordinates [-π, π).

    In d = 2 the ceil(√n)² grid is thinned to n points at evenly spaced
    positions of its row-major order, so every row keeps seeds.
    """
    d = system.dim
    lo = np.array([0.0 if a else -math.pi for a in system.angle_coords])
    if d == 1:
        unit = (np.arange(n_points) / n_points)[:, None]
    elif d == 2:
        m = math.ceil(math.sqrt(n_points))
        axis = np.arange(m) / m
        grid = np.array(np.meshgrid(axis, axis, indexing="ij")).reshape(2, -1).T
        keep = np.round(np.linspace(0, m * m - 1, n_points)).astype(int)
        unit = grid[keep]
    else:
        unit = qmc.Halton(d=d, scramble=False).random(n_points)
    return lo + TWO_PI * unit


@dataclass(frozen=True, eq=False)
class ScanResult:
    """
    Running-index bounds for every seeded point.

    running_mi_bounds holds (min, max) of MI over the integer checkpoints
    (NaN rows for failed points); best is the point minimizing max|MI|.
    """

    graph_param: GraphParam
    points: np.ndarray
    running_mi_bounds: np.ndarray
    skips: np.ndarray
    failures: dict[int, str]
    best_index: int | None
    horizon: float
    bound_violations: int = 0

    @property
    def best(self) -> np.ndarray | None:
        return None if self.best_index is None else self.points[self.best_index]

    @property
    def best_bound(self) -> int | None:
        if self.best_index is None:
            return None
        lo, hi = self.running_mi_bounds[self.best_index]
        return int(max(abs(lo), abs(hi)))

    def summary(self) -> dict[str, Any]:
        return {
            "graph": self.graph_param.to_dict(),
            "horizon": self.horizon,
            "n_points": int(len(self.points)),
            "n_failed": len(self.failures),
            "best_index": self.best_index,
            "best_point": None if self.best is None else self.best.tolist(),
            "best_bound": self.best_bound,
            "bound_violations": self.bound_violations,
            "failures": {str(k): v for k, v in sorted(self.failures.items())},
        }


@dataclass(frozen=True)
class _PointOutcome:
    index: int
    bounds: tuple[int, int] | None = None
    skips: int = 0
    bound_violations: int = 0
    error: str | None = None


def _scan_point(
    system: ConformalSystem,
    graph: GraphParam,
    index: int,
    q0: np.ndarray,
    T: float,
    dt: float,
    tol: Tolerances,
) -> _PointOutcome:
    d = system.dim
    x0 = np.concatenate([q0, graph.momentum(q0)])
    checkpoints = [float(k) for k in range(1, int(math.floor(T)) + 1)]
    try:
        result = tangent_flow(system, x0, (0.0, T), dt, graph.frame(q0), track_matrix=False,
                              checkpoints=checkpoints, tol=tol)
        path = result.frame_path()
        lifted, _ = lift_delta(path)
        idx = np.searchsorted(path.times, checkpoints)
        mis = checkpoint_indices(path, idx, lifted)
    except NumericalError as e:
        logger.warning(f"Scan point {index} failed: {e}")
        return _PointOutcome(index, error=str(e))
    defined = [(k, mi) for k, mi in zip(idx, mis) if mi is not None]
    values = [0] + [mi for _, mi in defined]
    alphas = [(lifted[k] - lifted[0]) / TWO_PI for k, _ in defined]
    violations = sum(1 for a, (_, mi) in zip(alphas, defined) if abs(a - mi) >= d)
    skips = len(mis) - len(defined)
    if skips:
        logger.debug(f"Scan point {index}: {skips} checkpoint(s) on the singular cycle")
    return _PointOutcome(index, (min(values), max(values)), skips, violations)


def graph_scan(
    system: ConformalSystem,
    graph: GraphParam,
    n_points: int,
    T: float,
    dt: float = DEFAULT_DT,
    mapper: Callable[[Callable[[int], _PointOutcome], Iterable[int]], Iterable[_PointOutcome]] = map,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ScanResult:
    """
    Track the running MI of the graph's tangent spaces from n_points seeds.

    Args:
        system: Conformal system
        graph: Closed 1-form defining the initial Lagrangian graph
        n_points: Number of seeds (>= 1)
        T: Horizon; MI is evaluated at every integer time in (0, T]
        dt: RK4 step
        mapper: map-like callable; pass a thread-pool map to scan concurrently
        tol: Tolerances

    Returns:
        ScanResult; failed points are recorded and excluded from the best point
    """
    if n_points < 1:
        raise ConfigError(f"n_points must be positive, got {n_points}")
    if graph.dim != system.dim:
        raise ConfigError(f"Graph has dimension {graph.dim}, system has {system.dim}")
    qs = seed_points(system, n_points)

    def work(i: int) -> _PointOutcome:
        return _scan_point(system, graph, i, qs[i], T, dt, tol)

    outcomes = sorted(mapper(work, range(len(qs))), key=lambda o: o.index)
    bounds = np.full((len(qs), 2), np.nan)
    skips = np.zeros(len(qs), dtype=int)
    failures: dict[int, str] = {}
    violations = 0
    for o in outcomes:
        if o.error is not None:
            failures[o.index] = o.error
            continue
        bounds[o.index] = o.bounds
        skips[o.index] = o.skips
        violations += o.bound_violations

    ok = np.flatnonzero(~np.isnan(bounds[:, 0]))
    best_index = None
    if ok.size:
        worst_abs = np.max(np.abs(bounds[ok]), axis=1)
        best_index = int(ok[np.argmin(worst_abs)])
    points = np.column_stack([qs, np.array([graph.momentum(q) for q in qs])])
    result = ScanResult(graph, points, bounds, skips, failures, best_index, float(T), violations)
    logger.info(
        f"Graph scan of {system.name}: {len(qs)} points, {len(failures)} failed, "
        f"best bound {result.best_bound}"
    )
    return result
