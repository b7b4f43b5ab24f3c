"""
twist.py — Twist Certificates and Their Index Consequences

The flow twists the vertical when ∂ₚX_q = ∂²H/∂p² is positive definite.
This module:
- samples ∂²H/∂p² on a grid and issues a TwistCertificate
- computes the height b_t d_t⁻¹ of the evolved vertical above the vertical
  in the horizontal chart, and its derivative at t0
- audits that every transported frame of a twisting system has MI <= 0
"""

import hashlib
import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from config import (
    DEFAULT_DT,
    DEFAULT_TOLERANCES,
    FD_SYMMETRY_TOL,
    SIGN_LAW_WINDOW,
    TWIST_GRID_POINTS,
    Tolerances,
)
from dynamics.flow import lagrangian_path, tangent_flow
from dynamics.systems import ConformalSystem
from symplectic.linalg import LagrangianFrame, SymmetricForm
from utils.errors import ConfigError, NumericalError, SingularBlockError
from utils.logger import get_logger
from utils.validators import check_symmetric
from .maslov_path import running_maslov

logger = get_logger(__name__)

STRICT_TWIST = "strict-twist"
SEMI_TWIST = "semi-twist"
FAIL = "fail"

# Largest grid a certificate evaluates before thinning the per-axis count
MAX_GRID_SIZE = 200_000


# ══════════════════════════════════════════════════════════════════════════════
# Twist certificate
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True, eq=False)
class TwistCertificate:
    """
    Sampled lower bound of ∂ₚX_q over a region.

    Attributes:
        grid: sampled points as rows (t, q_1..q_d, p_1..p_d)
        min_eig: smallest eigenvalue of ∂²H/∂p² over the grid
        margin: scale-aware zero threshold twist_margin * (1 + max|∂²H/∂p²|)
        verdict: strict-twist, semi-twist or fail
        witnesses: grid points attaining min_eig (within margin)
        certificate_id: digest of the system description and region
    """

    grid: np.ndarray
    min_eig: float
    margin: float
    verdict: str
    witnesses: np.ndarray
    certificate_id: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "certificate_id": self.certificate_id,
            "verdict": self.verdict,
            "min_eig": self.min_eig,
            "margin": self.margin,
            "grid_size": int(len(self.grid)),
            "witnesses": self.witnesses.tolist(),
        }


def twist_matrix(system: ConformalSystem, t: float, x: np.ndarray) -> np.ndarray:
    """∂ₚX_q = ∂²H/∂p² at (t, x), symmetrized after a finite-difference-tolerant check."""
    _, hess = system.hamiltonian.derivatives(t, np.asarray(x, dtype=float))
    d = system.dim
    return check_symmetric(hess[d:, d:], FD_SYMMETRY_TOL, "∂²H/∂p²")


def _certificate_id(system: ConformalSystem, region: np.ndarray, n: int, t: float) -> str:
    payload = json.dumps(
        {"system": system.describe(), "region": region.tolist(), "n": n, "t": t},
        sort_keys=True,
        default=str,
    )
    return "twist-" + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def twist_certificate(
    system: ConformalSystem,
    region: Sequence[Sequence[float]],
    grid_points: int = TWIST_GRID_POINTS,
    t: float = 0.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> TwistCertificate:
    """
    Certify the twist condition on a box of phase space.

    Args:
        system: Conformal system
        region: 2d intervals [lo, hi] for q_1..q_d, p_1..p_d
        grid_points: Points per axis (a degenerate interval uses one point)
        t: Time at which H is sampled
        tol: Tolerances (twist_margin)

    Returns:
        TwistCertificate

    Raises:
        ConfigError: if the region is unbounded or has the wrong dimension
        SymmetryError: if ∂²H/∂p² is not symmetric within finite-difference tolerance
    """
    d = system.dim
    box = np.asarray(region, dtype=float)
    if box.shape != (2 * d, 2):
        raise ConfigError(f"Region must hold {2 * d} intervals, got shape {box.shape}")
    if not np.all(np.isfinite(box)) or np.any(box[:, 1] < box[:, 0]):
        raise ConfigError("Region must be bounded with lo <= hi on every axis")
    if grid_points < 1:
        raise ConfigError(f"grid_points must be positive, got {grid_points}")

    n = grid_points
    while n > 2 and n ** (2 * d) > MAX_GRID_SIZE:
        n -= 1
    if n != grid_points:
        logger.warning(f"Twist grid thinned to {n} points per axis")
    axes = [np.linspace(lo, hi, n) if hi > lo else np.array([lo]) for lo, hi in box]
    points = np.array(list(itertools.product(*axes)))

    eigs = np.empty(len(points))
    scale = 0.0
    for i, x in enumerate(points):
        Hpp = twist_matrix(system, t, x)
        eigs[i] = np.linalg.eigvalsh(Hpp)[0]
        scale = max(scale, float(np.max(np.abs(Hpp))))

    min_eig = float(eigs.min())
    margin = tol.twist_margin * (1.0 + scale)
    if min_eig > margin:
        verdict = STRICT_TWIST
    elif min_eig >= -margin:
        verdict = SEMI_TWIST
    else:
        verdict = FAIL
    witnesses = points[eigs <= min_eig + margin][:10]
    grid = np.column_stack([np.full(len(points), t), points])
    cert = TwistCertificate(grid, min_eig, margin, verdict, witnesses,
                            _certificate_id(system, box, n, t))
    logger.info(f"Twist certificate {cert.certificate_id}: {verdict} (min eig {min_eig:.6g})")
    return cert


# ══════════════════════════════════════════════════════════════════════════════
# Evolved vertical height
# ══════════════════════════════════════════════════════════════════════════════

def evolved_vertical_height(
    system: ConformalSystem,
    x0,
    t0: float,
    t: float,
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SymmetricForm:
    """
    Height b_t d_t⁻¹ of Dφ_{t0→t}(V) above V in the horizontal chart.

    Raises:
        SingularBlockError: if d_t is singular (the evolved vertical meets the horizontal)
    """
    d = system.dim
    if t == t0:
        return SymmetricForm.from_matrix(np.zeros((d, d)))
    result = tangent_flow(system, x0, (t0, t), min(dt, abs(t - t0)), tol=tol)
    blocks = result.blocks(-1)
    s = np.linalg.svd(blocks.d_t, compute_uv=False)
    if s[-1] <= tol.rank_tol * max(1.0, s[0]):
        raise SingularBlockError(
            f"d_t is singular at t = {t:.6g} (smallest singular value {s[-1]:.3e})"
        )
    B = np.linalg.solve(blocks.d_t.T, blocks.b_t.T).T
    B = check_symmetric(B, math.sqrt(tol.conformal_tol), "b_t d_t⁻¹")
    return SymmetricForm.from_matrix(B)


def vertical_height_derivative(
    system: ConformalSystem,
    x0,
    t0: float,
    h: float = 1e-3,
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Central difference d/dt (b_t d_t⁻¹) at t0; equals ∂ₚX_q(t0, x0) up to O(h²)."""
    above = evolved_vertical_height(system, x0, t0, t0 + h, dt, tol).matrix
    below = evolved_vertical_height(system, x0, t0, t0 - h, dt, tol).matrix
    return (above - below) / (2.0 * h)


@dataclass(frozen=True, eq=False)
class SignLawReport:
    """Definiteness of b_t d_t⁻¹ on both sides of t0 and its derivative at t0."""

    offsets: tuple[float, ...]
    positive_above: bool
    negative_below: bool
    derivative: np.ndarray
    expected: np.ndarray

    @property
    def derivative_error(self) -> float:
        return float(np.max(np.abs(self.derivative - self.expected)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "offsets": list(self.offsets),
            "positive_above": self.positive_above,
            "negative_below": self.negative_below,
            "derivative": self.derivative.tolist(),
            "expected": self.expected.tolist(),
            "derivative_error": self.derivative_error,
        }


def sign_law_check(
    system: ConformalSystem,
    x0,
    t0: float = 0.0,
    window: tuple[float, float] = SIGN_LAW_WINDOW,
    dt: float = DEFAULT_DT,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SignLawReport:
    """
    Check that b_t d_t⁻¹ is positive definite just after t0, negative
    definite just before, with derivative ∂ₚX_q at t0.
    """
    offsets = tuple(float(h) for h in np.geomspace(window[0], window[1], 3))
    d = system.dim
    above, below = True, True
    for h in offsets:
        form_up = evolved_vertical_height(system, x0, t0, t0 + h, dt, tol)
        form_down = evolved_vertical_height(system, x0, t0, t0 - h, dt, tol)
        above &= form_up.positive == d
        below &= form_down.index == d
    derivative = vertical_height_derivative(system, x0, t0, offsets[1], dt, tol)
    expected = twist_matrix(system, t0, np.asarray(x0, dtype=float))
    return SignLawReport(offsets, bool(above), bool(below), derivative, expected)


# ══════════════════════════════════════════════════════════════════════════════
# Non-positivity audit
# ══════════════════════════════════════════════════════════════════════════════

AuditSample = tuple[Sequence[float], LagrangianFrame, float]


@dataclass(frozen=True)
class _SampleOutcome:
    index: int
    mi: int | None = None
    skipped: bool = False
    error: str | None = None
    bound_violations: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class AuditReport:
    """
    Outcome of a non-positivity audit.

    Attributes:
        n_samples: number of audited samples
        skipped: samples whose endpoints meet the vertical
        violations: (sample index, MI) pairs with MI > 0
        bound_violations: failures of |αMI - MI| < d or the 8d subspace bound
        histogram: MI value -> count
        errors: (sample index, message) for samples that failed numerically
        certificate_id: twist certificate the audit relied on, if any
    """

    n_samples: int
    skipped: int
    violations: list[tuple[int, int]]
    bound_violations: list[str]
    histogram: dict[int, int]
    errors: list[tuple[int, str]] = field(default_factory=list)
    certificate_id: str | None = None

    @property
    def passed(self) -> bool:
        return not self.violations and not self.bound_violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_samples": self.n_samples,
            "skipped": self.skipped,
            "violations": [list(v) for v in self.violations],
            "bound_violations": list(self.bound_violations),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "errors": [list(e) for e in self.errors],
            "certificate_id": self.certificate_id,
            "passed": self.passed,
        }


def _partner_frame(L0: LagrangianFrame) -> LagrangianFrame:
    """A second frame at the same base point: the vertical, or the horizontal if L0 is vertical."""
    V = LagrangianFrame.vertical(L0.dim)
    return LagrangianFrame.horizontal(L0.dim) if L0.same_subspace(V, 1e-6) else V


def _audit_sample(
    system: ConformalSystem,
    index: int,
    sample: AuditSample,
    dt: float,
    tol: Tolerances,
    paired: bool,
) -> _SampleOutcome:
    x0, L0, horizon = sample
    d = system.dim
    try:
        path, _ = lagrangian_path(system, x0, L0, (0.0, float(horizon)), dt, tol=tol)
        running = running_maslov(path)
        problems = []
        defined = ~np.isnan(running.mi)
        gap = np.abs(running.alpha_mi[defined] - running.mi[defined])
        if gap.size and gap.max() >= d:
            problems.append(f"sample {index}: |αMI - MI| = {gap.max():.6g} >= {d}")
        if paired:
            other, _ = lagrangian_path(system, x0, _partner_frame(L0), (0.0, float(horizon)), dt, tol=tol)
            spread = abs(running.alpha_mi[-1] - running_maslov(other).alpha_mi[-1])
            if spread >= 8 * d:
                problems.append(f"sample {index}: subspace spread {spread:.6g} >= {8 * d}")
        if running.vert_dim[0] or running.vert_dim[-1]:
            return _SampleOutcome(index, skipped=True, bound_violations=tuple(problems))
        return _SampleOutcome(index, mi=running.mi_at(-1), bound_violations=tuple(problems))
    except NumericalError as e:
        logger.warning(f"Audit sample {index} failed: {e}")
        return _SampleOutcome(index, error=str(e))


def nonpositivity_audit(
    system: ConformalSystem,
    samples: Sequence[AuditSample],
    dt: float = DEFAULT_DT,
    certificate: TwistCertificate | None = None,
    paired: bool = True,
    mapper: Callable[[Callable[[int], _SampleOutcome], Iterable[int]], Iterable[_SampleOutcome]] = map,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> AuditReport:
    """
    Compute MI for every (x0, L0, horizon) sample and report any MI > 0.

    Args:
        system: System expected to twist the vertical on the visited region
        samples: (initial state, initial frame, horizon) triples
        dt: RK4 step
        certificate: Twist certificate the caller relies on (recorded only)
        paired: Also transport a second frame per sample for the 8d bound
        mapper: map-like callable; pass a thread-pool map to run samples concurrently
        tol: Tolerances

    Returns:
        AuditReport (endpoint-on-Σ samples are skipped and counted)
    """
    if certificate is not None and certificate.verdict != STRICT_TWIST:
        logger.warning(
            f"Auditing against certificate {certificate.certificate_id} with verdict {certificate.verdict}"
        )

    def work(i: int) -> _SampleOutcome:
        return _audit_sample(system, i, samples[i], dt, tol, paired)

    outcomes = sorted(mapper(work, range(len(samples))), key=lambda o: o.index)
    histogram: Counter[int] = Counter()
    violations, bounds, errors, skipped = [], [], [], 0
    for outcome in outcomes:
        bounds.extend(outcome.bound_violations)
        if outcome.error is not None:
            errors.append((outcome.index, outcome.error))
        elif outcome.skipped:
            skipped += 1
        else:
            histogram[outcome.mi] += 1
            if outcome.mi > 0:
                violations.append((outcome.index, outcome.mi))

    report = AuditReport(
        n_samples=len(samples),
        skipped=skipped,
        violations=violations,
        bound_violations=bounds,
        histogram=dict(histogram),
        errors=errors,
        certificate_id=certificate.certificate_id if certificate else None,
    )
    logger.info(
        f"Audit of {system.name}: {len(samples)} samples, {skipped} skipped, "
        f"{len(violations)} violation(s), histogram {dict(sorted(histogram.items()))}"
    )
    return report
