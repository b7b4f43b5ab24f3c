"""
selftest.py — Invariant Suite

Runs the library's identities, sign laws and bounds end to end at desk
scale and tabulates pass/fail per check. Steps are coarser than the library
defaults where RK4 error stays far below the asserted tolerances.
"""

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from analysis.asymptotic import asymptotic_index
from analysis.maslov_path import LagrangianPath, crossing_mi, maslov_index, reduced_path, running_maslov
from analysis.twist import nonpositivity_audit, sign_law_check
from dynamics.flow import lagrangian_path, tangent_flow
from dynamics.systems import damped_pendulum, discounted_tonelli, free, harmonic, linear, torus_coupled
from symplectic.angles import delta
from symplectic.linalg import (
    CoisotropicData,
    LagrangianFrame,
    height,
    is_lagrangian,
    omega_matrix,
    random_lagrangian,
    random_symplectic,
)
from utils.errors import MaslovError, TransversalityError
from utils.formatting import render_status, render_table
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


# ══════════════════════════════════════════════════════════════════════════════
# Checks: each returns (passed, detail)
# ══════════════════════════════════════════════════════════════════════════════

def check_lagrangian_frames() -> tuple[bool, str]:
    worst = 0.0
    for d in (1, 2, 3):
        omega = omega_matrix(d)
        for seed in range(20):
            M = random_symplectic(d, seed)
            worst = max(worst, float(np.max(np.abs(M.T @ omega @ M - omega)))
                        / max(1.0, float(np.max(np.abs(M))) ** 2))
            if not is_lagrangian(random_lagrangian(d, seed).columns):
                return False, f"random frame d={d} seed={seed} is not Lagrangian"
    return worst < 1e-9, f"max relative symplectic defect {worst:.2e}"


def check_height_cocycle() -> tuple[bool, str]:
    worst, tried = 0.0, 0
    for d in (1, 2, 3):
        V = LagrangianFrame.vertical(d)
        for seed in range(15):
            L1, L2, L3 = (random_lagrangian(d, 3 * seed + j + 100 * d) for j in range(3))
            try:
                Q12, Q23, Q13 = height(V, L1, L2), height(V, L2, L3), height(V, L1, L3)
            except TransversalityError:
                continue
            tried += 1
            scale = max(1.0, float(np.max(np.abs(Q13.matrix))))
            worst = max(worst, float(np.max(np.abs(Q12.matrix + Q23.matrix - Q13.matrix))) / scale)
    return tried > 0 and worst < 1e-9, f"{tried} triples, max defect {worst:.2e}"


def check_delta_consistency() -> tuple[bool, str]:
    for d in (1, 2, 3):
        for seed in range(20):
            value = delta(random_lagrangian(d, seed)).value
            if abs(abs(value) - 1.0) > 1e-9:
                return False, f"|Δ| = {abs(value):.12g} for d={d} seed={seed}"
    return True, "det² matches the angle sum on 60 frames"


def _harmonic_path():
    path, _ = lagrangian_path(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1),
                              (0.0, 2.0 * math.pi), 1e-3)
    return path


def check_harmonic_index() -> tuple[bool, str]:
    running = running_maslov(_harmonic_path())
    alpha, mi = float(running.alpha_mi[-1]), running.mi_at(-1)
    return mi == -2 and abs(alpha + 2.0) < 1e-6, f"MI = {mi}, αMI = {alpha:.9f}"


def check_crossing_orientation() -> tuple[bool, str]:
    report = crossing_mi(_harmonic_path())
    signs = [c.sign for c in report.crossings]
    ok = report.mi == -2 and signs == [-1, -1] and report.coorientation_mismatches == 0
    return ok, f"crossing signs {signs}, {report.coorientation_mismatches} height mismatch(es)"


def check_crossing_agreement() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    compared = 0
    for trial in range(8):
        d = 1 + trial % 2
        A = rng.standard_normal((2 * d, 2 * d))
        system = linear(0.5 * (A + A.T))
        L0 = random_lagrangian(d, 1000 + trial)
        try:
            path, _ = lagrangian_path(system, np.zeros(2 * d), L0, (0.0, 3.0), 1e-2)
            expected, counted = maslov_index(path), crossing_mi(path).mi
        except MaslovError as e:
            logger.debug(f"Crossing agreement trial {trial} skipped: {e}")
            continue
        compared += 1
        if expected != counted:
            return False, f"trial {trial}: angular MI {expected} vs crossing count {counted}"
    return compared > 0, f"{compared} random linear paths agree"


def check_transverse_nullity() -> tuple[bool, str]:
    path, _ = lagrangian_path(free(1), [0.0, 1.0], LagrangianFrame.horizontal(1), (0.0, 100.0), 0.1)
    mi = running_maslov(path).defined_mi()
    return bool(mi.size) and not np.any(mi), f"{mi.size} checkpoints, max |MI| = {int(np.max(np.abs(mi)))}"


def check_conformality() -> tuple[bool, str]:
    worst = 0.0
    for rate in (0.0, 0.1, 0.5):
        systems = [
            harmonic(1, rate), free(2, rate), damped_pendulum(rate), torus_coupled(0.1, rate),
            discounted_tonelli([{"coef": 0.5, "q_powers": [2]}], rate),
        ]
        for system in systems:
            x0 = np.full(2 * system.dim, 0.3)
            result = tangent_flow(system, x0, (0.0, 10.0), 1e-2)
            defect = float(result.conformal_defects()[-1])
            worst = max(worst, defect)
    return worst < 1e-6, f"max relative defect {worst:.2e}"


def check_reduction_invariance() -> tuple[bool, str]:
    d = 3
    e = np.eye(2 * d)
    # W = V + span(e_q1) contains the vertical; W⊥ = span(e_p2, e_p3)
    W = CoisotropicData.from_frame(np.column_stack([e[:, 0], e[:, 3], e[:, 4], e[:, 5]]))
    rng = np.random.default_rng(11)
    omega = omega_matrix(d)
    compared = 0
    for trial in range(20):
        A = rng.standard_normal((2 * d, 2 * d))
        S = 0.5 * (A + A.T)
        L0 = random_lagrangian(d, 2000 + trial).columns
        try:
            path = LagrangianPath.from_function(
                lambda t: expm(t * omega @ S) @ L0, np.linspace(0.0, 1.0, 51)
            )
            before = maslov_index(path)
            after = maslov_index(reduced_path(W, path))
        except MaslovError as err:
            logger.debug(f"Reduction trial {trial} skipped: {err}")
            continue
        compared += 1
        if before != after:
            return False, f"trial {trial}: MI {before} before reduction, {after} after"
    return compared > 0, f"{compared} paths keep their index"


def check_twist_nonpositivity() -> tuple[bool, str]:
    rng = np.random.default_rng(5)
    total, histogram = 0, {}
    for system in (harmonic(1), harmonic(2, 0.1), damped_pendulum(0.1)):
        d = system.dim
        samples = [
            (rng.uniform(-1.0, 1.0, 2 * d), random_lagrangian(d, int(rng.integers(1 << 30))),
             float(rng.uniform(1.0, 6.0)))
            for _ in range(8)
        ]
        report = nonpositivity_audit(system, samples, dt=1e-2)
        if not report.passed or report.errors:
            return False, f"{system.name}: violations {report.violations} {report.bound_violations}"
        total += report.n_samples - report.skipped
        for mi, count in report.histogram.items():
            histogram[mi] = histogram.get(mi, 0) + count
    return True, f"{total} samples, MI histogram {dict(sorted(histogram.items()))}"


def check_sign_law() -> tuple[bool, str]:
    worst = 0.0
    for system, x0 in ((harmonic(1), [0.3, 0.2]), (damped_pendulum(0.1), [1.0, -0.5]),
                       (torus_coupled(0.2, 0.1), [0.1, 0.4, 0.3, -0.2])):
        report = sign_law_check(system, x0)
        if not (report.positive_above and report.negative_below):
            return False, f"{system.name}: height not definite on both sides of t0"
        worst = max(worst, report.derivative_error)
    return worst < 1e-4, f"max derivative error {worst:.2e}"


def check_pendulum_rates() -> tuple[bool, str]:
    system = damped_pendulum(0.1)
    horizons = (50.0, 100.0, 200.0)
    sink = asymptotic_index(system, [0.0, 0.0], LagrangianFrame.horizontal(1), horizons, 2e-2).rate
    saddle = asymptotic_index(system, [math.pi, 0.0], LagrangianFrame.graph([[1.0]]),
                              horizons, 2e-2).rate
    expected = -math.sqrt(4.0 - 0.1 ** 2) / (2.0 * math.pi)
    ok = abs(sink - expected) < 1e-2 and abs(saddle) < 1e-3
    return ok, f"sink {sink:.5f} (expected {expected:.5f}), saddle {saddle:.2e}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("lagrangian-frames", check_lagrangian_frames),
    ("height-cocycle", check_height_cocycle),
    ("delta-consistency", check_delta_consistency),
    ("harmonic-index", check_harmonic_index),
    ("crossing-orientation", check_crossing_orientation),
    ("crossing-agreement", check_crossing_agreement),
    ("transverse-nullity", check_transverse_nullity),
    ("conformality", check_conformality),
    ("reduction-invariance", check_reduction_invariance),
    ("twist-nonpositivity", check_twist_nonpositivity),
    ("sign-law", check_sign_law),
    ("pendulum-rates", check_pendulum_rates),
]


def run_selftest(checks=None) -> list[CheckResult]:
    """Run every check; an exception counts as a failure of that check only."""
    results = []
    for name, check in checks or CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as e:
            logger.error(f"Check {name} raised: {e}", exc_info=True)
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        logger.info(f"{render_status(passed)} {name} ({elapsed:.2f}s): {detail}")
        results.append(CheckResult(name, bool(passed), detail, elapsed))
    return results


def render_results(results: list[CheckResult]) -> str:
    rows = [(r.name, render_status(r.passed), f"{r.seconds:.2f}s", r.detail) for r in results]
    failed = sum(not r.passed for r in results)
    footer = f"\n{len(results) - failed}/{len(results)} checks passed"
    return render_table(("check", "status", "time", "detail"), rows) + footer
