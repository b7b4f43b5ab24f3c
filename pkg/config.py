"""
config.py — Project Configuration and Constants

Centralized configuration for ConformalMaslov.
All numeric tolerances, integrator defaults and CLI settings used throughout
the application live here.
"""

import math
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

from utils.errors import ConfigError


# ══════════════════════════════════════════════════════════════════════════════
# Linear Algebra Tolerances
# ══════════════════════════════════════════════════════════════════════════════

# Smallest admissible singular value (relative to the largest) of a frame
RANK_TOL = 1e-8

# Largest admissible |F^T Ω F| entry for an orthonormalized Lagrangian frame
ISO_TOL = 1e-8

# Path frames with |F^T F - I| below this are taken as already orthonormal
ORTHONORMAL_TOL = 1e-10

# Relative eigenvalue threshold for signatures (scaled by the matrix norm)
SIG_TOL = 1e-8

# Largest admissible |S - S^T| entry (relative) before a matrix counts as asymmetric
SYMMETRY_TOL = 1e-9

# Angles within this distance of pi/2 are counted as vertical directions
ANGLE_TOL = 1e-7

# Eigenvalues of the Souriau map this close to -1 are pinned to theta = pi/2
EIGEN_PIN_TOL = 1e-12

# Allowed mismatch between det^2 and the angle-sum formula for Delta
DELTA_CHECK_TOL = 1e-9


# ══════════════════════════════════════════════════════════════════════════════
# Maslov Index Settings
# ══════════════════════════════════════════════════════════════════════════════

# |alpha_mi - boundary - mi| must stay below this
RESIDUAL_TOL = 1e-3

# Largest accepted phase step of arg(Delta) between consecutive samples
UNWRAP_GUARD = math.pi / 2

# Largest accepted step of a tracked crossing angle (2*theta - pi units)
CROSSING_GUARD = math.pi / 4

# Bisection stops when the bracket is shorter than TIME_TOL * horizon
TIME_TOL = 1e-10

# Angle velocity (rad per unit time) below which a crossing counts as tangential
VEL_TOL = 1e-6

# Two angles this close to the cut at the same instant make a degenerate crossing
DEGENERACY_TOL = 1e-6

# Samples with two angles this close to the cut are flagged as deep-stratum passages
STRATUM_TOL = 1e-3

# Maximum number of halvings when refining a sampled path
MAX_REFINE_DEPTH = 40

# Global coorientation constant: +1 counts angles increasing through pi/2 as positive
CROSSING_ORIENTATION = 1


# ══════════════════════════════════════════════════════════════════════════════
# Flow Integration
# ══════════════════════════════════════════════════════════════════════════════

# Default RK4 step
DEFAULT_DT = 1e-3

# Allowed conformality defect ||M^T Ω M - exp(-∫a) Ω|| (relative to max(1, ||M||^2))
CONFORMAL_TOL = 1e-6

# Relative central-difference step for user-supplied Hamiltonians
FD_STEP = 1e-5

# Allowed asymmetry of finite-difference Hessians
FD_SYMMETRY_TOL = 1e-4

# Initial states with ||X(x0)|| below EQUILIBRIUM_TOL * (1 + ||x0||) are held fixed
EQUILIBRIUM_TOL = 1e-12

# Coefficient-table Hamiltonians run the RK4 loop in compiled kernels
# (MASLOV_COMPILED_RK4=0 falls back to the Python stepper)
COMPILED_RK4 = os.environ.get("MASLOV_COMPILED_RK4", "1").strip() != "0"


# ══════════════════════════════════════════════════════════════════════════════
# Twist Analysis
# ══════════════════════════════════════════════════════════════════════════════

# Scale-aware zero test for the smallest eigenvalue of d2H/dp2
TWIST_MARGIN = 1e-9

# Default number of grid points per axis for twist certificates
TWIST_GRID_POINTS = 9

# Window (t - t0) used by the sign-law checks
SIGN_LAW_WINDOW = (1e-4, 1e-2)


# ══════════════════════════════════════════════════════════════════════════════
# Asymptotic Estimates and Scans
# ══════════════════════════════════════════════════════════════════════════════

# Cauchy-gap threshold for declaring an asymptotic rate converged
CONV_TOL = 1e-3

# Number of trailing partial rates compared by the Cauchy gap
CONV_WINDOW = 3

# Default burn-in as a fraction of the horizon
BURN_IN_FRACTION = 0.1

# State norm beyond which an orbit is declared non-compact
ESCAPE_BOUND = 1e6

# Default number of initial conditions in a graph scan
SCAN_POINTS = 100


# ══════════════════════════════════════════════════════════════════════════════
# Output & CLI
# ══════════════════════════════════════════════════════════════════════════════

# Significant digits for every floating-point number written to CSV
FLOAT_DIGITS = 17

# CSV header of the index command
INDEX_CSV_HEADER = (
    "t", "arg_delta_unwrapped", "alpha_mi", "mi_checkpoint", "vert_dim", "conformal_defect",
)

# Exit codes
EXIT_OK = 0
EXIT_INVARIANT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


# ══════════════════════════════════════════════════════════════════════════════
# Concurrency
# ══════════════════════════════════════════════════════════════════════════════

def _read_thread_count() -> int:
    raw = os.environ.get("MASLOV_THREADS", "")
    if not raw.strip():
        return os.cpu_count() or 1
    try:
        return int(raw)
    except ValueError:
        return -1


# Worker threads for scans and audits (MASLOV_THREADS overrides)
MAX_THREADS = _read_thread_count()


# ══════════════════════════════════════════════════════════════════════════════
# Logging
# ══════════════════════════════════════════════════════════════════════════════

LOG_FILE = "maslov.log"
LOG_LEVEL = "INFO"  # DEBUG, INFO, WARNING, ERROR, CRITICAL


# ══════════════════════════════════════════════════════════════════════════════
# Application Metadata
# ══════════════════════════════════════════════════════════════════════════════

APP_NAME = "ConformalMaslov"
APP_VERSION = "1.0.0"
APP_LICENSE = "MIT License"


# ══════════════════════════════════════════════════════════════════════════════
# Tolerance Bundle
# ══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Tolerances:
    """
    Numeric tolerances passed through every index computation.

    Defaults mirror the module constants; a run configuration may override
    any field by name through `with_overrides`.
    """

    rank_tol: float = RANK_TOL
    iso_tol: float = ISO_TOL
    sig_tol: float = SIG_TOL
    angle_tol: float = ANGLE_TOL
    residual_tol: float = RESIDUAL_TOL
    unwrap_guard: float = UNWRAP_GUARD
    crossing_guard: float = CROSSING_GUARD
    time_tol: float = TIME_TOL
    vel_tol: float = VEL_TOL
    degeneracy_tol: float = DEGENERACY_TOL
    stratum_tol: float = STRATUM_TOL
    max_refine_depth: int = MAX_REFINE_DEPTH
    conformal_tol: float = CONFORMAL_TOL
    fd_step: float = FD_STEP
    equilibrium_tol: float = EQUILIBRIUM_TOL
    twist_margin: float = TWIST_MARGIN
    conv_tol: float = CONV_TOL
    conv_window: int = CONV_WINDOW
    escape_bound: float = ESCAPE_BOUND

    def with_overrides(self, overrides: Mapping[str, Any] | None) -> "Tolerances":
        """Return a copy with the named fields replaced; unknown names raise ConfigError."""
        if not overrides:
            return self
        known = {f.name: f.type for f in fields(self)}
        unknown = sorted(set(overrides) - set(known))
        if unknown:
            raise ConfigError(f"Unknown tolerance override(s): {', '.join(unknown)}")
        cast: dict[str, Any] = {}
        for name, value in overrides.items():
            try:
                cast[name] = int(value) if name in ("max_refine_depth", "conv_window") else float(value)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Tolerance '{name}' must be numeric, got {value!r}") from e
            if cast[name] <= 0:
                raise ConfigError(f"Tolerance '{name}' must be positive, got {value!r}")
        return replace(self, **cast)


DEFAULT_TOLERANCES = Tolerances()


# ══════════════════════════════════════════════════════════════════════════════
# Configuration Validation
# ══════════════════════════════════════════════════════════════════════════════

def validate_config():
    """
    Validate all configuration values are within acceptable ranges.
    Raises ValueError if any configuration is invalid.
    """
    errors = []

    for name in ("RANK_TOL", "ISO_TOL", "ORTHONORMAL_TOL", "SIG_TOL", "ANGLE_TOL", "RESIDUAL_TOL",
                 "TIME_TOL", "VEL_TOL", "CONFORMAL_TOL", "FD_STEP", "CONV_TOL", "ESCAPE_BOUND",
                 "DEFAULT_DT"):
        value = globals()[name]
        if not value > 0:
            errors.append(f"{name} must be positive, got {value}")

    if not (0.0 < UNWRAP_GUARD < math.pi):
        errors.append(f"UNWRAP_GUARD must lie in (0, pi), got {UNWRAP_GUARD}")

    if not (0.0 < CROSSING_GUARD < math.pi / 2):
        errors.append(f"CROSSING_GUARD must lie in (0, pi/2), got {CROSSING_GUARD}")

    if RESIDUAL_TOL >= 0.5:
        errors.append(f"RESIDUAL_TOL must be below 0.5 for rounding to be meaningful, got {RESIDUAL_TOL}")

    if CROSSING_ORIENTATION not in (-1, 1):
        errors.append(f"CROSSING_ORIENTATION must be +1 or -1, got {CROSSING_ORIENTATION}")

    if MAX_REFINE_DEPTH < 1:
        errors.append(f"MAX_REFINE_DEPTH must be at least 1, got {MAX_REFINE_DEPTH}")

    if CONV_WINDOW < 2:
        errors.append(f"CONV_WINDOW must be at least 2, got {CONV_WINDOW}")

    if not (0.0 < BURN_IN_FRACTION < 1.0):
        errors.append(f"BURN_IN_FRACTION must lie in (0, 1), got {BURN_IN_FRACTION}")

    lo, hi = SIGN_LAW_WINDOW
    if not (0.0 < lo < hi):
        errors.append(f"SIGN_LAW_WINDOW must satisfy 0 < lo < hi, got {SIGN_LAW_WINDOW}")

    if TWIST_GRID_POINTS < 2:
        errors.append(f"TWIST_GRID_POINTS must be at least 2, got {TWIST_GRID_POINTS}")

    if SCAN_POINTS < 1:
        errors.append(f"SCAN_POINTS must be positive, got {SCAN_POINTS}")

    if FLOAT_DIGITS != 17:
        errors.append(f"FLOAT_DIGITS must be 17 for lossless output, got {FLOAT_DIGITS}")

    if MAX_THREADS < 1:
        errors.append(f"MASLOV_THREADS must be a positive integer, got {os.environ.get('MASLOV_THREADS')!r}")

    if errors:
        raise ValueError("Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors))


# Validate configuration on import
validate_config()
